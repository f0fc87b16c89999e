#include "hospsim/trust_network.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <fmt/format.h>

namespace hospsim {

std::string_view to_string(EdgeColor c) {
  switch (c) {
    case EdgeColor::Green: return "green";
    case EdgeColor::Yellow: return "yellow";
    case EdgeColor::Red: return "red";
  }
  return "?";
}

EdgeColor classify_edge(double ti, double tj, const EdgeThresholds& t) {
  const double gap = std::abs(ti - tj);
  if (gap < t.green_max) return EdgeColor::Green;
  if (gap < t.yellow_max) return EdgeColor::Yellow;
  return EdgeColor::Red;
}

TrustNetwork::TrustNetwork(int n_beds, EdgeThresholds thresholds, double alpha_per_hour)
    : n_beds_(n_beds), thresholds_(thresholds), alpha_(alpha_per_hour) {
  if (n_beds < 1) throw std::invalid_argument("trust network needs at least one bed");
  if (!(thresholds.green_max > 0.0 && thresholds.green_max < thresholds.yellow_max && thresholds.yellow_max <= 2.0))
    throw std::invalid_argument(fmt::format("edge thresholds need 0 < greenMax < yellowMax <= 2, got {} / {}",
                                            thresholds.green_max, thresholds.yellow_max));
  if (!(alpha_per_hour > 0.0 && alpha_per_hour <= 1.0))
    throw std::invalid_argument(fmt::format("alphaPerHour must lie in (0, 1], got {}", alpha_per_hour));
  adjacency_.resize(static_cast<std::size_t>(n_beds));
  for (int i = 0; i < n_beds; ++i) {
    for (int j = std::max(0, i - kReach); j <= std::min(n_beds - 1, i + kReach); ++j) {
      if (j == i) continue;
      adjacency_[static_cast<std::size_t>(i)].push_back(j);
      if (i < j) edges_.emplace_back(i, j);
    }
  }
}

std::span<const int> TrustNetwork::neighbors(int bed) const {
  if (bed < 0 || bed >= n_beds_) throw std::out_of_range(fmt::format("bed {} outside [0, {})", bed, n_beds_));
  return adjacency_[static_cast<std::size_t>(bed)];
}

TrustNetwork build_network(int n_beds, EdgeThresholds thresholds, double alpha_per_hour) {
  return TrustNetwork(n_beds, thresholds, alpha_per_hour);
}

BedTrust diffuse_trust(const BedTrust& trust, const TrustNetwork& net) {
  if (trust.size() != static_cast<std::size_t>(net.beds()))
    throw std::invalid_argument(fmt::format("trust vector has {} entries for {} beds", trust.size(), net.beds()));
  BedTrust next = trust;
  for (int i = 0; i < net.beds(); ++i) {
    const auto& self = trust[static_cast<std::size_t>(i)];
    if (!self) continue;
    // The bed's own value counts towards the local mean.
    double sum = *self;
    int count = 1;
    for (int j : net.neighbors(i)) {
      if (const auto& t = trust[static_cast<std::size_t>(j)]) {
        sum += *t;
        ++count;
      }
    }
    if (count == 1) continue;
    const double mean = sum / count;
    next[static_cast<std::size_t>(i)] = std::clamp(*self + net.alpha() * (mean - *self), 0.0, 1.0);
  }
  return next;
}

std::vector<EdgeState> edge_states(const BedTrust& trust, const TrustNetwork& net) {
  if (trust.size() != static_cast<std::size_t>(net.beds()))
    throw std::invalid_argument(fmt::format("trust vector has {} entries for {} beds", trust.size(), net.beds()));
  std::vector<EdgeState> out;
  for (const auto& [i, j] : net.edges()) {
    const auto& a = trust[static_cast<std::size_t>(i)];
    const auto& b = trust[static_cast<std::size_t>(j)];
    if (!a || !b) continue;
    out.push_back({i, j, std::abs(*a - *b), classify_edge(*a, *b, net.thresholds())});
  }
  return out;
}

EdgeCounts network_summary(const BedTrust& trust, const TrustNetwork& net) {
  EdgeCounts c;
  for (const auto& e : edge_states(trust, net)) {
    switch (e.color) {
      case EdgeColor::Green: ++c.green; break;
      case EdgeColor::Yellow: ++c.yellow; break;
      case EdgeColor::Red: ++c.red; break;
    }
  }
  return c;
}

}  // namespace hospsim
