#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string_view>
#include <utility>
#include <vector>

namespace hospsim {

enum class EdgeColor { Green, Yellow, Red };

std::string_view to_string(EdgeColor c);

struct EdgeThresholds {
  double green_max = 0.1;
  double yellow_max = 0.3;
};

/// |ti - tj| < green_max -> Green; < yellow_max -> Yellow; otherwise Red.
EdgeColor classify_edge(double ti, double tj, const EdgeThresholds& t);

struct EdgeCounts {
  std::size_t green = 0;
  std::size_t yellow = 0;
  std::size_t red = 0;

  std::size_t total() const noexcept { return green + yellow + red; }
  friend bool operator==(const EdgeCounts&, const EdgeCounts&) = default;
};

/// Trust of the patient in each bed; nullopt for an empty bed.
using BedTrust = std::vector<std::optional<double>>;

/// Patients in a single row of beds, each linked to the beds one and two
/// places away on either side.
class TrustNetwork {
 public:
  static constexpr int kReach = 2;

  TrustNetwork(int n_beds, EdgeThresholds thresholds = {}, double alpha_per_hour = 0.05);

  int beds() const noexcept { return n_beds_; }
  const EdgeThresholds& thresholds() const noexcept { return thresholds_; }
  double alpha() const noexcept { return alpha_; }
  /// Unordered pairs (i, j) with i < j, sorted.
  const std::vector<std::pair<int, int>>& edges() const noexcept { return edges_; }
  /// Sorted neighbour beds of `bed`.
  std::span<const int> neighbors(int bed) const;

 private:
  int n_beds_;
  EdgeThresholds thresholds_;
  double alpha_;
  std::vector<std::pair<int, int>> edges_;
  std::vector<std::vector<int>> adjacency_;
};

TrustNetwork build_network(int n_beds, EdgeThresholds thresholds = {}, double alpha_per_hour = 0.05);

/// One synchronous relaxation step: each occupied bed moves a fraction alpha
/// towards the mean over itself and its occupied neighbours. Beds without
/// occupied neighbours keep their value.
BedTrust diffuse_trust(const BedTrust& trust, const TrustNetwork& net);

/// Colour counts over edges whose both ends are occupied.
EdgeCounts network_summary(const BedTrust& trust, const TrustNetwork& net);

struct EdgeState {
  int i;
  int j;
  double gap;
  EdgeColor color;
};

/// Every occupied-occupied edge with its trust gap and colour.
std::vector<EdgeState> edge_states(const BedTrust& trust, const TrustNetwork& net);

}  // namespace hospsim
