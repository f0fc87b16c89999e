#include "hospsim/fuzzy.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include <fmt/format.h>

namespace hospsim::fuzzy {

FlsError::FlsError(const std::string& what, int line, int column)
    : std::runtime_error(line > 0 ? fmt::format("line {}, column {}: {}", line, column, what) : what),
      line_(line),
      column_(column) {}

// ---------------------------------------------------------------------------
// MembershipFunction

MembershipFunction MembershipFunction::triangular(double a, double b, double c) {
  if (!(std::isfinite(a) && std::isfinite(b) && std::isfinite(c)))
    throw FlsOrderingError("triangular parameters must be finite");
  if (!(a <= b && b <= c))
    throw FlsOrderingError(fmt::format("triangular parameters must satisfy a <= b <= c, got {} {} {}", a, b, c));
  if (a == c) throw FlsOrderingError(fmt::format("triangular support is empty ({} {} {})", a, b, c));
  return MembershipFunction(Shape::Triangular, {a, b, b, c});
}

MembershipFunction MembershipFunction::trapezoidal(double a, double b, double c, double d) {
  if (!(std::isfinite(a) && std::isfinite(b) && std::isfinite(c) && std::isfinite(d)))
    throw FlsOrderingError("trapezoidal parameters must be finite");
  if (!(a <= b && b <= c && c <= d))
    throw FlsOrderingError(
        fmt::format("trapezoidal parameters must satisfy a <= b <= c <= d, got {} {} {} {}", a, b, c, d));
  if (a == d) throw FlsOrderingError(fmt::format("trapezoidal support is empty ({} {} {} {})", a, b, c, d));
  return MembershipFunction(Shape::Trapezoidal, {a, b, c, d});
}

std::vector<double> MembershipFunction::parameters() const {
  if (shape_ == Shape::Triangular) return {p_[0], p_[1], p_[3]};
  return {p_[0], p_[1], p_[2], p_[3]};
}

double MembershipFunction::degree(double x) const noexcept {
  const auto [a, b, c, d] = p_;
  if (x < a || x > d) return 0.0;
  if (x >= b && x <= c) return 1.0;
  if (x < b) return (x - a) / (b - a);
  return (d - x) / (d - c);
}

MembershipFunction MembershipFunction::rescaled(double scale, double offset) const {
  std::array<double, 4> q{};
  std::transform(p_.begin(), p_.end(), q.begin(), [&](double v) { return scale * v + offset; });
  return MembershipFunction(shape_, q);
}

// ---------------------------------------------------------------------------
// LinguisticVariable

LinguisticVariable::LinguisticVariable(std::string name, Interval universe, std::vector<Term> terms)
    : name_(std::move(name)), universe_(universe), terms_(std::move(terms)) {
  if (!(std::isfinite(universe_.lo) && std::isfinite(universe_.hi) && universe_.lo < universe_.hi))
    throw FlsDefinitionError(fmt::format("variable '{}': universe must satisfy lo < hi", name_));
  if (terms_.empty()) throw FlsDefinitionError(fmt::format("variable '{}' has no terms", name_));
  std::set<std::string_view> seen;
  for (const auto& t : terms_) {
    if (!seen.insert(t.name).second)
      throw FlsDefinitionError(fmt::format("variable '{}': duplicate term '{}'", name_, t.name));
    const auto s = t.mf.support();
    if (s.lo < universe_.lo || s.hi > universe_.hi)
      throw FlsDefinitionError(fmt::format("variable '{}': term '{}' support [{}, {}] leaves universe [{}, {}]",
                                           name_, t.name, s.lo, s.hi, universe_.lo, universe_.hi));
  }
}

std::optional<std::size_t> LinguisticVariable::term_index(std::string_view name) const {
  for (std::size_t i = 0; i < terms_.size(); ++i)
    if (terms_[i].name == name) return i;
  return std::nullopt;
}

std::vector<double> LinguisticVariable::degrees(double x) const {
  if (!universe_.contains(x))
    throw std::domain_error(
        fmt::format("value {} outside universe [{}, {}] of '{}'", x, universe_.lo, universe_.hi, name_));
  std::vector<double> out;
  out.reserve(terms_.size());
  for (const auto& t : terms_) out.push_back(t.mf.degree(x));
  return out;
}

std::map<std::string, double> fuzzify(const LinguisticVariable& v, double x) {
  const auto d = v.degrees(x);
  std::map<std::string, double> out;
  for (std::size_t i = 0; i < d.size(); ++i) out.emplace(v.terms()[i].name, d[i]);
  return out;
}

// ---------------------------------------------------------------------------
// FuzzySystem

FuzzySystem::FuzzySystem(std::vector<LinguisticVariable> inputs, LinguisticVariable output,
                         std::vector<Rule> rules, int resolution)
    : inputs_(std::move(inputs)), output_(std::move(output)), rules_(std::move(rules)), resolution_(resolution) {
  if (inputs_.empty()) throw FlsDefinitionError("fuzzy system has no input variables");
  if (resolution_ < 3) throw FlsDefinitionError("resolution must be at least 3");
  std::set<std::string_view> names;
  for (const auto& v : inputs_)
    if (!names.insert(v.name()).second)
      throw FlsDefinitionError(fmt::format("duplicate variable '{}'", v.name()));
  if (names.count(output_.name()))
    throw FlsDefinitionError(fmt::format("duplicate variable '{}'", output_.name()));
  if (rules_.empty()) throw FlsDefinitionError("rule base is empty");

  std::vector<bool> used(inputs_.size(), false);
  for (std::size_t r = 0; r < rules_.size(); ++r) {
    const auto& rule = rules_[r];
    if (rule.antecedents.empty())
      throw FlsDefinitionError(fmt::format("rule {} has no antecedents", r + 1), rule.source_line, 1);
    std::vector<bool> in_rule(inputs_.size(), false);
    for (const auto& a : rule.antecedents) {
      if (a.variable >= inputs_.size() || a.term >= inputs_[a.variable].terms().size())
        throw FlsReferenceError(fmt::format("rule {} references a missing input term", r + 1), rule.source_line, 1);
      if (in_rule[a.variable])
        throw FlsDefinitionError(
            fmt::format("rule {} tests '{}' twice", r + 1, inputs_[a.variable].name()), rule.source_line, 1);
      in_rule[a.variable] = used[a.variable] = true;
    }
    if (rule.consequent >= output_.terms().size())
      throw FlsReferenceError(fmt::format("rule {} references a missing output term", r + 1), rule.source_line, 1);
  }
  for (std::size_t i = 0; i < inputs_.size(); ++i)
    if (!used[i]) throw FlsDefinitionError(fmt::format("input '{}' is not used by any rule", inputs_[i].name()));

  check_completeness();
}

std::optional<std::size_t> FuzzySystem::input_index(std::string_view name) const {
  for (std::size_t i = 0; i < inputs_.size(); ++i)
    if (inputs_[i].name() == name) return i;
  return std::nullopt;
}

void FuzzySystem::check_completeness() const {
  const std::size_t n = inputs_.size();
  // Roughly 10^4..10^6 grid points regardless of dimension.
  const int per_dim = n == 1 ? 1001 : n == 2 ? 201 : n == 3 ? 41 : 11;
  std::vector<int> idx(n, 0);
  std::vector<double> x(n);
  for (;;) {
    for (std::size_t i = 0; i < n; ++i) {
      const auto& u = inputs_[i].universe();
      x[i] = idx[i] == per_dim - 1 ? u.hi : u.lo + u.width() * idx[i] / (per_dim - 1);
    }
    const auto strengths = firing_strengths(*this, x);
    if (std::none_of(strengths.begin(), strengths.end(), [](double s) { return s > 0.0; })) {
      std::string where;
      for (std::size_t i = 0; i < n; ++i)
        where += fmt::format("{}{}={}", i ? ", " : "", inputs_[i].name(), x[i]);
      throw FlsIncompleteError("incomplete rule base: no rule fires at " + where);
    }
    std::size_t k = 0;
    while (k < n && ++idx[k] == per_dim) idx[k++] = 0;
    if (k == n) break;
  }
}

// ---------------------------------------------------------------------------
// Inference

double AggregatedOutput::degree(double y) const noexcept {
  double best = 0.0;
  for (const auto& a : activations_) best = std::max(best, std::min(a.strength, a.consequent.degree(y)));
  return best;
}

bool AggregatedOutput::is_zero() const noexcept {
  return std::none_of(activations_.begin(), activations_.end(), [](const Activation& a) { return a.strength > 0.0; });
}

std::vector<double> firing_strengths(const FuzzySystem& fs, std::span<const double> inputs) {
  if (inputs.size() != fs.inputs().size())
    throw InferenceError(fmt::format("expected {} inputs, got {}", fs.inputs().size(), inputs.size()));
  std::vector<std::vector<double>> deg;
  deg.reserve(inputs.size());
  for (std::size_t i = 0; i < inputs.size(); ++i) deg.push_back(fs.inputs()[i].degrees(inputs[i]));

  std::vector<double> out;
  out.reserve(fs.rules().size());
  for (const auto& rule : fs.rules()) {
    double s = 1.0;
    for (const auto& a : rule.antecedents) s = std::min(s, deg[a.variable][a.term]);
    out.push_back(s);
  }
  return out;
}

AggregatedOutput evaluate_rules(const FuzzySystem& fs, std::span<const double> inputs) {
  const auto strengths = firing_strengths(fs, inputs);
  std::vector<AggregatedOutput::Activation> acts;
  for (std::size_t r = 0; r < strengths.size(); ++r)
    if (strengths[r] > 0.0) acts.push_back({strengths[r], fs.output().terms()[fs.rules()[r].consequent].mf});
  return AggregatedOutput(std::move(acts));
}

namespace {

std::vector<double> ordered_inputs(const FuzzySystem& fs, const std::map<std::string, double>& inputs) {
  std::vector<double> x;
  x.reserve(fs.inputs().size());
  for (const auto& v : fs.inputs()) {
    auto it = inputs.find(v.name());
    if (it == inputs.end()) throw InferenceError(fmt::format("missing input variable '{}'", v.name()));
    x.push_back(it->second);
  }
  return x;
}

}  // namespace

AggregatedOutput evaluate_rules(const FuzzySystem& fs, const std::map<std::string, double>& inputs) {
  return evaluate_rules(fs, ordered_inputs(fs, inputs));
}

Centroid defuzzify_centroid(const AggregatedOutput& agg, Interval universe, int resolution) {
  if (resolution < 3) throw std::invalid_argument("centroid resolution must be at least 3");
  if (agg.is_zero()) return {universe.midpoint(), true};
  const double step = universe.width() / (resolution - 1);
  double num = 0.0;
  double den = 0.0;
  for (int i = 0; i < resolution; ++i) {
    const double y = i == resolution - 1 ? universe.hi : universe.lo + step * i;
    const double m = agg.degree(y);
    num += y * m;
    den += m;
  }
  // Every activation may sit strictly between grid points.
  if (den <= 0.0) return {universe.midpoint(), true};
  return {universe.clamp(num / den), false};
}

Centroid infer(const FuzzySystem& fs, std::span<const double> inputs) {
  if (inputs.size() != fs.inputs().size())
    throw InferenceError(fmt::format("expected {} inputs, got {}", fs.inputs().size(), inputs.size()));
  std::vector<double> x(inputs.begin(), inputs.end());
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (std::isnan(x[i])) throw InferenceError(fmt::format("input '{}' is NaN", fs.inputs()[i].name()));
    x[i] = fs.inputs()[i].universe().clamp(x[i]);
  }
  return defuzzify_centroid(evaluate_rules(fs, x), fs.output().universe(), fs.resolution());
}

Centroid infer(const FuzzySystem& fs, const std::map<std::string, double>& inputs) {
  return infer(fs, ordered_inputs(fs, inputs));
}

FuzzySystem rescale_output(const FuzzySystem& fs, double scale, double offset) {
  if (!(scale > 0.0)) throw std::invalid_argument("output rescaling needs a positive scale");
  const auto& out = fs.output();
  std::vector<Term> terms;
  for (const auto& t : out.terms()) terms.push_back({t.name, t.mf.rescaled(scale, offset)});
  const Interval u{scale * out.universe().lo + offset, scale * out.universe().hi + offset};
  return FuzzySystem(fs.inputs(), LinguisticVariable(out.name(), u, std::move(terms)), fs.rules(), fs.resolution());
}

}  // namespace hospsim::fuzzy
