#pragma once

// Type-1 Mamdani fuzzy inference: min AND, min implication, max aggregation,
// centroid defuzzification over a uniform grid.

#include <array>
#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace hospsim::fuzzy {

/// Base class of every error raised while building a fuzzy system. Carries the
/// 1-based source location when the system came from a definition file (0 when
/// built programmatically).
class FlsError : public std::runtime_error {
 public:
  FlsError(const std::string& what, int line = 0, int column = 0);
  int line() const noexcept { return line_; }
  int column() const noexcept { return column_; }

 private:
  int line_;
  int column_;
};

/// Malformed text: unknown keyword, bad number, wrong token count.
class FlsParseError : public FlsError {
  using FlsError::FlsError;
};

/// A rule or term names a variable or term that does not exist.
class FlsReferenceError : public FlsError {
  using FlsError::FlsError;
};

/// Membership-function parameters out of order (e.g. tri 5 2 8).
class FlsOrderingError : public FlsError {
  using FlsError::FlsError;
};

/// Some point of the input space fires no rule.
class FlsIncompleteError : public FlsError {
  using FlsError::FlsError;
};

/// Any other structural violation (duplicate names, empty rule base, ...).
class FlsDefinitionError : public FlsError {
  using FlsError::FlsError;
};

/// Raised by inference when the caller omits an input variable.
class InferenceError : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Interval {
  double lo = 0.0;
  double hi = 1.0;

  double width() const noexcept { return hi - lo; }
  double midpoint() const noexcept { return lo + 0.5 * (hi - lo); }
  bool contains(double x) const noexcept { return x >= lo && x <= hi; }
  double clamp(double x) const noexcept { return x < lo ? lo : (x > hi ? hi : x); }
};

/// Piecewise-linear membership function. A triangle is stored as a trapezoid
/// with a single-point plateau.
class MembershipFunction {
 public:
  enum class Shape { Triangular, Trapezoidal };

  static MembershipFunction triangular(double a, double b, double c);
  static MembershipFunction trapezoidal(double a, double b, double c, double d);

  Shape shape() const noexcept { return shape_; }
  /// The defining parameters: three for a triangle, four for a trapezoid.
  std::vector<double> parameters() const;
  /// Support [a, d].
  Interval support() const noexcept { return {p_[0], p_[3]}; }

  double degree(double x) const noexcept;

  /// Affine image y -> scale * y + offset (scale > 0).
  MembershipFunction rescaled(double scale, double offset) const;

 private:
  MembershipFunction(Shape shape, std::array<double, 4> p) : shape_(shape), p_(p) {}

  Shape shape_;
  std::array<double, 4> p_;
};

struct Term {
  std::string name;
  MembershipFunction mf;
};

class LinguisticVariable {
 public:
  LinguisticVariable(std::string name, Interval universe, std::vector<Term> terms);

  const std::string& name() const noexcept { return name_; }
  const Interval& universe() const noexcept { return universe_; }
  const std::vector<Term>& terms() const noexcept { return terms_; }
  std::optional<std::size_t> term_index(std::string_view name) const;

  /// Degrees of every term at x, in term order. Requires x inside the universe.
  std::vector<double> degrees(double x) const;

 private:
  std::string name_;
  Interval universe_;
  std::vector<Term> terms_;
};

struct Antecedent {
  std::size_t variable;  // index into FuzzySystem::inputs()
  std::size_t term;
};

struct Rule {
  std::vector<Antecedent> antecedents;  // combined with AND (min)
  std::size_t consequent;               // term index of the output variable
  int source_line = 0;
};

/// Immutable once constructed. The constructor checks every structural
/// invariant, including rule-base completeness over a grid of the input space.
class FuzzySystem {
 public:
  static constexpr int kDefaultResolution = 1001;

  FuzzySystem(std::vector<LinguisticVariable> inputs, LinguisticVariable output,
              std::vector<Rule> rules, int resolution = kDefaultResolution);

  const std::vector<LinguisticVariable>& inputs() const noexcept { return inputs_; }
  const LinguisticVariable& output() const noexcept { return output_; }
  const std::vector<Rule>& rules() const noexcept { return rules_; }
  int resolution() const noexcept { return resolution_; }
  std::optional<std::size_t> input_index(std::string_view name) const;

 private:
  void check_completeness() const;

  std::vector<LinguisticVariable> inputs_;
  LinguisticVariable output_;
  std::vector<Rule> rules_;
  int resolution_;
};

/// Output fuzzy set after implication and aggregation:
/// degree(y) = max_r min(strength_r, consequent_r(y)).
class AggregatedOutput {
 public:
  struct Activation {
    double strength;
    MembershipFunction consequent;
  };

  AggregatedOutput() = default;
  explicit AggregatedOutput(std::vector<Activation> activations)
      : activations_(std::move(activations)) {}

  double degree(double y) const noexcept;
  bool is_zero() const noexcept;
  const std::vector<Activation>& activations() const noexcept { return activations_; }

 private:
  std::vector<Activation> activations_;
};

struct Centroid {
  double value;
  /// True when the aggregate was identically zero and the universe midpoint
  /// was substituted.
  bool fallback = false;
};

std::map<std::string, double> fuzzify(const LinguisticVariable& v, double x);

/// Firing strength of every rule, in rule order. Inputs are in declaration
/// order and must already lie inside their universes.
std::vector<double> firing_strengths(const FuzzySystem& fs, std::span<const double> inputs);

AggregatedOutput evaluate_rules(const FuzzySystem& fs, std::span<const double> inputs);
AggregatedOutput evaluate_rules(const FuzzySystem& fs, const std::map<std::string, double>& inputs);

Centroid defuzzify_centroid(const AggregatedOutput& agg, Interval universe, int resolution);

/// Full pipeline. Inputs are clamped to their universes first.
Centroid infer(const FuzzySystem& fs, std::span<const double> inputs);
Centroid infer(const FuzzySystem& fs, const std::map<std::string, double>& inputs);

/// Same rules and inputs with the output universe and every output term mapped
/// through y -> scale * y + offset.
FuzzySystem rescale_output(const FuzzySystem& fs, double scale, double offset);

}  // namespace hospsim::fuzzy
