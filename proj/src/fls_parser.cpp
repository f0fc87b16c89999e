#include "hospsim/fls_parser.hpp"

#include <charconv>
#include <fstream>
#include <optional>
#include <sstream>
#include <vector>

#include <fmt/format.h>

namespace hospsim::fuzzy {

namespace {

struct Token {
  std::string_view text;
  int column;  // 1-based
};

std::vector<Token> tokenize(std::string_view line) {
  std::vector<Token> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) ++i;
    if (i >= line.size() || line[i] == '#') break;
    const std::size_t start = i;
    while (i < line.size() && line[i] != ' ' && line[i] != '\t' && line[i] != '\r' && line[i] != '#') ++i;
    out.push_back({line.substr(start, i - start), static_cast<int>(start) + 1});
  }
  return out;
}

bool keyword(const Token& t, std::string_view kw) {
  if (t.text.size() != kw.size()) return false;
  for (std::size_t i = 0; i < kw.size(); ++i) {
    char c = t.text[i];
    if (c >= 'a' && c <= 'z') c = static_cast<char>(c - 'a' + 'A');
    if (c != kw[i]) return false;
  }
  return true;
}

bool is_identifier(std::string_view s) {
  if (s.empty()) return false;
  auto alpha = [](char c) { return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c == '_'; };
  if (!alpha(s[0])) return false;
  for (char c : s)
    if (!alpha(c) && !(c >= '0' && c <= '9') && c != '-') return false;
  return true;
}

struct PendingTerm {
  std::string name;
  std::optional<MembershipFunction> mf;
  int line;
};

struct PendingVariable {
  std::string name;
  bool is_output;
  Interval universe;
  int line;
  std::vector<PendingTerm> terms;
};

struct PendingClause {
  Token variable;
  Token term;
};

struct PendingRule {
  std::vector<PendingClause> antecedents;
  PendingClause consequent;
  int line;
};

class Parser {
 public:
  explicit Parser(int resolution) : resolution_(resolution) {}

  FuzzySystem parse(std::string_view text) {
    int line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
      const std::size_t eol = text.find('\n', pos);
      const std::string_view line = text.substr(pos, eol == std::string_view::npos ? text.size() - pos : eol - pos);
      ++line_no;
      parse_line(tokenize(line), line_no);
      if (eol == std::string_view::npos) break;
      pos = eol + 1;
    }
    return build();
  }

 private:
  [[noreturn]] void fail(const Token& t, int line, const std::string& msg) const {
    throw FlsParseError(msg, line, t.column);
  }

  double number(const Token& t, int line) const {
    double v = 0.0;
    const char* first = t.text.data();
    const char* last = first + t.text.size();
    if (!t.text.empty() && *first == '+') ++first;
    auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc() || ptr != last) fail(t, line, fmt::format("expected a number, found '{}'", t.text));
    return v;
  }

  void expect_count(const std::vector<Token>& toks, std::size_t n, int line, std::string_view what) const {
    if (toks.size() != n) {
      const Token& at = toks.size() > n ? toks[n] : toks.back();
      fail(at, line, fmt::format("{} takes {} fields, found {}", what, n, toks.size()));
    }
  }

  PendingVariable* find_var(std::string_view name) {
    for (auto& v : vars_)
      if (v.name == name) return &v;
    return nullptr;
  }

  void parse_line(const std::vector<Token>& toks, int line) {
    if (toks.empty()) return;
    const Token& head = toks[0];
    if (keyword(head, "VAR")) {
      parse_var(toks, line);
    } else if (keyword(head, "TERM")) {
      parse_term(toks, line);
    } else if (keyword(head, "RULE")) {
      parse_rule(toks, line);
    } else {
      fail(head, line, fmt::format("unknown statement '{}'", head.text));
    }
  }

  void parse_var(const std::vector<Token>& toks, int line) {
    expect_count(toks, 5, line, "var");
    bool is_output = false;
    if (keyword(toks[1], "OUTPUT")) {
      is_output = true;
    } else if (!keyword(toks[1], "INPUT")) {
      fail(toks[1], line, fmt::format("expected 'input' or 'output', found '{}'", toks[1].text));
    }
    if (!is_identifier(toks[2].text)) fail(toks[2], line, fmt::format("invalid variable name '{}'", toks[2].text));
    if (find_var(toks[2].text))
      throw FlsDefinitionError(fmt::format("variable '{}' declared twice", toks[2].text), line, toks[2].column);
    const double lo = number(toks[3], line);
    const double hi = number(toks[4], line);
    if (!(lo < hi)) throw FlsOrderingError(fmt::format("universe needs lo < hi, got {} {}", lo, hi), line, toks[3].column);
    if (is_output) {
      for (const auto& v : vars_)
        if (v.is_output)
          throw FlsDefinitionError(fmt::format("second output variable '{}' (one output per definition)", toks[2].text),
                                   line, toks[2].column);
    }
    vars_.push_back({std::string(toks[2].text), is_output, {lo, hi}, line, {}});
  }

  void parse_term(const std::vector<Token>& toks, int line) {
    if (toks.size() < 4) fail(toks.back(), line, "term needs: term <var> <name> tri a b c | trap a b c d");
    PendingVariable* var = find_var(toks[1].text);
    if (!var) throw FlsReferenceError(fmt::format("term for undeclared variable '{}'", toks[1].text), line, toks[1].column);
    if (!is_identifier(toks[2].text)) fail(toks[2], line, fmt::format("invalid term name '{}'", toks[2].text));
    for (const auto& t : var->terms)
      if (t.name == toks[2].text)
        throw FlsDefinitionError(fmt::format("term '{}' declared twice for '{}'", toks[2].text, var->name), line,
                                 toks[2].column);
    PendingTerm term{std::string(toks[2].text), std::nullopt, line};
    try {
      if (keyword(toks[3], "TRI")) {
        expect_count(toks, 7, line, "tri term");
        term.mf = MembershipFunction::triangular(number(toks[4], line), number(toks[5], line), number(toks[6], line));
      } else if (keyword(toks[3], "TRAP")) {
        expect_count(toks, 8, line, "trap term");
        term.mf = MembershipFunction::trapezoidal(number(toks[4], line), number(toks[5], line), number(toks[6], line),
                                                  number(toks[7], line));
      } else {
        fail(toks[3], line, fmt::format("unknown membership shape '{}' (expected tri or trap)", toks[3].text));
      }
    } catch (const FlsOrderingError& e) {
      if (e.line() > 0) throw;
      throw FlsOrderingError(fmt::format("term '{}': {}", term.name, e.what()), line, toks[4].column);
    }
    const auto s = term.mf->support();
    if (s.lo < var->universe.lo || s.hi > var->universe.hi)
      throw FlsDefinitionError(fmt::format("term '{}' support [{}, {}] leaves universe [{}, {}] of '{}'", term.name,
                                           s.lo, s.hi, var->universe.lo, var->universe.hi, var->name),
                               line, toks[4].column);
    var->terms.push_back(std::move(term));
  }

  void parse_rule(const std::vector<Token>& toks, int line) {
    // rule IF v IS t (AND v IS t)* THEN v IS t
    std::size_t i = 1;
    auto need = [&](std::string_view kw) {
      if (i >= toks.size()) fail(toks.back(), line, fmt::format("rule ends early, expected '{}'", kw));
      if (!keyword(toks[i], kw)) fail(toks[i], line, fmt::format("expected '{}', found '{}'", kw, toks[i].text));
      ++i;
    };
    auto clause = [&]() {
      if (i + 2 >= toks.size()) fail(toks.back(), line, "rule ends early, expected '<variable> IS <term>'");
      PendingClause c{toks[i], toks[i + 2]};
      ++i;
      need("IS");
      ++i;
      return c;
    };
    need("IF");
    PendingRule rule{{}, {}, line};
    rule.antecedents.push_back(clause());
    while (i < toks.size() && keyword(toks[i], "AND")) {
      ++i;
      rule.antecedents.push_back(clause());
    }
    need("THEN");
    rule.consequent = clause();
    if (i != toks.size()) fail(toks[i], line, fmt::format("unexpected '{}' after rule consequent", toks[i].text));
    rules_.push_back(std::move(rule));
  }

  FuzzySystem build() {
    std::vector<LinguisticVariable> inputs;
    std::vector<const PendingVariable*> input_src;
    const PendingVariable* output = nullptr;
    for (const auto& v : vars_) {
      if (v.is_output) {
        output = &v;
        continue;
      }
      input_src.push_back(&v);
    }
    if (!output) throw FlsDefinitionError("no output variable declared");
    if (input_src.empty()) throw FlsDefinitionError("no input variable declared");

    auto make = [](const PendingVariable& v) {
      std::vector<Term> terms;
      for (const auto& t : v.terms) terms.push_back({t.name, *t.mf});
      if (terms.empty()) throw FlsDefinitionError(fmt::format("variable '{}' has no terms", v.name), v.line, 1);
      return LinguisticVariable(v.name, v.universe, std::move(terms));
    };
    for (const auto* v : input_src) inputs.push_back(make(*v));
    LinguisticVariable out = make(*output);

    std::vector<Rule> rules;
    for (std::size_t r = 0; r < rules_.size(); ++r) {
      const auto& pr = rules_[r];
      auto unknown = [&](const Token& t, std::string_view what) -> FlsReferenceError {
        return FlsReferenceError(fmt::format("rule {}: unknown {} '{}'", r + 1, what, t.text), pr.line, t.column);
      };
      Rule rule;
      rule.source_line = pr.line;
      for (const auto& c : pr.antecedents) {
        std::optional<std::size_t> vi;
        for (std::size_t k = 0; k < inputs.size(); ++k)
          if (inputs[k].name() == c.variable.text) vi = k;
        if (!vi) {
          if (c.variable.text == out.name())
            throw FlsReferenceError(fmt::format("rule {}: output '{}' used as antecedent", r + 1, out.name()), pr.line,
                                    c.variable.column);
          throw unknown(c.variable, "input variable");
        }
        auto ti = inputs[*vi].term_index(c.term.text);
        if (!ti) throw unknown(c.term, fmt::format("term of '{}'", inputs[*vi].name()));
        for (const auto& prev : rule.antecedents)
          if (prev.variable == *vi)
            throw FlsDefinitionError(fmt::format("rule {} tests '{}' twice", r + 1, inputs[*vi].name()), pr.line,
                                     c.variable.column);
        rule.antecedents.push_back({*vi, *ti});
      }
      if (pr.consequent.variable.text != out.name()) throw unknown(pr.consequent.variable, "output variable");
      auto ti = out.term_index(pr.consequent.term.text);
      if (!ti) throw unknown(pr.consequent.term, fmt::format("term of '{}'", out.name()));
      rule.consequent = *ti;
      rules.push_back(std::move(rule));
    }
    if (rules.empty()) throw FlsDefinitionError("rule base is empty");
    return FuzzySystem(std::move(inputs), std::move(out), std::move(rules), resolution_);
  }

  int resolution_;
  std::vector<PendingVariable> vars_;
  std::vector<PendingRule> rules_;
};

}  // namespace

FuzzySystem load_fls_definition(std::string_view text, int resolution) { return Parser(resolution).parse(text); }

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::ios_base::failure(fmt::format("cannot open '{}'", path.string()));
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) throw std::ios_base::failure(fmt::format("cannot read '{}'", path.string()));
  return ss.str();
}

FuzzySystem load_fls_file(const std::filesystem::path& path) { return load_fls_definition(read_text_file(path)); }

}  // namespace hospsim::fuzzy
