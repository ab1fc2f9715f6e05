#include "jmlbench/triage.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>

namespace jmlbench {

namespace {

constexpr std::pair<FailureCategory::Value, std::string_view> kNames[] = {
    {FailureCategory::Value::SyntaxError, "SyntaxError"},
    {FailureCategory::Value::InvalidSpecification, "InvalidSpecification"},
    {FailureCategory::Value::UnsupportedQuantifier, "UnsupportedQuantifier"},
    {FailureCategory::Value::UnsupportedMinMaxQuantifier, "UnsupportedMinMaxQuantifier"},
    {FailureCategory::Value::PostconditionFailure, "PostconditionFailure"},
    {FailureCategory::Value::LoopInvariantFailure, "LoopInvariantFailure"},
    {FailureCategory::Value::ArithmeticOperationRange, "ArithmeticOperationRange"},
    {FailureCategory::Value::AssertionFailure, "AssertionFailure"},
    {FailureCategory::Value::NullDereference, "NullDereference"},
    {FailureCategory::Value::DivideByZero, "DivideByZero"},
    {FailureCategory::Value::ArrayIndexFailure, "ArrayIndexFailure"},
};

}  // namespace

FailureCategory FailureCategory::of(Value value) {
  if (value == Value::Other)
    throw std::invalid_argument("Other requires a label; use FailureCategory::other");
  return FailureCategory{value, ""};
}

FailureCategory FailureCategory::other(std::string label) {
  if (label.empty()) throw std::invalid_argument("Other requires a non-empty label");
  return FailureCategory{Value::Other, std::move(label)};
}

bool FailureCategory::operator<(const FailureCategory& o) const {
  return to_string(*this) < to_string(o);
}

std::string to_string(const FailureCategory& category) {
  for (const auto& [value, name] : kNames)
    if (value == category.value) return std::string(name);
  return "Other(" + category.label + ")";
}

std::optional<FailureCategory> failure_category_from_string(std::string_view name) {
  for (const auto& [value, text] : kNames)
    if (text == name) return FailureCategory::of(value);
  if (name.size() > 7 && name.substr(0, 6) == "Other(" && name.back() == ')')
    return FailureCategory::other(std::string(name.substr(6, name.size() - 7)));
  return std::nullopt;
}

PatternTable default_pattern_table() {
  using V = FailureCategory::Value;
  PatternTable table;
  auto rule = [&](std::string pattern, V value, std::string note) {
    table.rules.push_back(PatternRule{std::move(pattern), FailureCategory::of(value), std::move(note)});
  };
  rule("(Postcondition", V::PostconditionFailure, "prover cannot establish a postcondition");
  rule("(LoopInvariant", V::LoopInvariantFailure, "invariant fails to hold on entry or after an iteration");
  rule("(ArithmeticOperationRange", V::ArithmeticOperationRange, "possible overflow or out-of-range arithmetic");
  rule("(PossiblyNullDeReference", V::NullDereference, "dereference target may be null");
  rule("(PossiblyDivideByZero", V::DivideByZero, "divisor may be zero");
  rule("(PossiblyTooLargeIndex", V::ArrayIndexFailure, "index may exceed array length");
  rule("(PossiblyNegativeIndex", V::ArrayIndexFailure, "index may be negative");
  rule("(Assert", V::AssertionFailure, "inline assert statement unprovable");
  rule("Unexpected or misspelled JML token", V::SyntaxError, "malformed JML annotation");
  rule("\\min", V::UnsupportedMinMaxQuantifier, "min quantifier beyond SMT translation");
  rule("\\max", V::UnsupportedMinMaxQuantifier, "max quantifier beyond SMT translation");
  rule("Unsupported quantified expression", V::UnsupportedQuantifier, "sum/product/num_of quantifier");
  rule("invalid specification", V::InvalidSpecification, "response was not a verifiable specification");
  return table;
}

void save_pattern_table(const PatternTable& table, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << "# pattern\tcategory\tnote\n";
  for (const PatternRule& rule : table.rules)
    out << rule.pattern << '\t' << to_string(rule.category) << '\t' << rule.note << '\n';
}

PatternTable load_pattern_table(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  PatternTable table;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    std::size_t tab1 = line.find('\t');
    std::size_t tab2 = tab1 == std::string::npos ? std::string::npos : line.find('\t', tab1 + 1);
    if (tab1 == std::string::npos || tab2 == std::string::npos || tab1 == 0)
      throw std::runtime_error(path.string() + ":" + std::to_string(line_no) + ": expected pattern\\tcategory\\tnote");
    std::string pattern = line.substr(0, tab1);
    std::optional<FailureCategory> category =
        failure_category_from_string(line.substr(tab1 + 1, tab2 - tab1 - 1));
    if (!category)
      throw std::runtime_error(path.string() + ":" + std::to_string(line_no) + ": unknown category");
    table.rules.push_back(PatternRule{std::move(pattern), *category, line.substr(tab2 + 1)});
  }
  return table;
}

std::vector<Diagnostic> split_atomic(const std::vector<Diagnostic>& diagnostics) {
  std::vector<Diagnostic> out;
  std::set<std::pair<std::size_t, std::string>> seen;
  for (const Diagnostic& d : diagnostics)
    if (seen.insert({d.line, d.raw_message}).second) out.push_back(d);
  return out;
}

FailureCategory categorize(const Diagnostic& error, const PatternTable& patterns) {
  for (const PatternRule& rule : patterns.rules)
    if (error.raw_message.find(rule.pattern) != std::string::npos) return rule.category;
  return FailureCategory::other("unmatched");
}

std::vector<AtomicError> triage_diagnostics(const std::vector<Diagnostic>& diagnostics,
                                            const PatternTable& patterns) {
  std::vector<AtomicError> out;
  for (const Diagnostic& d : split_atomic(diagnostics)) {
    AtomicError error;
    error.diagnostic = d;
    error.category = FailureCategory::other("unmatched");
    for (const PatternRule& rule : patterns.rules) {
      if (d.raw_message.find(rule.pattern) != std::string::npos) {
        error.category = rule.category;
        error.matched_pattern = rule.pattern;
        break;
      }
    }
    out.push_back(std::move(error));
  }
  return out;
}

std::vector<AtomicError> triage_outcome(const VerificationOutcome& outcome,
                                        const PatternTable& patterns) {
  if (outcome.kind == OutcomeKind::Invalid) {
    Diagnostic d;
    d.raw_message = "invalid specification: " +
                    (outcome.raw_output.empty() ? std::string("response is not a verifiable program")
                                                : outcome.raw_output);
    return triage_diagnostics({d}, patterns);
  }
  return triage_diagnostics(outcome.diagnostics, patterns);
}

std::vector<std::pair<FailureCategory, std::size_t>> distribution(
    const std::vector<AtomicError>& errors, std::size_t k) {
  if (k == 0) throw std::invalid_argument("distribution needs k >= 1");
  std::map<FailureCategory, std::size_t> counts;
  for (const AtomicError& e : errors) ++counts[e.category];
  std::vector<std::pair<FailureCategory, std::size_t>> out(counts.begin(), counts.end());
  std::stable_sort(out.begin(), out.end(),
                   [](const auto& a, const auto& b) { return a.second > b.second; });
  if (out.size() > k) out.resize(k);
  return out;
}

std::string distribution_csv(const std::vector<std::pair<FailureCategory, std::size_t>>& dist) {
  std::ostringstream out;
  out << "category,count\n";
  for (const auto& [category, count] : dist) out << to_string(category) << ',' << count << '\n';
  return out.str();
}

}  // namespace jmlbench
