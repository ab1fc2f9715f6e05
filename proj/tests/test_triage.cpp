#include <doctest.h>

#include <algorithm>
#include <random>

#include "jmlbench/triage.hpp"
#include "support.hpp"

using namespace jmlbench;
using testsupport::TempDir;
using testsupport::fixtures_dir;
using testsupport::slurp;

namespace {

std::string fixture(const std::string& name) {
  return slurp(fixtures_dir() / "verifier_outputs" / name);
}

Diagnostic diag(std::string message, std::size_t line = 1) {
  Diagnostic d;
  d.line = line;
  d.raw_message = std::move(message);
  return d;
}

FailureCategory named(FailureCategory::Value value) { return FailureCategory::of(value); }

}  // namespace

TEST_CASE("category names round-trip") {
  using V = FailureCategory::Value;
  for (V v : {V::SyntaxError, V::InvalidSpecification, V::UnsupportedQuantifier,
              V::UnsupportedMinMaxQuantifier, V::PostconditionFailure, V::LoopInvariantFailure,
              V::ArithmeticOperationRange, V::AssertionFailure, V::NullDereference,
              V::DivideByZero, V::ArrayIndexFailure}) {
    FailureCategory c = named(v);
    CHECK(failure_category_from_string(to_string(c)) == c);
  }
  FailureCategory other = FailureCategory::other("timeout");
  CHECK(to_string(other) == "Other(timeout)");
  CHECK(failure_category_from_string("Other(timeout)") == other);
  CHECK(!failure_category_from_string("Other()"));
  CHECK(!failure_category_from_string("NoSuchCategory"));
  CHECK_THROWS_AS(FailureCategory::other(""), std::invalid_argument);
  CHECK_THROWS_AS(FailureCategory::of(FailureCategory::Value::Other), std::invalid_argument);
}

TEST_CASE("stock verifier messages map to their categories") {
  using V = FailureCategory::Value;
  const std::pair<const char*, V> expected[] = {
      {"ReArrangeTuples.txt", V::PostconditionFailure},
      {"NthNums.txt", V::PostconditionFailure},
      {"LoopInvariantSumMatrix.txt", V::LoopInvariantFailure},
      {"RemoveNested.txt", V::ArithmeticOperationRange},
      {"FindMinDiff.txt", V::AssertionFailure},
      {"FindCharLong.txt", V::NullDereference},
      {"RoundNum.txt", V::DivideByZero},
      {"Sum.txt", V::ArrayIndexFailure},
      {"SyntaxCountSetBits.txt", V::SyntaxError},
      {"QuantSum.txt", V::UnsupportedQuantifier},
      {"QuantMin.txt", V::UnsupportedMinMaxQuantifier},
  };
  PatternTable table = default_pattern_table();
  for (const auto& [file, value] : expected) {
    CAPTURE(file);
    std::vector<AtomicError> errors = triage_diagnostics(parse_diagnostics(fixture(file)), table);
    REQUIRE(errors.size() == 1);
    CHECK(errors[0].category == named(value));
    CHECK(errors[0].diagnostic.raw_message.find(errors[0].matched_pattern) != std::string::npos);
  }
}

TEST_CASE("invalid outcomes surface as InvalidSpecification") {
  PatternTable table = default_pattern_table();

  VerificationOutcome outcome;
  outcome.kind = OutcomeKind::Invalid;
  outcome.raw_output = "annotation does not parse at offset 12";
  std::vector<AtomicError> errors = triage_outcome(outcome, table);
  REQUIRE(errors.size() == 1);
  CHECK(errors[0].category == named(FailureCategory::Value::InvalidSpecification));
  CHECK(errors[0].diagnostic.raw_message.find("offset 12") != std::string::npos);

  outcome.raw_output.clear();
  errors = triage_outcome(outcome, table);
  REQUIRE(errors.size() == 1);
  CHECK(errors[0].category == named(FailureCategory::Value::InvalidSpecification));

  // non-Invalid outcomes triage their diagnostics as-is
  VerificationOutcome failure;
  failure.kind = OutcomeKind::Failure;
  failure.diagnostics = {diag("The prover cannot establish an assertion (Postcondition: X.java:3:) in method f", 9)};
  errors = triage_outcome(failure, table);
  REQUIRE(errors.size() == 1);
  CHECK(errors[0].category == named(FailureCategory::Value::PostconditionFailure));
}

TEST_CASE("split_atomic collapses duplicates and is idempotent") {
  std::vector<Diagnostic> diags = {
      diag("a", 3),
      diag("b", 3),
      diag("a", 3),   // duplicate (line, message)
      diag("a", 4),   // same message, new line
      diag("b", 3),
  };
  std::vector<Diagnostic> collapsed = split_atomic(diags);
  REQUIRE(collapsed.size() == 3);
  CHECK(collapsed[0].raw_message == "a");
  CHECK(collapsed[1].raw_message == "b");
  CHECK(collapsed[2].line == 4);
  CHECK(split_atomic(collapsed) == collapsed);

  // already-atomic verifier output passes through unchanged
  std::vector<Diagnostic> parsed = parse_diagnostics(fixture("ReArrangeTuples.txt"));
  CHECK(split_atomic(parsed) == parsed);
}

TEST_CASE("categorize is total and order-independent") {
  PatternTable table = default_pattern_table();
  CHECK(categorize(diag("segmentation fault while proving"), table) ==
        FailureCategory::other("unmatched"));

  std::vector<Diagnostic> diags;
  diags.push_back(diag("The prover cannot establish an assertion (Assert) in method a", 2));
  diags.push_back(diag("Unexpected or misspelled JML token: foo", 5));
  diags.push_back(diag("The prover cannot establish an assertion (PossiblyDivideByZero) in method b", 8));
  diags.push_back(diag("who knows", 11));

  std::vector<FailureCategory> before;
  for (const Diagnostic& d : diags) before.push_back(categorize(d, table));

  std::mt19937 rng(3);
  for (int trial = 0; trial < 8; ++trial) {
    std::vector<std::size_t> order = {0, 1, 2, 3};
    std::shuffle(order.begin(), order.end(), rng);
    for (std::size_t i : order) CHECK(categorize(diags[i], table) == before[i]);
  }
}

TEST_CASE("first matching rule wins, in table order") {
  Diagnostic both = diag("verify: (Assert) failed because (Postcondition: X.java:4:) does not hold");
  PatternTable table = default_pattern_table();
  CHECK(categorize(both, table) == named(FailureCategory::Value::PostconditionFailure));

  PatternTable reversed;
  reversed.rules = {
      {"(Assert", named(FailureCategory::Value::AssertionFailure), ""},
      {"(Postcondition", named(FailureCategory::Value::PostconditionFailure), ""},
  };
  CHECK(categorize(both, reversed) == named(FailureCategory::Value::AssertionFailure));
}

TEST_CASE("pattern table extends without code changes") {
  PatternTable table = default_pattern_table();
  table.rules.insert(table.rules.begin(),
                     PatternRule{"Fatal prover error", FailureCategory::other("prover-crash"), ""});
  std::vector<AtomicError> errors =
      triage_diagnostics({diag("Fatal prover error: lost connection")}, table);
  REQUIRE(errors.size() == 1);
  CHECK(errors[0].category == FailureCategory::other("prover-crash"));
  CHECK(to_string(errors[0].category) == "Other(prover-crash)");
  CHECK(errors[0].matched_pattern == "Fatal prover error");
}

TEST_CASE("pattern table round-trips through its file form") {
  TempDir tmp;
  PatternTable table = default_pattern_table();
  table.rules.push_back(PatternRule{"Fatal prover error", FailureCategory::other("prover-crash"),
                                    "prover process died"});
  auto path = tmp.path() / "patterns.tsv";
  save_pattern_table(table, path);
  CHECK(load_pattern_table(path) == table);

  testsupport::spit(path, "# comment\n\n(Assert\tAssertionFailure\t\n");
  PatternTable small = load_pattern_table(path);
  REQUIRE(small.rules.size() == 1);
  CHECK(small.rules[0].pattern == "(Assert");

  testsupport::spit(path, "pattern-without-tabs\n");
  CHECK_THROWS_AS(load_pattern_table(path), std::runtime_error);
  testsupport::spit(path, "x\tNotACategory\t\n");
  CHECK_THROWS_AS(load_pattern_table(path), std::runtime_error);
  CHECK_THROWS_AS(load_pattern_table(tmp.path() / "absent.tsv"), std::runtime_error);
}

TEST_CASE("distribution ranks by count then name") {
  PatternTable table = default_pattern_table();
  std::vector<AtomicError> errors;
  auto plant = [&](const std::string& message, int copies) {
    for (int i = 0; i < copies; ++i) {
      AtomicError e;
      e.diagnostic = diag(message, 100 + errors.size());
      e.category = categorize(e.diagnostic, table);
      errors.push_back(std::move(e));
    }
  };
  plant("The prover cannot establish an assertion (Postcondition: A.java:2:) in method f", 5);
  plant("Unexpected or misspelled JML token: requires", 3);
  plant("The prover cannot establish an assertion (PossiblyNullDeReference) in method g", 3);
  plant("something nobody has seen", 1);

  auto top1 = distribution(errors, 1);
  REQUIRE(top1.size() == 1);
  CHECK(top1[0].first == named(FailureCategory::Value::PostconditionFailure));
  CHECK(top1[0].second == 5);

  auto top2 = distribution(errors, 2);
  REQUIRE(top2.size() == 2);
  CHECK(top2[1].first == named(FailureCategory::Value::NullDereference));  // ties: name order

  auto all = distribution(errors, 10);
  REQUIRE(all.size() == 4);
  CHECK(all[2].first == named(FailureCategory::Value::SyntaxError));
  CHECK(all[3].first == FailureCategory::other("unmatched"));
  CHECK(all[3].second == 1);

  CHECK(distribution_csv(top2) ==
        "category,count\nPostconditionFailure,5\nNullDereference,3\n");
  CHECK_THROWS_AS(distribution(errors, 0), std::invalid_argument);
}
