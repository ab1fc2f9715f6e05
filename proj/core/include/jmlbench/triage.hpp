// triage.hpp - Failure taxonomy over verifier diagnostics: split a run into
// atomic errors, classify each with an ordered pattern table, and rank the
// resulting categories for reporting.
#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "jmlbench/verify.hpp"

namespace jmlbench {

// The named categories plus an open-ended Other(label) bucket. New failure
// shapes get a pattern-table rule mapping to Other with a custom label, no
// rebuild needed.
struct FailureCategory {
  enum class Value : uint8_t {
    SyntaxError,
    InvalidSpecification,
    UnsupportedQuantifier,        // \sum, \product, \num_of
    UnsupportedMinMaxQuantifier,  // \min, \max (repairs differ, so split out)
    PostconditionFailure,
    LoopInvariantFailure,
    ArithmeticOperationRange,
    AssertionFailure,
    NullDereference,
    DivideByZero,
    ArrayIndexFailure,
    Other,
  };

  Value value = Value::Other;
  std::string label;  // non-empty iff value == Other

  static FailureCategory of(Value value);
  static FailureCategory other(std::string label);

  bool operator==(const FailureCategory&) const = default;
  bool operator<(const FailureCategory& o) const;  // by display name
};

// "PostconditionFailure", "Other(timeout)", ...
std::string to_string(const FailureCategory& category);
std::optional<FailureCategory> failure_category_from_string(std::string_view name);

struct AtomicError {
  Diagnostic diagnostic;
  FailureCategory category;
  std::string matched_pattern;  // substring of raw_message; empty on fallback

  bool operator==(const AtomicError&) const = default;
};

struct PatternRule {
  std::string pattern;  // literal substring sought in raw_message
  FailureCategory category;
  std::string note;

  bool operator==(const PatternRule&) const = default;
};

// Ordered: the first rule whose pattern occurs in the message wins.
struct PatternTable {
  std::vector<PatternRule> rules;

  bool operator==(const PatternTable&) const = default;
};

// Rules for the stock verifier message forms, most specific first.
PatternTable default_pattern_table();

// One rule per line: pattern TAB category TAB note (note may be empty).
// Blank lines and lines starting with '#' are skipped.
PatternTable load_pattern_table(const std::filesystem::path& path);
void save_pattern_table(const PatternTable& table, const std::filesystem::path& path);

// Collapse duplicate (line, message) pairs, keeping first-seen order.
std::vector<Diagnostic> split_atomic(const std::vector<Diagnostic>& diagnostics);

// Total and deterministic; unmatched messages become Other("unmatched").
FailureCategory categorize(const Diagnostic& error, const PatternTable& patterns);

// split_atomic then categorize, recording the winning pattern per error.
std::vector<AtomicError> triage_diagnostics(const std::vector<Diagnostic>& diagnostics,
                                            const PatternTable& patterns);

// Whole-outcome view. Invalid outcomes carry no verifier diagnostics, so one
// InvalidSpecification error is synthesized from the recorded reason.
std::vector<AtomicError> triage_outcome(const VerificationOutcome& outcome,
                                        const PatternTable& patterns);

// Top-k categories by count, ties broken by name. k must be >= 1.
std::vector<std::pair<FailureCategory, std::size_t>> distribution(
    const std::vector<AtomicError>& errors, std::size_t k);

// "category,count" lines in distribution order, with a header.
std::string distribution_csv(const std::vector<std::pair<FailureCategory, std::size_t>>& dist);

}  // namespace jmlbench
