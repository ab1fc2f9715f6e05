// metrics.hpp - Success/failure/completeness/flip rates over verification
// outcome logs, with exact rational arithmetic throughout so reports are
// bit-reproducible and SR + FR + UnknownRate == 1 holds exactly.
#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "jmlbench/corpus.hpp"
#include "jmlbench/verify.hpp"

namespace jmlbench {

// Normalized fraction: den > 0, gcd(|num|, den) == 1. Arithmetic reduces
// through 128-bit intermediates and throws std::overflow_error if a reduced
// result leaves the 64-bit range.
struct Rational {
  long long num = 0;
  long long den = 1;

  static Rational of(long long num, long long den);

  Rational operator+(const Rational& other) const;
  Rational operator-(const Rational& other) const;
  Rational operator*(const Rational& other) const;
  Rational operator/(const Rational& other) const;
  bool operator==(const Rational& other) const { return num == other.num && den == other.den; }
  bool operator<(const Rational& other) const;

  double value() const { return static_cast<double>(num) / static_cast<double>(den); }
};

// Percentage with one decimal, e.g. 65/700 -> "9.3". Requires num >= 0.
std::string percent(const Rational& r);

struct LogEntry {
  std::string record_id;
  Origin origin;
  OutcomeKind kind = OutcomeKind::Unknown;
  double wall_time = 0.0;
  std::optional<long long> token_cost;

  bool operator==(const LogEntry&) const = default;
};

struct OutcomeLog {
  std::vector<LogEntry> entries;
};

class MetricsError : public std::runtime_error {
public:
  enum class Code { EmptyLog, NoMutants, BaseNotSuccess, NoVariants, EmptyGroup, UnknownId, BadLog };

  MetricsError(Code code, const std::string& what) : std::runtime_error(what), code_(code) {}
  Code code() const { return code_; }

private:
  Code code_;
};

// One entry per line: id, origin, kind, wall_time, token cost ("-" if absent),
// tab-separated. Loading rejects malformed lines (BadLog).
void save_log(const OutcomeLog& log, const std::filesystem::path& path);
OutcomeLog load_log(const std::filesystem::path& path);

Rational success_rate(const OutcomeLog& log);   // |Success| / |entries|
Rational failure_rate(const OutcomeLog& log);   // |Failure| + |Invalid| over |entries|
Rational unknown_rate(const OutcomeLog& log);   // |Unknown| / |entries|

// Fraction of a spec's unsuppressed mutants that the spec rejects.
Rational completeness_rate(std::string_view spec_id, const std::vector<OutcomeKind>& mutant_outcomes);

// Fraction of applicable variants whose verification flips away from
// Success; defined only when the base program verified.
Rational flip_rate(OutcomeKind base_outcome, const std::vector<OutcomeKind>& variant_outcomes);

// Mean over parents of per-parent means: every parent counts equally
// regardless of how many variants it kept.
Rational normalized_metric(const std::vector<std::vector<Rational>>& groups);

// normalized_metric over per-variant indicators of the given predicate.
Rational normalized_success_rate(const std::vector<std::vector<OutcomeKind>>& groups);
Rational normalized_failure_rate(const std::vector<std::vector<OutcomeKind>>& groups);

struct ClassSlice {
  Rational sr;
  Rational fr;
  std::size_t total = 0;

  bool operator==(const ClassSlice&) const = default;
};

// SR/FR per control-flow class; classes with no entries are absent.
// Record ids must resolve in the corpus (UnknownId).
std::map<ControlFlowClass, ClassSlice> slice_by_class(const OutcomeLog& log, const Corpus& corpus);

struct MetricReport {
  Rational sr;
  Rational fr;
  std::optional<Rational> cr;
  std::optional<Rational> flr;
  std::map<ControlFlowClass, ClassSlice> per_class;
  std::size_t total = 0;
  long long token_cost = 0;  // sum of recorded costs
};

// sr/fr/per_class/totals from the log; cr/flr left for the caller.
MetricReport build_report(const OutcomeLog& log, const Corpus& corpus);

std::string report_csv(const MetricReport& report);
std::string report_table(const MetricReport& report);

}  // namespace jmlbench
