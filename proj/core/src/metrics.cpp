#include "jmlbench/metrics.hpp"

#include <algorithm>
#include <fstream>
#include <iomanip>
#include <limits>
#include <numeric>
#include <sstream>

namespace jmlbench {

namespace {

using i128 = __int128;

i128 abs128(i128 v) { return v < 0 ? -v : v; }

i128 gcd128(i128 a, i128 b) {
  a = abs128(a);
  b = abs128(b);
  while (b != 0) {
    i128 t = a % b;
    a = b;
    b = t;
  }
  return a;
}

constexpr i128 kMax = std::numeric_limits<long long>::max();

Rational make(i128 num, i128 den) {
  if (den == 0) throw std::invalid_argument("rational with zero denominator");
  if (den < 0) {
    num = -num;
    den = -den;
  }
  i128 g = gcd128(num, den);
  if (g > 1) {
    num /= g;
    den /= g;
  }
  if (abs128(num) > kMax || den > kMax)
    throw std::overflow_error("rational out of 64-bit range");
  return Rational{static_cast<long long>(num), static_cast<long long>(den)};
}

}  // namespace

Rational Rational::of(long long num, long long den) { return make(num, den); }

Rational Rational::operator+(const Rational& o) const {
  return make(static_cast<i128>(num) * o.den + static_cast<i128>(o.num) * den,
              static_cast<i128>(den) * o.den);
}

Rational Rational::operator-(const Rational& o) const {
  return make(static_cast<i128>(num) * o.den - static_cast<i128>(o.num) * den,
              static_cast<i128>(den) * o.den);
}

Rational Rational::operator*(const Rational& o) const {
  return make(static_cast<i128>(num) * o.num, static_cast<i128>(den) * o.den);
}

Rational Rational::operator/(const Rational& o) const {
  if (o.num == 0) throw std::invalid_argument("rational division by zero");
  return make(static_cast<i128>(num) * o.den, static_cast<i128>(den) * o.num);
}

bool Rational::operator<(const Rational& o) const {
  return static_cast<i128>(num) * o.den < static_cast<i128>(o.num) * den;
}

std::string percent(const Rational& r) {
  if (r.num < 0) throw std::invalid_argument("percent of a negative rational");
  // round(num/den * 1000) with ties away from zero, all exact
  i128 tenths = (static_cast<i128>(r.num) * 2000 + r.den) / (static_cast<i128>(r.den) * 2);
  long long t = static_cast<long long>(tenths);
  return std::to_string(t / 10) + "." + std::to_string(t % 10);
}

namespace {

std::string origin_text(const Origin& origin) {
  if (origin.kind == Origin::Kind::Base) return "base";
  return "transformed:" + origin.parent_id + ":" + origin.transform_id;
}

Origin parse_origin(const std::string& text, std::size_t line_no) {
  if (text == "base") return Origin{};
  constexpr std::string_view kPrefix = "transformed:";
  std::size_t split = text.rfind(':');
  if (text.rfind(kPrefix, 0) != 0 || split < kPrefix.size())
    throw MetricsError(MetricsError::Code::BadLog,
                       "log line " + std::to_string(line_no) + ": bad origin '" + text + "'");
  Origin origin;
  origin.kind = Origin::Kind::Transformed;
  origin.parent_id = text.substr(kPrefix.size(), split - kPrefix.size());
  origin.transform_id = text.substr(split + 1);
  return origin;
}

std::vector<std::string> split_tabs(const std::string& line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    std::size_t tab = line.find('\t', start);
    if (tab == std::string::npos) {
      out.push_back(line.substr(start));
      return out;
    }
    out.push_back(line.substr(start, tab - start));
    start = tab + 1;
  }
}

}  // namespace

void save_log(const OutcomeLog& log, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw MetricsError(MetricsError::Code::BadLog, "cannot write " + path.string());
  out << std::setprecision(17);
  for (const LogEntry& e : log.entries) {
    out << e.record_id << '\t' << origin_text(e.origin) << '\t' << to_string(e.kind) << '\t'
        << e.wall_time << '\t';
    if (e.token_cost)
      out << *e.token_cost;
    else
      out << '-';
    out << '\n';
  }
}

OutcomeLog load_log(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw MetricsError(MetricsError::Code::BadLog, "cannot open " + path.string());
  OutcomeLog log;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> fields = split_tabs(line);
    if (fields.size() != 5)
      throw MetricsError(MetricsError::Code::BadLog,
                         "log line " + std::to_string(line_no) + ": expected 5 fields, got " +
                             std::to_string(fields.size()));
    LogEntry entry;
    entry.record_id = fields[0];
    entry.origin = parse_origin(fields[1], line_no);
    std::optional<OutcomeKind> kind = outcome_kind_from_string(fields[2]);
    if (!kind)
      throw MetricsError(MetricsError::Code::BadLog,
                         "log line " + std::to_string(line_no) + ": bad outcome '" + fields[2] + "'");
    entry.kind = *kind;
    try {
      entry.wall_time = std::stod(fields[3]);
      if (fields[4] != "-") entry.token_cost = std::stoll(fields[4]);
    } catch (const std::exception&) {
      throw MetricsError(MetricsError::Code::BadLog,
                         "log line " + std::to_string(line_no) + ": bad number");
    }
    log.entries.push_back(std::move(entry));
  }
  return log;
}

namespace {

bool counts_as_failure(OutcomeKind kind) {
  return kind == OutcomeKind::Failure || kind == OutcomeKind::Invalid;
}

Rational rate_of(const OutcomeLog& log, bool (*pred)(OutcomeKind)) {
  if (log.entries.empty())
    throw MetricsError(MetricsError::Code::EmptyLog, "rate over an empty outcome log");
  long long hits = 0;
  for (const LogEntry& e : log.entries)
    if (pred(e.kind)) ++hits;
  return Rational::of(hits, static_cast<long long>(log.entries.size()));
}

}  // namespace

Rational success_rate(const OutcomeLog& log) {
  return rate_of(log, [](OutcomeKind k) { return k == OutcomeKind::Success; });
}

Rational failure_rate(const OutcomeLog& log) {
  return rate_of(log, [](OutcomeKind k) { return counts_as_failure(k); });
}

Rational unknown_rate(const OutcomeLog& log) {
  return rate_of(log, [](OutcomeKind k) { return k == OutcomeKind::Unknown; });
}

Rational completeness_rate(std::string_view spec_id,
                           const std::vector<OutcomeKind>& mutant_outcomes) {
  if (mutant_outcomes.empty())
    throw MetricsError(MetricsError::Code::NoMutants,
                       "no mutants for spec '" + std::string(spec_id) + "'");
  long long rejected = 0;
  for (OutcomeKind k : mutant_outcomes)
    if (k != OutcomeKind::Success) ++rejected;
  return Rational::of(rejected, static_cast<long long>(mutant_outcomes.size()));
}

Rational flip_rate(OutcomeKind base_outcome, const std::vector<OutcomeKind>& variant_outcomes) {
  if (base_outcome != OutcomeKind::Success)
    throw MetricsError(MetricsError::Code::BaseNotSuccess,
                       "flip rate needs a verifying base specification");
  if (variant_outcomes.empty())
    throw MetricsError(MetricsError::Code::NoVariants, "flip rate over zero variants");
  long long flipped = 0;
  for (OutcomeKind k : variant_outcomes)
    if (k != OutcomeKind::Success) ++flipped;
  return Rational::of(flipped, static_cast<long long>(variant_outcomes.size()));
}

Rational normalized_metric(const std::vector<std::vector<Rational>>& groups) {
  if (groups.empty())
    throw MetricsError(MetricsError::Code::EmptyGroup, "normalized metric over zero groups");
  Rational total;
  for (const std::vector<Rational>& group : groups) {
    if (group.empty())
      throw MetricsError(MetricsError::Code::EmptyGroup, "normalized metric over an empty group");
    Rational sum;
    for (const Rational& v : group) sum = sum + v;
    total = total + sum / Rational::of(static_cast<long long>(group.size()), 1);
  }
  return total / Rational::of(static_cast<long long>(groups.size()), 1);
}

namespace {

Rational normalized_indicator(const std::vector<std::vector<OutcomeKind>>& groups,
                              bool (*pred)(OutcomeKind)) {
  std::vector<std::vector<Rational>> values(groups.size());
  for (std::size_t g = 0; g < groups.size(); ++g)
    for (OutcomeKind k : groups[g])
      values[g].push_back(Rational::of(pred(k) ? 1 : 0, 1));
  return normalized_metric(values);
}

}  // namespace

Rational normalized_success_rate(const std::vector<std::vector<OutcomeKind>>& groups) {
  return normalized_indicator(groups, [](OutcomeKind k) { return k == OutcomeKind::Success; });
}

Rational normalized_failure_rate(const std::vector<std::vector<OutcomeKind>>& groups) {
  return normalized_indicator(groups, [](OutcomeKind k) { return counts_as_failure(k); });
}

std::map<ControlFlowClass, ClassSlice> slice_by_class(const OutcomeLog& log, const Corpus& corpus) {
  struct Tally {
    long long success = 0;
    long long failure = 0;
    long long total = 0;
  };
  std::map<ControlFlowClass, Tally> tallies;
  for (const LogEntry& e : log.entries) {
    const ProgramRecord* rec = corpus.find(e.record_id);
    if (!rec)
      throw MetricsError(MetricsError::Code::UnknownId,
                         "log entry '" + e.record_id + "' not in corpus");
    Tally& t = tallies[rec->cfc];
    ++t.total;
    if (e.kind == OutcomeKind::Success) ++t.success;
    if (counts_as_failure(e.kind)) ++t.failure;
  }
  std::map<ControlFlowClass, ClassSlice> out;
  for (const auto& [cls, t] : tallies)
    out[cls] = ClassSlice{Rational::of(t.success, t.total), Rational::of(t.failure, t.total),
                          static_cast<std::size_t>(t.total)};
  return out;
}

MetricReport build_report(const OutcomeLog& log, const Corpus& corpus) {
  MetricReport report;
  report.sr = success_rate(log);
  report.fr = failure_rate(log);
  report.per_class = slice_by_class(log, corpus);
  report.total = log.entries.size();
  for (const LogEntry& e : log.entries)
    if (e.token_cost) report.token_cost += *e.token_cost;
  return report;
}

std::string report_csv(const MetricReport& report) {
  std::ostringstream out;
  out << "success_rate,failure_rate,completeness,flip_rate,programs,token_cost\n";
  out << percent(report.sr) << ',' << percent(report.fr) << ',';
  if (report.cr) out << percent(*report.cr);
  out << ',';
  if (report.flr) out << percent(*report.flr);
  out << ',' << report.total << ',' << report.token_cost << '\n';
  for (const auto& [cls, slice] : report.per_class)
    out << "class," << to_string(cls) << ',' << percent(slice.sr) << ',' << percent(slice.fr)
        << ',' << slice.total << '\n';
  return out.str();
}

std::string report_table(const MetricReport& report) {
  std::ostringstream out;
  out << std::left << std::setw(16) << "Success Rate" << std::setw(16) << "Failure Rate"
      << std::setw(16) << "Completeness" << std::setw(12) << "Flip Rate" << std::setw(10)
      << "Programs" << '\n';
  out << std::left << std::setw(16) << percent(report.sr) << std::setw(16) << percent(report.fr)
      << std::setw(16) << (report.cr ? percent(*report.cr) : "--") << std::setw(12)
      << (report.flr ? percent(*report.flr) : "--") << std::setw(10) << report.total << '\n';
  for (const auto& [cls, slice] : report.per_class) {
    out << "  " << std::left << std::setw(16) << to_string(cls) << "SR " << std::setw(8)
        << percent(slice.sr) << "FR " << std::setw(8) << percent(slice.fr) << "n "
        << slice.total << '\n';
  }
  return out.str();
}

}  // namespace jmlbench
