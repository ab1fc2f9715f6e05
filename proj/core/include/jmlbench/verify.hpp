// verify.hpp - Driving a deductive verifier over specified programs and
// normalizing its results. Three interchangeable backends: a real external
// process, a replay store keyed by content hash, and an in-process stub.
#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "jmlbench/ast.hpp"

namespace jmlbench {

enum class OutcomeKind : uint8_t { Success, Failure, Unknown, Invalid };

constexpr OutcomeKind kAllOutcomeKinds[] = {
    OutcomeKind::Success, OutcomeKind::Failure, OutcomeKind::Unknown, OutcomeKind::Invalid};

std::string_view to_string(OutcomeKind kind);
std::optional<OutcomeKind> outcome_kind_from_string(std::string_view name);

class ConfigInvalid : public std::runtime_error {
public:
  explicit ConfigInvalid(const std::string& what) : std::runtime_error(what) {}
};

class BackendUnavailable : public std::runtime_error {
public:
  explicit BackendUnavailable(const std::string& what) : std::runtime_error(what) {}
};

struct VerifierConfig {
  // Placeholders: {file} (required), {mode}, {solver}, {timeout},
  // {nullable_flag}, {arithmetic_flag}.
  std::string command_template =
      "openjml --{mode} --prover={solver} --timeout={timeout}"
      " {nullable_flag} {arithmetic_flag} {file}";
  std::string mode = "esc";
  std::string solver = "cvc4";
  double timeout_seconds = 300.0;
  bool nullable_by_default = true;
  bool arithmetic_mode = true;
  // Output substrings that mark an inconclusive run; extend per toolchain.
  std::vector<std::string> inconclusive_markers = {"timed out", "Solver returned unknown"};
};

// Throws ConfigInvalid unless the template names {file} and timeout > 0.
void validate_config(const VerifierConfig& config);

// Template with placeholders substituted; exposed for inspection/tests.
std::string build_command(const VerifierConfig& config, const std::filesystem::path& file);

struct Diagnostic {
  std::string file;
  std::size_t line = 1;
  std::string raw_message;
  std::optional<Span> anchor;  // annotation span in the verified source, when resolvable

  bool operator==(const Diagnostic&) const = default;
};

struct VerificationOutcome {
  OutcomeKind kind = OutcomeKind::Unknown;
  std::vector<Diagnostic> diagnostics;
  double wall_time = 0.0;  // seconds
  std::string raw_output;
};

// What a backend hands back; classification happens in verify().
struct RawRun {
  std::string output;  // stdout and stderr interleaved
  int exit_status = 0;
  bool timed_out = false;
};

class VerifierBackend {
public:
  virtual ~VerifierBackend() = default;
  virtual RawRun run(const std::filesystem::path& file, const VerifierConfig& config) = 0;
};

// Runs build_command() under /bin/sh, capturing both streams. The process
// group is killed once timeout_seconds elapse and the run is marked timed out.
class ExternalProcessBackend : public VerifierBackend {
public:
  RawRun run(const std::filesystem::path& file, const VerifierConfig& config) override;
};

// Serves recorded runs from a directory keyed by content hash of the
// verified file: <hash>.out holds raw output, <hash>.exit holds the exit
// status plus an optional "timeout" word. Throws BackendUnavailable when
// no recording exists.
class ReplayBackend : public VerifierBackend {
public:
  explicit ReplayBackend(std::filesystem::path dir) : dir_(std::move(dir)) {}
  RawRun run(const std::filesystem::path& file, const VerifierConfig& config) override;

private:
  std::filesystem::path dir_;
};

// Adds or overwrites a recording for the given program text.
void record_replay(const std::filesystem::path& dir, const std::string& source,
                   const RawRun& run);

// In-process stub: the callback sees the program text.
class FunctionBackend : public VerifierBackend {
public:
  using Fn = std::function<RawRun(const std::string& source)>;
  explicit FunctionBackend(Fn fn) : fn_(std::move(fn)) {}
  RawRun run(const std::filesystem::path& file, const VerifierConfig& config) override;

private:
  std::mutex mu_;
  Fn fn_;
};

uint64_t fnv1a64(std::string_view data);
std::string content_hash(std::string_view data);  // fnv1a64 as 16 hex digits

// One Diagnostic per `file:line: verify:` or `file:line: error:` record,
// in output order. Record-less lines mentioning `verify:` become file-less
// diagnostics; everything else (source echoes, carets, summaries) is skipped.
std::vector<Diagnostic> parse_diagnostics(const std::string& raw_output);

// Invalid if the specification never parsed; Unknown on timeout or an
// inconclusive-marker hit; Failure on any diagnostic; Unknown on a nonzero
// exit without diagnostics; Success otherwise.
OutcomeKind classify_outcome(int exit_status, const std::vector<Diagnostic>& diagnostics,
                             bool timed_out, bool spec_parse_ok, bool inconclusive = false);

// Writes the program to a temp file, runs the backend, classifies, and
// resolves diagnostic anchors against the program's annotation lines.
// Unparseable sources return Invalid without touching the backend.
VerificationOutcome verify(const SpecifiedProgram& program, const VerifierConfig& config,
                           VerifierBackend& backend);

// Bounded worker pool; results are in submission order.
std::vector<VerificationOutcome> verify_all(const std::vector<SpecifiedProgram>& programs,
                                            const VerifierConfig& config,
                                            VerifierBackend& backend, unsigned workers = 4);

}  // namespace jmlbench
