// genrepair.hpp - Prompt construction for specification generation, model
// client plumbing, response extraction, and the category-directed self-repair
// loop with a small spec-mutation fallback.
#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "jmlbench/corpus.hpp"
#include "jmlbench/triage.hpp"
#include "jmlbench/verify.hpp"

namespace jmlbench {

enum class PromptStyle : uint8_t { ZeroShot, FewShot, CoT, LTM, Repair };

std::string_view to_string(PromptStyle style);
std::optional<PromptStyle> prompt_style_from_string(std::string_view name);

constexpr PromptStyle kAllPromptStyles[] = {
    PromptStyle::ZeroShot, PromptStyle::FewShot, PromptStyle::CoT,
    PromptStyle::LTM,      PromptStyle::Repair,
};

// A worked example embedded into few-shot-family prompts.
struct Demo {
  std::string id;
  std::string annotated_source;
};

struct PromptBundle {
  PromptStyle style = PromptStyle::ZeroShot;
  std::optional<FailureCategory> category;  // set iff style == Repair
  std::string system;
  std::string user;
  std::vector<std::string> examples_used;  // demo ids, in embedding order
};

struct ModelConfig {
  std::string model = "stub";
  double temperature = 0.7;
  long long max_tokens = 2048;
  std::string endpoint;                          // HTTP backend base URL
  std::string api_key_env = "JMLBENCH_API_KEY";  // credentials live in the env
  double request_interval_seconds = 0.0;         // HTTP rate bound
};

void validate_config(const ModelConfig& config);  // ConfigInvalid

struct ModelReply {
  std::string text;
  long long tokens = 0;  // 0 when the backend cannot count
};

class ModelError : public std::runtime_error {
public:
  explicit ModelError(const std::string& what) : std::runtime_error(what) {}
};

class MissingDemos : public std::invalid_argument {
public:
  explicit MissingDemos(const std::string& what) : std::invalid_argument(what) {}
};

class ModelClient {
public:
  virtual ~ModelClient() = default;
  virtual ModelReply complete(const PromptBundle& prompt, const ModelConfig& config) = 0;
};

// Deterministic transcript: returns the scripted replies in order and records
// every prompt it was asked. Throws ModelError once the script runs out.
class ScriptedModel : public ModelClient {
public:
  explicit ScriptedModel(std::vector<std::string> replies);
  ModelReply complete(const PromptBundle& prompt, const ModelConfig& config) override;
  const std::vector<PromptBundle>& prompts() const { return prompts_; }

private:
  std::vector<std::string> replies_;
  std::size_t next_ = 0;
  std::vector<PromptBundle> prompts_;
};

// Replays recorded responses keyed by a content hash of (system, user).
class ReplayModel : public ModelClient {
public:
  explicit ReplayModel(std::filesystem::path dir);
  ModelReply complete(const PromptBundle& prompt, const ModelConfig& config) override;

private:
  std::filesystem::path dir_;
};

// Writes the reply a later ReplayModel will serve for this prompt.
void record_model_reply(const std::filesystem::path& dir, const PromptBundle& prompt,
                        const std::string& reply_text);

// Chat-completions HTTP backend (request/response in the common JSON shape).
// Plain HTTP only; the API key is read from the env var named in the config.
class HttpModel : public ModelClient {
public:
  explicit HttpModel(std::string path = "/v1/chat/completions");
  ModelReply complete(const PromptBundle& prompt, const ModelConfig& config) override;

private:
  std::string path_;
  double last_request_ = 0.0;
};

// Generation prompt for one program. demos must be non-empty for the
// few-shot-family styles (MissingDemos); ZeroShot ignores them.
// Repair style is built by build_repair_prompt instead.
PromptBundle build_prompt(PromptStyle style, const ProgramRecord& record,
                          const std::vector<Demo>& demos = {});

// Category-directed fixing prompt embedding the current specification and the
// raw error messages. Categories without a dedicated template get a generic
// one. Optional demos render as worked examples where the template has room.
PromptBundle build_repair_prompt(const FailureCategory& category, const SpecifiedProgram& program,
                                 const std::vector<AtomicError>& errors,
                                 const std::vector<Demo>& demos = {});

enum class ExtractFailure : uint8_t { NoCodeBlock, ParseFailure, BodyChanged };
std::string_view to_string(ExtractFailure failure);

struct Extraction {
  std::optional<SpecifiedProgram> program;
  std::optional<ExtractFailure> failure;  // set iff program absent
  std::string warning;                    // e.g. missing repair marker fallback
};

// Pulls the specification out of a model response. Generation responses use
// the first fenced code block; with repair_marker set, the block after
// "### FIXED SPECIFICATION" is used, falling back to the last block with a
// warning. The extracted source must parse and strip back to the record's
// bare source modulo whitespace.
Extraction extract_specification(const std::string& response, const ProgramRecord& record,
                                 bool repair_marker = false);

// Most frequent category; ties go to the alphabetically first name.
std::optional<FailureCategory> dominant_category(const std::vector<AtomicError>& errors);

struct RepairIteration {
  PromptBundle prompt;
  std::string response;
  std::optional<SpecifiedProgram> extracted;
  VerificationOutcome outcome;
  std::vector<AtomicError> errors;
  long long tokens = 0;
};

enum class RepairTerminal : uint8_t { Success, Exhausted, Invalid };
std::string_view to_string(RepairTerminal terminal);

struct RepairTrace {
  std::vector<RepairIteration> iterations;
  RepairTerminal terminal = RepairTerminal::Exhausted;
};

struct RepairSetup {
  ModelClient* model = nullptr;
  ModelConfig model_config;
  VerifierBackend* verifier = nullptr;
  VerifierConfig verifier_config;
  PatternTable patterns = default_pattern_table();
};

struct SelfRepairOptions {
  PromptStyle style = PromptStyle::ZeroShot;
  std::vector<Demo> demos;
};

// Thrown when a model or verifier backend dies mid-loop; carries the
// iterations that completed before the failure.
class RepairAborted : public std::runtime_error {
public:
  RepairAborted(const std::string& what, RepairTrace trace)
      : std::runtime_error(what), trace(std::move(trace)) {}
  RepairTrace trace;
};

// generate -> verify -> triage -> repair, stopping at Success or max_iters.
// Each round's dominant failure category picks the next repair template.
RepairTrace self_repair(const ProgramRecord& record, RepairSetup& setup, std::size_t max_iters,
                        const SelfRepairOptions& options = {});

// Spec-level edit variants in a fixed order: drop one clause at a time, then
// weaken one strict relational operator per variant (> to >=, < to <=).
std::vector<SpecifiedProgram> spec_mutation_variants(const SpecifiedProgram& program);

struct SpecMutationResult {
  std::optional<SpecifiedProgram> repaired;
  std::string reason;  // set when repaired is absent
  std::size_t verifier_calls = 0;
};

// Verifies variants in order until one succeeds or the call budget runs out.
// budget must be >= 1.
SpecMutationResult spec_mutation_repair(const SpecifiedProgram& program,
                                        const VerifierConfig& config, VerifierBackend& backend,
                                        std::size_t budget);

// Audit record: every prompt, response, outcome, and triage result, as
// structured text.
void save_trace(const RepairTrace& trace, const std::filesystem::path& path);

}  // namespace jmlbench
