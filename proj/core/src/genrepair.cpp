#include "jmlbench/genrepair.hpp"

#include <algorithm>
#include <chrono>
#include <cstdlib>
#include <fstream>
#include <map>
#include <sstream>
#include <thread>

#include <httplib.h>
#include <nlohmann/json.hpp>

namespace jmlbench {

namespace {

using nlohmann::json;

// ---- prompt templates, shipped as data -------------------------------------

constexpr std::string_view kZeroShotSystem =
    "You are an expert in Java Modeling Language (JML). You will be provided with Java code "
    "snippets and their task descriptions. Your task is to generate JML specifications for the "
    "given Java code. The specifications should be written as annotations within the Java code "
    "and must be compatible with the OpenJML tool for verification. Ensure the specifications "
    "include detailed preconditions, postconditions, necessary loop invariants, invariants, "
    "assertions, and any relevant assumptions.";

constexpr std::string_view kGuidedSystem =
    "You are an expert in Java Modeling Language (JML).\n"
    "You will be provided with Java code snippets.\n"
    "Your task is to generate JML specifications for the given Java code.\n"
    "The specifications should be written as annotations within the Java code and must be "
    "compatible with the OpenJML tool for verification.\n"
    "Ensure the specifications include detailed preconditions, postconditions, necessary loop "
    "invariants, invariants, assertions, and any relevant assumptions.\n"
    "\n"
    "Please also adhere to the following syntax guidelines for JML:\n"
    "\n"
    "JML text is written in comments that either:\n"
    "\n"
    "a) begin with //@ and end with the end of the line, or\n"
    "\n"
    "b) begin with /*@ and end with */. Lines within such a block comment may\n"
    "have the first non-whitespace characters be a series of @ symbols.\n"
    "\n"
    "{examples}";

constexpr std::string_view kGenerationUser =
    "Please generate JML specifications for the provided Java code.\n"
    "\n"
    "### CODE\n"
    "\n"
    "{code}";

constexpr std::string_view kCotTail = "\n\nLet's think step by step!";

constexpr std::string_view kLtmTail =
    "\n\nLet's break down this problem:\n"
    "\n"
    "1. What are the weakest preconditions for the code? Be sure to include preconditions "
    "related to nullness and arithmetic bounds.\n"
    "\n"
    "2. What are the strongest postconditions for the code?\n"
    "\n"
    "3. What necessary specifications are required to prove the above post-conditions? This "
    "includes loop invariants, assertions, assumptions, and ranking functions.\n"
    "\n"
    "After answering these questions, let's generate the specifications for the code and "
    "provide solution after `### SPECIFCIATION'";

constexpr std::string_view kRepairSystem =
    "You are an experts on Java Modeling Language (JML). Your task is to fix the JML "
    "specifications annotated in the target Java code. You will be provided the error messages "
    "from the OpenJML tool and you need to fix the specifications accordingly.";

constexpr std::string_view kRepairUserHead =
    "The following Java code is annotated with JML specifications:\n"
    "\n"
    "{current specification}\n"
    "\n"
    "OpenJML Verification tool failed to verify the specifications given above, with error "
    "information as follows:\n"
    "\n"
    "### ERROR MESSAGE:\n"
    "\n"
    "{error messages}\n"
    "\n"
    "### ERROR TYPES: ";

constexpr std::string_view kRepairUserTail =
    "\nPlease refine the specifications so that they can pass verification. Provide the "
    "specifications for the code and include the solution written between triple backticks, "
    "after `### FIXED SPECIFICATION`.";

struct RepairTemplate {
  std::string_view type_name;     // text after "### ERROR TYPES: "
  std::string_view guidance;      // category-specific steps or explanation
  std::string_view example_lead;  // sentence introducing demos, when present
};

const RepairTemplate kSyntaxRepair = {
    "Syntax Error",
    "To resolve the syntax error, you should consider the following steps:\n"
    "\n"
    "1. Identify whether the error is due to a Java syntax issue or a JML syntax issue.\n"
    "\n"
    "2. Review the code to identify the specific location and nature of the syntax error.\n"
    "\n"
    "3. Correct the syntax error based on the language rules and conventions.",
    "",
};

const RepairTemplate kQuantifierRepair = {
    "Unsupported Sum/NumOf/Product Quantifier Expressions",
    R"(OpenJML does not fully support JML's inductive quantifiers like \num_of, \sum, and \product in specifications. These operators require inductive reasoning (e.g., counting elements, summing values over a range, or computing products), which is difficult for SMT solvers (the engines behind OpenJML and most of deductive verification tools) to handle.

To avoid the use of \sum, \num_of, and \product quantifiers in your JML specifications, you can express your specifications using induction steps to help OpenJML's verifiers to reason about your code. You can do this by define mathematical functions and lemmas through model methods.)",
    R"(For example, you can should not use \product quantifier in the following specifications:)",
};

const RepairTemplate kMinMaxRepair = {
    "Unsupported Min/Max Quantifier Expressions",
    R"(OpenJML does not fully support JML's inductive quantifiers like \min, \max in specifications. These operators require inductive reasonings, which is difficult for SMT solvers (the engines behind OpenJML and most of deductive verification tools) to handle.

To avoid the use of \min and \max quantifiers in your JML specifications, you can use the \forall quantifier to express your specifications.)",
    R"(For example, you should not use \max quantifier in the following specifications:)",
};

const RepairTemplate kLoopInvariantRepair = {
    "Loop Invariant Failures",
    "This error occurs when the loop invariant, a condition that must hold true before the "
    "loop begins and remain true after each iteration, is not properly established or "
    "maintained. This semantic error typically arises when verifiers fail to confirm the "
    "correctness of the synthesized loop invariant. The causes of this error include: (1) an "
    "incorrect loop invariant, (2) wrong/weak preconditions that prevent the invariant from "
    "holding at the start of the loop, or (3) incomplete reasoning about the loop, leading to "
    "insufficient information for the verifier to verify the invariant.\n"
    "\n"
    "To resolve the error, please consider the following steps:\n"
    "\n"
    "1. Carefully review the loop invariant to ensure it correctly captures the necessary "
    "conditions that hold true before and after each iteration of the loop.\n"
    "\n"
    "2. Carefully examine preconditions to ensure they are strong enough to establish the loop "
    "invariant at the beginning of the loop.\n"
    "\n"
    "3. Add additional assertions or assumptions within the loop to help the verifier reason "
    "about the loop invariant.",
    "For example, consider the following code snippet with a loop invariant failure:",
};

const RepairTemplate kPostconditionRepair = {
    "Post-condition Failures",
    "This error occurs when the postcondition, a condition that must hold true after the "
    "execution of a program or function, is not satisfied. This type of semantic error "
    "typically arises when verifiers are unable to confirm that the program's logic guarantees "
    "the postcondition under all valid inputs and scenarios. The causes of this error include: "
    "(1) an incorrect or incomplete postcondition, (2) wrong/weak preconditions that prevent "
    "the program from reaching a state where the postcondition holds, or (3) incomplete "
    "reasoning about the programs, leading to insufficient information for the verifier to "
    "verify the postcondition.\n"
    "\n"
    "To resolve the error, please consider the following steps:\n"
    "\n"
    "1. Review the postcondition to ensure it correctly captures the expected behavior of the "
    "program or function.\n"
    "\n"
    "2. Check the preconditions to ensure they are strong enough to reach a state where the "
    "postcondition holds.\n"
    "\n"
    "3. Add additional assertions or assumptions within the program or function to help the "
    "verifier reason about the postcondition.",
    "For example, consider the following code snippet with a postcondition failure:",
};

const RepairTemplate kGenericRepair = {
    "",  // filled with the category name
    "To resolve the error, please consider the following steps:\n"
    "\n"
    "1. Review the reported error messages and locate the specifications they point to.\n"
    "\n"
    "2. Check whether the preconditions are strong enough and whether the postconditions and "
    "invariants correctly capture the program behavior.\n"
    "\n"
    "3. Adjust or remove the specifications that cannot be established, keeping the remaining "
    "ones consistent.",
    "For example, consider the following code snippet with a similar failure:",
};

const RepairTemplate* dedicated_template(const FailureCategory& category) {
  using V = FailureCategory::Value;
  switch (category.value) {
    case V::SyntaxError: return &kSyntaxRepair;
    case V::UnsupportedQuantifier: return &kQuantifierRepair;
    case V::UnsupportedMinMaxQuantifier: return &kMinMaxRepair;
    case V::LoopInvariantFailure: return &kLoopInvariantRepair;
    case V::PostconditionFailure: return &kPostconditionRepair;
    default: return nullptr;
  }
}

void replace_first(std::string& text, std::string_view needle, const std::string& value) {
  std::size_t at = text.find(needle);
  if (at != std::string::npos) text.replace(at, needle.size(), value);
}

std::string render_demos(const std::vector<Demo>& demos) {
  std::ostringstream out;
  for (std::size_t i = 0; i < demos.size(); ++i) {
    if (i) out << "\n";
    out << "### EXAMPLE\n\n```java\n" << demos[i].annotated_source;
    if (demos[i].annotated_source.empty() || demos[i].annotated_source.back() != '\n') out << '\n';
    out << "```\n";
  }
  return out.str();
}

std::string render_errors(const std::vector<AtomicError>& errors) {
  std::ostringstream out;
  for (const AtomicError& e : errors) {
    const Diagnostic& d = e.diagnostic;
    if (d.file.empty())
      out << d.raw_message << '\n';
    else
      out << d.file << ':' << d.line << ": " << d.raw_message << '\n';
  }
  return out.str();
}

}  // namespace

std::string_view to_string(PromptStyle style) {
  switch (style) {
    case PromptStyle::ZeroShot: return "ZeroShot";
    case PromptStyle::FewShot: return "FewShot";
    case PromptStyle::CoT: return "CoT";
    case PromptStyle::LTM: return "LTM";
    case PromptStyle::Repair: return "Repair";
  }
  return "";
}

std::optional<PromptStyle> prompt_style_from_string(std::string_view name) {
  for (PromptStyle style : kAllPromptStyles)
    if (to_string(style) == name) return style;
  return std::nullopt;
}

std::string_view to_string(ExtractFailure failure) {
  switch (failure) {
    case ExtractFailure::NoCodeBlock: return "NoCodeBlock";
    case ExtractFailure::ParseFailure: return "ParseFailure";
    case ExtractFailure::BodyChanged: return "BodyChanged";
  }
  return "";
}

std::string_view to_string(RepairTerminal terminal) {
  switch (terminal) {
    case RepairTerminal::Success: return "Success";
    case RepairTerminal::Exhausted: return "Exhausted";
    case RepairTerminal::Invalid: return "Invalid";
  }
  return "";
}

void validate_config(const ModelConfig& config) {
  if (config.model.empty()) throw ConfigInvalid("model id must be non-empty");
  if (config.temperature < 0) throw ConfigInvalid("temperature must be >= 0");
  if (config.max_tokens <= 0) throw ConfigInvalid("max_tokens must be positive");
  if (config.request_interval_seconds < 0)
    throw ConfigInvalid("request_interval_seconds must be >= 0");
}

PromptBundle build_prompt(PromptStyle style, const ProgramRecord& record,
                          const std::vector<Demo>& demos) {
  if (style == PromptStyle::Repair)
    throw std::invalid_argument("repair prompts are built by build_repair_prompt");

  PromptBundle bundle;
  bundle.style = style;
  bundle.user = std::string(kGenerationUser);
  replace_first(bundle.user, "{code}", record.bare_source);

  if (style == PromptStyle::ZeroShot) {
    bundle.system = std::string(kZeroShotSystem);
    return bundle;
  }
  if (demos.empty())
    throw MissingDemos(std::string(to_string(style)) + " prompts need at least one demonstration");

  bundle.system = std::string(kGuidedSystem);
  replace_first(bundle.system, "{examples}", render_demos(demos));
  for (const Demo& demo : demos) bundle.examples_used.push_back(demo.id);

  if (style == PromptStyle::CoT) bundle.user += kCotTail;
  if (style == PromptStyle::LTM) bundle.user += kLtmTail;
  return bundle;
}

PromptBundle build_repair_prompt(const FailureCategory& category, const SpecifiedProgram& program,
                                 const std::vector<AtomicError>& errors,
                                 const std::vector<Demo>& demos) {
  const RepairTemplate* tpl = dedicated_template(category);
  std::string type_name = tpl ? std::string(tpl->type_name) : to_string(category);
  if (!tpl) tpl = &kGenericRepair;

  PromptBundle bundle;
  bundle.style = PromptStyle::Repair;
  bundle.category = category;
  bundle.system = std::string(kRepairSystem);

  std::string user = std::string(kRepairUserHead);
  replace_first(user, "{current specification}", program.source);
  replace_first(user, "{error messages}", render_errors(errors));
  user += type_name;
  user += "\n\n";
  user += tpl->guidance;
  user += "\n";
  if (!demos.empty()) {
    user += "\n";
    user += tpl->example_lead;
    user += "\n\n";
    user += render_demos(demos);
    for (const Demo& demo : demos) bundle.examples_used.push_back(demo.id);
  }
  user += kRepairUserTail;
  bundle.user = std::move(user);
  return bundle;
}

namespace {

struct FencedBlock {
  std::string content;
  std::size_t at = std::string::npos;
};

// Fenced blocks: ``` optionally followed by a language tag, content lines,
// closing ```.
std::vector<FencedBlock> fenced_blocks(const std::string& text) {
  std::vector<FencedBlock> out;
  std::size_t pos = 0;
  while (true) {
    std::size_t open = text.find("```", pos);
    if (open == std::string::npos) return out;
    std::size_t content = text.find('\n', open + 3);
    if (content == std::string::npos) return out;
    ++content;
    std::size_t close = text.find("```", content);
    if (close == std::string::npos) return out;
    out.push_back(FencedBlock{text.substr(content, close - content), open});
    pos = text.find('\n', close);
    if (pos == std::string::npos) return out;
  }
}

}  // namespace

Extraction extract_specification(const std::string& response, const ProgramRecord& record,
                                 bool repair_marker) {
  Extraction result;
  std::vector<FencedBlock> blocks = fenced_blocks(response);
  if (blocks.empty()) {
    result.failure = ExtractFailure::NoCodeBlock;
    return result;
  }

  const FencedBlock* chosen = &blocks.front();
  if (repair_marker) {
    constexpr std::string_view kMarker = "### FIXED SPECIFICATION";
    std::size_t marker = response.find(kMarker);
    chosen = nullptr;
    if (marker != std::string::npos) {
      for (const FencedBlock& b : blocks)
        if (b.at > marker) {
          chosen = &b;
          break;
        }
    }
    if (!chosen) {
      chosen = &blocks.back();
      result.warning = "response lacks the fixed-specification marker; using the last code block";
    }
  }

  std::string source = chosen->content;
  StrippedProgram stripped;
  try {
    parse(source);
    stripped = strip_annotations_source(source);
  } catch (const ParseError&) {
    result.failure = ExtractFailure::ParseFailure;
    return result;
  }
  if (normalize_whitespace(stripped.bare) != normalize_whitespace(record.bare_source)) {
    result.failure = ExtractFailure::BodyChanged;
    return result;
  }

  SpecifiedProgram program;
  program.source = std::move(source);
  program.annotations = stripped.index;
  program.base_id = record.id;
  result.program = std::move(program);
  return result;
}

// ---- model clients ----------------------------------------------------------

ScriptedModel::ScriptedModel(std::vector<std::string> replies) : replies_(std::move(replies)) {}

ModelReply ScriptedModel::complete(const PromptBundle& prompt, const ModelConfig&) {
  prompts_.push_back(prompt);
  if (next_ >= replies_.size())
    throw ModelError("scripted model exhausted after " + std::to_string(replies_.size()) +
                     " replies");
  const std::string& text = replies_[next_++];
  // deterministic stand-in for a tokenizer: ~4 characters per token
  return ModelReply{text, static_cast<long long>((text.size() + 3) / 4)};
}

namespace {

std::string prompt_key(const PromptBundle& prompt) {
  std::string keyed = prompt.system;
  keyed.push_back('\0');
  keyed += prompt.user;
  return content_hash(keyed);
}

}  // namespace

ReplayModel::ReplayModel(std::filesystem::path dir) : dir_(std::move(dir)) {}

ModelReply ReplayModel::complete(const PromptBundle& prompt, const ModelConfig&) {
  std::filesystem::path file = dir_ / (prompt_key(prompt) + ".txt");
  std::ifstream in(file, std::ios::binary);
  if (!in) throw ModelError("no recorded reply for this prompt: " + file.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  std::string text = ss.str();
  return ModelReply{text, static_cast<long long>((text.size() + 3) / 4)};
}

void record_model_reply(const std::filesystem::path& dir, const PromptBundle& prompt,
                        const std::string& reply_text) {
  std::filesystem::create_directories(dir);
  std::ofstream(dir / (prompt_key(prompt) + ".txt"), std::ios::binary) << reply_text;
}

HttpModel::HttpModel(std::string path) : path_(std::move(path)) {}

ModelReply HttpModel::complete(const PromptBundle& prompt, const ModelConfig& config) {
  validate_config(config);
  if (config.endpoint.empty()) throw ConfigInvalid("HTTP model needs an endpoint");

  if (config.request_interval_seconds > 0) {
    double now = std::chrono::duration<double>(
                     std::chrono::steady_clock::now().time_since_epoch()).count();
    double wait = last_request_ + config.request_interval_seconds - now;
    if (wait > 0) std::this_thread::sleep_for(std::chrono::duration<double>(wait));
    last_request_ = std::max(now, last_request_ + config.request_interval_seconds);
  }

  json payload = {
      {"model", config.model},
      {"temperature", config.temperature},
      {"max_tokens", config.max_tokens},
      {"messages",
       json::array({
           json{{"role", "system"}, {"content", prompt.system}},
           json{{"role", "user"}, {"content", prompt.user}},
       })},
  };

  httplib::Client client(config.endpoint);
  httplib::Headers headers;
  if (const char* key = std::getenv(config.api_key_env.c_str()))
    headers.emplace("Authorization", std::string("Bearer ") + key);

  httplib::Result res = client.Post(path_, headers, payload.dump(), "application/json");
  if (!res) throw ModelError("model endpoint unreachable: " + config.endpoint);
  if (res->status != 200)
    throw ModelError("model endpoint returned status " + std::to_string(res->status));

  try {
    json body = json::parse(res->body);
    ModelReply reply;
    reply.text = body.at("choices").at(0).at("message").at("content").get<std::string>();
    if (body.contains("usage") && body["usage"].contains("total_tokens"))
      reply.tokens = body["usage"]["total_tokens"].get<long long>();
    return reply;
  } catch (const json::exception& e) {
    throw ModelError(std::string("malformed model response: ") + e.what());
  }
}

// ---- the self-repair loop ---------------------------------------------------

std::optional<FailureCategory> dominant_category(const std::vector<AtomicError>& errors) {
  if (errors.empty()) return std::nullopt;
  std::map<FailureCategory, std::size_t> counts;  // keys sort by display name
  for (const AtomicError& e : errors) ++counts[e.category];
  const FailureCategory* best = nullptr;
  std::size_t best_count = 0;
  for (const auto& [category, count] : counts) {
    if (count > best_count) {
      best = &category;
      best_count = count;
    }
  }
  return *best;
}

RepairTrace self_repair(const ProgramRecord& record, RepairSetup& setup, std::size_t max_iters,
                        const SelfRepairOptions& options) {
  if (max_iters == 0) throw std::invalid_argument("self_repair needs max_iters >= 1");
  if (!setup.model || !setup.verifier)
    throw std::invalid_argument("self_repair needs a model and a verifier backend");
  validate_config(setup.model_config);

  RepairTrace trace;
  std::optional<SpecifiedProgram> current;
  std::vector<AtomicError> last_errors;

  for (std::size_t iter = 0; iter < max_iters; ++iter) {
    RepairIteration it;
    try {
      if (iter == 0) {
        it.prompt = build_prompt(options.style, record, options.demos);
      } else {
        FailureCategory category =
            dominant_category(last_errors).value_or(FailureCategory::other("unmatched"));
        SpecifiedProgram basis =
            current ? *current : SpecifiedProgram{record.bare_source, {}, record.id};
        it.prompt = build_repair_prompt(category, basis, last_errors);
      }
      ModelReply reply = setup.model->complete(it.prompt, setup.model_config);
      it.response = reply.text;
      it.tokens = reply.tokens;

      Extraction extraction = extract_specification(it.response, record, iter > 0);
      if (!extraction.program) {
        it.outcome.kind = OutcomeKind::Invalid;
        it.outcome.raw_output = std::string(to_string(*extraction.failure));
      } else {
        it.extracted = extraction.program;
        current = extraction.program;
        it.outcome = verify(*extraction.program, setup.verifier_config, *setup.verifier);
      }
    } catch (const ModelError& e) {
      throw RepairAborted(e.what(), std::move(trace));
    } catch (const BackendUnavailable& e) {
      throw RepairAborted(e.what(), std::move(trace));
    }
    it.errors = triage_outcome(it.outcome, setup.patterns);
    last_errors = it.errors;
    trace.iterations.push_back(std::move(it));

    if (trace.iterations.back().outcome.kind == OutcomeKind::Success) {
      trace.terminal = RepairTerminal::Success;
      return trace;
    }
  }

  trace.terminal = trace.iterations.back().outcome.kind == OutcomeKind::Invalid
                       ? RepairTerminal::Invalid
                       : RepairTerminal::Exhausted;
  return trace;
}

// ---- spec-mutation fallback --------------------------------------------------

namespace {

std::string rebuild_entry_text(const AnnotationEntry& entry,
                               const std::vector<std::string>& clauses) {
  std::string body;
  for (const std::string& clause : clauses) {
    if (!body.empty()) body += ' ';
    body += clause;
    body += ';';
  }
  if (entry.kind == AnnotationKind::LineComment) return "//@ " + body;
  return "/*@ " + body + " */";
}

// positions of strict < and > that stand alone (not <=, >=, ==>, <==>, shifts)
std::vector<std::size_t> strict_relational_sites(const std::string& text) {
  std::vector<std::size_t> sites;
  for (std::size_t i = 0; i < text.size(); ++i) {
    char c = text[i];
    if (c != '<' && c != '>') continue;
    char prev = i > 0 ? text[i - 1] : '\0';
    char next = i + 1 < text.size() ? text[i + 1] : '\0';
    if (next == '=' || prev == '=' || next == c || prev == c) continue;
    sites.push_back(i);
  }
  return sites;
}

}  // namespace

std::vector<SpecifiedProgram> spec_mutation_variants(const SpecifiedProgram& program) {
  StrippedProgram stripped = strip_annotations(program);
  std::vector<SpecifiedProgram> out;

  auto emit = [&](const AnnotationIndex& index) {
    try {
      SpecifiedProgram variant = embed_annotations(stripped.bare, index, program.base_id);
      out.push_back(std::move(variant));
    } catch (const AnchorMissing&) {
      // anchors came from this very program, so this cannot fire; skip anyway
    }
  };

  // 1. drop one clause at a time
  for (std::size_t e = 0; e < stripped.index.entries.size(); ++e) {
    for (std::size_t c = 0; c < stripped.index.entries[e].clauses.size(); ++c) {
      AnnotationIndex index = stripped.index;
      AnnotationEntry& entry = index.entries[e];
      entry.clauses.erase(entry.clauses.begin() + static_cast<std::ptrdiff_t>(c));
      if (entry.clauses.empty()) {
        index.entries.erase(index.entries.begin() + static_cast<std::ptrdiff_t>(e));
      } else {
        entry.text = rebuild_entry_text(entry, entry.clauses);
      }
      emit(index);
    }
  }

  // 2. weaken one strict relational operator per variant
  for (std::size_t e = 0; e < stripped.index.entries.size(); ++e) {
    for (std::size_t c = 0; c < stripped.index.entries[e].clauses.size(); ++c) {
      for (std::size_t site : strict_relational_sites(stripped.index.entries[e].clauses[c])) {
        AnnotationIndex index = stripped.index;
        AnnotationEntry& entry = index.entries[e];
        entry.clauses[c].insert(site + 1, "=");
        entry.text = rebuild_entry_text(entry, entry.clauses);
        emit(index);
      }
    }
  }
  return out;
}

SpecMutationResult spec_mutation_repair(const SpecifiedProgram& program,
                                        const VerifierConfig& config, VerifierBackend& backend,
                                        std::size_t budget) {
  if (budget == 0) throw std::invalid_argument("spec_mutation_repair needs budget >= 1");

  SpecMutationResult result;
  for (const SpecifiedProgram& variant : spec_mutation_variants(program)) {
    if (result.verifier_calls == budget) {
      result.reason = "budget exhausted after " + std::to_string(result.verifier_calls) +
                      " verifier calls";
      return result;
    }
    ++result.verifier_calls;
    VerificationOutcome outcome = verify(variant, config, backend);
    if (outcome.kind == OutcomeKind::Success) {
      result.repaired = variant;
      return result;
    }
  }
  result.reason = "no variant verified";
  return result;
}

void save_trace(const RepairTrace& trace, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  for (std::size_t i = 0; i < trace.iterations.size(); ++i) {
    const RepairIteration& it = trace.iterations[i];
    out << "=== iteration " << (i + 1) << " (" << to_string(it.prompt.style);
    if (it.prompt.category) out << ": " << to_string(*it.prompt.category);
    out << ", " << it.tokens << " tokens)\n";
    out << "--- system\n" << it.prompt.system << "\n";
    out << "--- user\n" << it.prompt.user << "\n";
    out << "--- response\n" << it.response << "\n";
    out << "--- outcome\n" << to_string(it.outcome.kind) << "\n";
    out << "--- errors\n";
    for (const AtomicError& e : it.errors)
      out << to_string(e.category) << '\t' << e.diagnostic.line << '\t' << e.diagnostic.raw_message
          << '\n';
  }
  out << "=== terminal " << to_string(trace.terminal) << '\n';
}

}  // namespace jmlbench
