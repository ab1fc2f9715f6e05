// jmlbench.cpp - pipeline driver. Each subcommand reads its upstream
// artifacts from the run directory, writes its own as plain files, and
// records a provenance entry, so any stage can be re-run or audited on
// its own. Exit codes: 0 ok, 2 configuration error, 3 stage failure.

#include <algorithm>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <CLI11.hpp>

#include "jmlbench/ast.hpp"
#include "jmlbench/corpus.hpp"
#include "jmlbench/genrepair.hpp"
#include "jmlbench/metrics.hpp"
#include "jmlbench/mutate.hpp"
#include "jmlbench/naturalness.hpp"
#include "jmlbench/transforms.hpp"
#include "jmlbench/triage.hpp"
#include "jmlbench/verify.hpp"

#ifndef JMLBENCH_VERSION
#define JMLBENCH_VERSION "0.0.0"
#endif

namespace fs = std::filesystem;
using namespace jmlbench;

namespace {

// Bad flags, bad config files, missing referenced files: exit 2.
class UsageError : public std::runtime_error {
public:
  explicit UsageError(const std::string& what) : std::runtime_error(what) {}
};

// Missing upstream artifacts and anything else that kills a stage: exit 3.
class StageError : public std::runtime_error {
public:
  explicit StageError(const std::string& what) : std::runtime_error(what) {}
};

struct RunConfig {
  fs::path corpus;       // source corpus directory (ingest)
  fs::path out = "run";  // artifact root shared by all stages
  VerifierConfig verifier;
  ModelConfig model;
  PromptStyle style = PromptStyle::ZeroShot;
  std::size_t max_iters = 3;
  unsigned concurrency = 4;
  unsigned long long seed = 0;  // reserved; no randomized tie-breaking yet

  fs::path verifier_replay;  // non-empty: serve verifier runs from here
  fs::path model_replay;     // non-empty: serve model replies from here
  fs::path demos;            // worked examples for the guided prompt styles
  fs::path patterns;         // triage pattern table override
  fs::path log;              // score/report: outcome log override
  fs::path flip_log;         // score/report: variant-run outcome log
  fs::path completeness_log; // score/report: mutant-run outcome log
  std::size_t mutation_budget = 0;  // repair: >0 switches to spec mutation
  std::size_t top = 0;              // triage: cap ranked categories, 0 = all
};

std::string fmt_double(double v) {
  std::ostringstream ss;
  ss << v;
  return ss.str();
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw StageError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const fs::path& path, const std::string& text) {
  fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw StageError("cannot write " + path.string());
  out << text;
}

std::string iso_now() {
  std::time_t now = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

// Hash of a file, or of a directory tree (sorted relative paths + per-file
// hashes). Missing paths hash as the empty string so provenance stays total.
std::string hash_path(const fs::path& path) {
  if (fs::is_regular_file(path)) return content_hash(read_file(path));
  if (!fs::is_directory(path)) return content_hash("");
  std::vector<fs::path> files;
  for (const auto& entry : fs::recursive_directory_iterator(path))
    if (entry.is_regular_file()) files.push_back(entry.path());
  std::sort(files.begin(), files.end());
  std::string acc;
  for (const fs::path& f : files) {
    acc += fs::relative(f, path).generic_string();
    acc += '\0';
    acc += content_hash(read_file(f));
    acc += '\n';
  }
  return content_hash(acc);
}

// The effective configuration, rendered once per stage so its hash is
// meaningful. Key order is fixed; defaults are included.
std::string serialize_config(const RunConfig& cfg) {
  std::ostringstream ss;
  ss << "corpus " << cfg.corpus.generic_string() << '\n'
     << "out " << cfg.out.generic_string() << '\n'
     << "style " << to_string(cfg.style) << '\n'
     << "max_iters " << cfg.max_iters << '\n'
     << "concurrency " << cfg.concurrency << '\n'
     << "seed " << cfg.seed << '\n'
     << "verifier.command " << cfg.verifier.command_template << '\n'
     << "verifier.mode " << cfg.verifier.mode << '\n'
     << "verifier.solver " << cfg.verifier.solver << '\n'
     << "verifier.timeout " << fmt_double(cfg.verifier.timeout_seconds) << '\n'
     << "verifier.nullable " << (cfg.verifier.nullable_by_default ? 1 : 0) << '\n'
     << "verifier.arithmetic " << (cfg.verifier.arithmetic_mode ? 1 : 0) << '\n'
     << "verifier.replay " << cfg.verifier_replay.generic_string() << '\n'
     << "model.name " << cfg.model.model << '\n'
     << "model.temperature " << fmt_double(cfg.model.temperature) << '\n'
     << "model.max_tokens " << cfg.model.max_tokens << '\n'
     << "model.endpoint " << cfg.model.endpoint << '\n'
     << "model.api_key_env " << cfg.model.api_key_env << '\n'
     << "model.interval " << fmt_double(cfg.model.request_interval_seconds) << '\n'
     << "model.replay " << cfg.model_replay.generic_string() << '\n'
     << "demos " << cfg.demos.generic_string() << '\n'
     << "patterns " << cfg.patterns.generic_string() << '\n'
     << "log " << cfg.log.generic_string() << '\n'
     << "flip_log " << cfg.flip_log.generic_string() << '\n'
     << "completeness_log " << cfg.completeness_log.generic_string() << '\n'
     << "mutation_budget " << cfg.mutation_budget << '\n'
     << "top " << cfg.top << '\n';
  return ss.str();
}

struct Provenance {
  std::string stage;
  std::vector<std::pair<std::string, std::string>> inputs;   // label, hash
  std::vector<std::pair<std::string, std::string>> outputs;  // label, hash

  void input(const std::string& label, const fs::path& path) {
    inputs.emplace_back(label, hash_path(path));
  }
  void output(const std::string& label, const fs::path& path) {
    outputs.emplace_back(label, hash_path(path));
  }
};

void write_provenance(const RunConfig& cfg, const Provenance& prov) {
  std::string config_text = serialize_config(cfg);
  std::ostringstream ss;
  ss << "stage\t" << prov.stage << '\n'
     << "version\t" << JMLBENCH_VERSION << '\n'
     << "config\t" << content_hash(config_text) << '\n';
  for (const auto& [label, hash] : prov.inputs) ss << "input\t" << label << '\t' << hash << '\n';
  for (const auto& [label, hash] : prov.outputs) ss << "output\t" << label << '\t' << hash << '\n';
  fs::path dir = cfg.out / "provenance";
  write_file(dir / (prov.stage + ".prov"), ss.str());
  write_file(dir / (prov.stage + ".config"), config_text);
}

void append_stamp(const RunConfig& cfg, const std::string& stage, const std::string& line,
                  bool truncate) {
  fs::path path = cfg.out / "provenance" / (stage + ".stamp");
  fs::create_directories(path.parent_path());
  std::ofstream out(path, truncate ? std::ios::trunc : std::ios::app);
  out << line << '\n';
}

void write_error_record(const RunConfig& cfg, const std::string& stage, const std::string& kind,
                        const std::string& detail) {
  std::ostringstream ss;
  ss << "stage\t" << stage << '\n' << "error\t" << kind << '\n' << "detail\t" << detail << '\n';
  write_file(cfg.out / "provenance" / (stage + ".error"), ss.str());
}

std::string metrics_code_name(MetricsError::Code code) {
  switch (code) {
    case MetricsError::Code::EmptyLog: return "EmptyLog";
    case MetricsError::Code::NoMutants: return "NoMutants";
    case MetricsError::Code::BaseNotSuccess: return "BaseNotSuccess";
    case MetricsError::Code::NoVariants: return "NoVariants";
    case MetricsError::Code::EmptyGroup: return "EmptyGroup";
    case MetricsError::Code::UnknownId: return "UnknownId";
    case MetricsError::Code::BadLog: return "BadLog";
  }
  return "?";
}

std::string corpus_code_name(CorpusError::Code code) {
  switch (code) {
    case CorpusError::Code::MissingManifest: return "MissingManifest";
    case CorpusError::Code::BadManifest: return "BadManifest";
    case CorpusError::Code::MissingSource: return "MissingSource";
    case CorpusError::Code::ParseFailure: return "ParseFailure";
    case CorpusError::Code::DuplicateId: return "DuplicateId";
    case CorpusError::Code::InvalidRecord: return "InvalidRecord";
  }
  return "?";
}

std::string error_kind(const std::exception& e) {
  if (auto* m = dynamic_cast<const MetricsError*>(&e))
    return "MetricsError:" + metrics_code_name(m->code());
  if (auto* c = dynamic_cast<const CorpusError*>(&e))
    return "CorpusError:" + corpus_code_name(c->code());
  if (dynamic_cast<const ParseError*>(&e)) return "ParseError";
  if (dynamic_cast<const AnchorMissing*>(&e)) return "AnchorMissing";
  if (dynamic_cast<const RewriteConflict*>(&e)) return "RewriteConflict";
  if (dynamic_cast<const BackendUnavailable*>(&e)) return "BackendUnavailable";
  if (dynamic_cast<const RepairAborted*>(&e)) return "RepairAborted";
  if (dynamic_cast<const ModelError*>(&e)) return "ModelError";
  if (dynamic_cast<const ScorerFailure*>(&e)) return "ScorerFailure";
  if (dynamic_cast<const ConfigInvalid*>(&e)) return "ConfigInvalid";
  if (dynamic_cast<const StageError*>(&e)) return "StageError";
  if (dynamic_cast<const std::invalid_argument*>(&e)) return "InvalidArgument";
  return "Error";
}

// ---- artifact access --------------------------------------------------------

Corpus load_run_corpus(const RunConfig& cfg) {
  fs::path dir = cfg.out / "corpus";
  if (!fs::exists(dir / "manifest.json"))
    throw StageError("no ingested corpus at " + dir.string() + "; run `jmlbench ingest` first");
  return load_corpus(dir);
}

SpecifiedProgram specified_from_source(std::string source, const std::string& base_id) {
  SpecifiedProgram program;
  program.source = std::move(source);
  program.base_id = base_id;
  // Unparseable sources keep an empty index; verify() classifies them Invalid.
  try {
    program.annotations = strip_annotations_source(program.source).index;
  } catch (const ParseError&) {
  }
  return program;
}

std::vector<std::string> split_on(const std::string& line, char sep) {
  std::vector<std::string> fields;
  std::size_t start = 0;
  while (true) {
    std::size_t at = line.find(sep, start);
    if (at == std::string::npos) {
      fields.push_back(line.substr(start));
      return fields;
    }
    fields.push_back(line.substr(start, at - start));
    start = at + 1;
  }
}

// Rebuilds a MutantSet from a save_mutants() directory.
MutantSet load_mutants(const fs::path& dir, const std::string& parent_id,
                       const std::string& parent_source) {
  MutantSet set;
  set.parent_id = parent_id;
  set.parent_source = parent_source;
  std::istringstream csv(read_file(dir / "mutants.csv"));
  std::string line;
  std::getline(csv, line);  // header
  while (std::getline(csv, line)) {
    if (line.empty()) continue;
    std::vector<std::string> f = split_on(line, ',');
    if (f.size() != 6) throw StageError("malformed mutants.csv row in " + dir.string());
    std::optional<MutationOperator> op = mutation_operator_from_string(f[2]);
    if (!op) throw StageError("unknown mutation operator '" + f[2] + "' in " + dir.string());
    Mutant m;
    m.source = read_file(dir / (f[0] + ".java"));
    m.parent_id = f[1];
    m.op = *op;
    m.site = Span{std::stoull(f[3]), std::stoull(f[4])};
    m.suppressed = f[5] == "1";
    set.mutants.push_back(std::move(m));
  }
  return set;
}

struct SpecMeta {
  std::string status;  // "ok" or an extraction failure name
  std::optional<long long> tokens;
};

std::optional<SpecMeta> load_spec_meta(const fs::path& path) {
  if (!fs::exists(path)) return std::nullopt;
  SpecMeta meta;
  std::istringstream in(read_file(path));
  std::string line;
  while (std::getline(in, line)) {
    std::size_t tab = line.find('\t');
    if (tab == std::string::npos) continue;
    std::string key = line.substr(0, tab);
    std::string value = line.substr(tab + 1);
    if (key == "status") meta.status = value;
    if (key == "tokens") meta.tokens = std::stoll(value);
  }
  return meta;
}

void save_outcome(const fs::path& path, const VerificationOutcome& outcome) {
  std::ostringstream ss;
  ss << to_string(outcome.kind) << '\n' << fmt_double(outcome.wall_time) << '\n'
     << outcome.raw_output;
  write_file(path, ss.str());
}

VerificationOutcome load_outcome(const fs::path& path) {
  std::string text = read_file(path);
  std::size_t first = text.find('\n');
  std::size_t second = first == std::string::npos ? std::string::npos : text.find('\n', first + 1);
  if (second == std::string::npos) throw StageError("malformed outcome file " + path.string());
  VerificationOutcome outcome;
  std::optional<OutcomeKind> kind = outcome_kind_from_string(text.substr(0, first));
  if (!kind) throw StageError("malformed outcome file " + path.string());
  outcome.kind = *kind;
  outcome.wall_time = std::stod(text.substr(first + 1, second - first - 1));
  outcome.raw_output = text.substr(second + 1);
  outcome.diagnostics = parse_diagnostics(outcome.raw_output);
  return outcome;
}

// ---- backends ---------------------------------------------------------------

std::unique_ptr<VerifierBackend> make_verifier_backend(const RunConfig& cfg) {
  if (!cfg.verifier_replay.empty())
    return std::make_unique<ReplayBackend>(cfg.verifier_replay);
  return std::make_unique<ExternalProcessBackend>();
}

std::unique_ptr<ModelClient> make_model(const RunConfig& cfg) {
  if (!cfg.model_replay.empty()) return std::make_unique<ReplayModel>(cfg.model_replay);
  return std::make_unique<HttpModel>();
}

std::vector<Demo> load_demos(const fs::path& dir) {
  std::vector<Demo> demos;
  if (dir.empty()) return demos;
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir))
    if (entry.is_regular_file() && entry.path().extension() == ".java")
      files.push_back(entry.path());
  std::sort(files.begin(), files.end());
  for (const fs::path& f : files) demos.push_back(Demo{f.stem().string(), read_file(f)});
  return demos;
}

bool replay_verifier(const RunConfig& cfg) { return !cfg.verifier_replay.empty(); }

// ---- stages -------------------------------------------------------------

void cmd_ingest(const RunConfig& cfg, Provenance& prov) {
  prov.input(cfg.corpus.generic_string(), cfg.corpus);
  std::set<std::string> known = transform_id_names();
  Corpus corpus = load_corpus(cfg.corpus, false, &known);
  for (const std::string& w : corpus.warnings) std::cerr << "warning: " << w << '\n';
  fs::path dest = cfg.out / "corpus";
  fs::remove_all(dest);
  save_corpus(corpus, dest);
  prov.output("corpus", dest);
  std::cout << "ingest: " << corpus.records.size() << " records";
  const char* sep = " (";
  for (const auto& [cfc, n] : corpus.meta.counts) {
    std::cout << sep << to_string(cfc) << ' ' << n;
    sep = ", ";
  }
  std::cout << (corpus.meta.counts.empty() ? "\n" : ")\n");
}

void cmd_transform(const RunConfig& cfg, Provenance& prov) {
  Corpus corpus = load_run_corpus(cfg);
  prov.input("corpus", cfg.out / "corpus");
  NgramScorer scorer(corpus);
  DiverseBuild build = build_diverse(corpus, scorer);
  fs::path dest = cfg.out / "variants";
  fs::remove_all(dest);
  save_corpus(build.diverse, dest / "diverse");
  save_corpus(build.diverse_n, dest / "diverse_n");
  std::ostringstream scores;
  scores << "id,naturalness\n";
  char buf[64];
  for (const auto& [id, value] : build.scores) {
    std::snprintf(buf, sizeof buf, "%.6f", value);
    scores << id << ',' << buf << '\n';
  }
  write_file(dest / "scores.csv", scores.str());
  write_file(dest / "applicability.csv", applicability_csv(corpus));
  prov.output("variants", dest);
  std::cout << "transform: " << build.diverse.records.size() << " variants, "
            << build.diverse_n.records.size() << " kept in diverse_n\n";
}

void cmd_mutate(const RunConfig& cfg, Provenance& prov) {
  Corpus corpus = load_run_corpus(cfg);
  prov.input("corpus", cfg.out / "corpus");
  fs::path dest = cfg.out / "mutants";
  fs::remove_all(dest);
  std::size_t total = 0, suppressed = 0;
  for (const ProgramRecord& rec : corpus.records) {
    MutantSet set = suppress_equivalents(
        generate_mutants(rec.bare_source, all_mutation_operators(), rec.id));
    save_mutants(set, dest / rec.id);
    total += set.mutants.size();
    for (const Mutant& m : set.mutants) suppressed += m.suppressed ? 1 : 0;
  }
  prov.output("mutants", dest);
  std::cout << "mutate: " << total << " mutants across " << corpus.records.size() << " records ("
            << suppressed << " suppressed)\n";
}

void cmd_generate(const RunConfig& cfg, Provenance& prov) {
  Corpus corpus = load_run_corpus(cfg);
  prov.input("corpus", cfg.out / "corpus");
  if (!cfg.model_replay.empty()) prov.input("model_replay", cfg.model_replay);
  if (!cfg.demos.empty()) prov.input("demos", cfg.demos);
  std::unique_ptr<ModelClient> model = make_model(cfg);
  std::vector<Demo> demos = load_demos(cfg.demos);
  fs::path dest = cfg.out / "specs";
  fs::remove_all(dest);
  std::size_t extracted = 0;
  for (const ProgramRecord& rec : corpus.records) {
    PromptBundle bundle = build_prompt(cfg.style, rec, demos);
    ModelReply reply = model->complete(bundle, cfg.model);
    write_file(dest / (rec.id + ".response.txt"), reply.text);
    Extraction ext = extract_specification(reply.text, rec);
    std::ostringstream meta;
    meta << "id\t" << rec.id << '\n'
         << "style\t" << to_string(cfg.style) << '\n'
         << "tokens\t" << reply.tokens << '\n'
         << "status\t" << (ext.program ? "ok" : std::string(to_string(*ext.failure))) << '\n';
    if (!ext.warning.empty()) meta << "warning\t" << ext.warning << '\n';
    write_file(dest / (rec.id + ".meta"), meta.str());
    if (ext.program) {
      write_file(dest / (rec.id + ".java"), ext.program->source);
      ++extracted;
    }
  }
  prov.output("specs", dest);
  std::cout << "generate: " << extracted << "/" << corpus.records.size()
            << " specifications extracted (" << to_string(cfg.style) << ")\n";
}

void cmd_verify(const RunConfig& cfg, Provenance& prov) {
  Corpus corpus = load_run_corpus(cfg);
  prov.input("corpus", cfg.out / "corpus");
  fs::path specs = cfg.out / "specs";
  if (!fs::exists(specs))
    throw StageError("no specifications at " + specs.string() + "; run `jmlbench generate` first");
  prov.input("specs", specs);
  if (fs::exists(cfg.out / "mutants")) prov.input("mutants", cfg.out / "mutants");
  if (!cfg.verifier_replay.empty()) prov.input("verifier_replay", cfg.verifier_replay);
  std::unique_ptr<VerifierBackend> backend = make_verifier_backend(cfg);
  bool replay = replay_verifier(cfg);

  fs::path dest = cfg.out / "outcomes";
  fs::remove_all(dest);
  fs::create_directories(dest);

  struct Item {
    const ProgramRecord* rec;
    std::optional<SpecifiedProgram> program;
    std::optional<long long> tokens;
    std::string note;  // set when no program: extraction failure, missing file
  };
  std::vector<Item> items;
  std::vector<SpecifiedProgram> programs;
  for (const ProgramRecord& rec : corpus.records) {
    Item item{&rec, std::nullopt, std::nullopt, ""};
    std::optional<SpecMeta> meta = load_spec_meta(specs / (rec.id + ".meta"));
    if (meta) item.tokens = meta->tokens;
    fs::path spec_file = specs / (rec.id + ".java");
    if (fs::exists(spec_file)) {
      item.program = specified_from_source(read_file(spec_file), rec.id);
      programs.push_back(*item.program);
    } else {
      item.note = "no specification extracted";
      if (meta && meta->status != "ok") item.note += ": " + meta->status;
    }
    items.push_back(std::move(item));
  }
  std::vector<VerificationOutcome> verified =
      verify_all(programs, cfg.verifier, *backend, cfg.concurrency);

  OutcomeLog log;
  std::map<OutcomeKind, std::size_t> tally;
  std::map<std::string, VerificationOutcome> by_id;
  std::size_t next = 0;
  for (const Item& item : items) {
    VerificationOutcome outcome;
    if (item.program) {
      outcome = verified[next++];
    } else {
      outcome.kind = OutcomeKind::Invalid;
      outcome.raw_output = item.note;
    }
    if (replay) outcome.wall_time = 0.0;
    save_outcome(dest / (item.rec->id + ".outcome"), outcome);
    log.entries.push_back(
        LogEntry{item.rec->id, item.rec->origin, outcome.kind, outcome.wall_time, item.tokens});
    ++tally[outcome.kind];
    by_id[item.rec->id] = std::move(outcome);
  }
  save_log(log, dest / "verify.log");

  // Completeness runs: every verified specification meets its record's
  // mutants; the spec is unchanged, so a Success means a surviving mutant.
  OutcomeLog comp;
  std::size_t comp_records = 0;
  for (const ProgramRecord& rec : corpus.records) {
    if (by_id[rec.id].kind != OutcomeKind::Success) continue;
    fs::path mdir = cfg.out / "mutants" / rec.id;
    if (!fs::exists(mdir / "mutants.csv")) continue;
    MutantSet set = load_mutants(mdir, rec.id, rec.bare_source);
    SpecifiedProgram spec = specified_from_source(read_file(specs / (rec.id + ".java")), rec.id);
    CompletenessInputs inputs = completeness_inputs(spec, set);
    if (inputs.pairs.empty()) continue;
    ++comp_records;
    std::vector<SpecifiedProgram> mprogs;
    for (const auto& [mutant, program] : inputs.pairs) mprogs.push_back(program);
    std::vector<VerificationOutcome> mout =
        verify_all(mprogs, cfg.verifier, *backend, cfg.concurrency);
    std::set<std::string> skipped(inputs.skipped.begin(), inputs.skipped.end());
    std::size_t at = 0;
    for (std::size_t i = 0; i < set.mutants.size(); ++i) {
      if (set.mutants[i].suppressed) continue;
      std::string id = mutant_id(set, i);
      if (skipped.count(id)) continue;
      const VerificationOutcome& oc = mout[at];
      comp.entries.push_back(LogEntry{id, Origin{Origin::Kind::Transformed, rec.id,
                                                 std::string(to_string(set.mutants[i].op))},
                                      oc.kind, replay ? 0.0 : oc.wall_time, std::nullopt});
      ++at;
    }
  }
  if (!comp.entries.empty()) save_log(comp, dest / "completeness.log");

  prov.output("outcomes", dest);
  std::cout << "verify: " << items.size() << " programs: " << tally[OutcomeKind::Success]
            << " success, " << tally[OutcomeKind::Failure] << " failure, "
            << tally[OutcomeKind::Unknown] << " unknown, " << tally[OutcomeKind::Invalid]
            << " invalid\n";
  if (comp_records > 0)
    std::cout << "verify: " << comp.entries.size() << " mutant runs for " << comp_records
              << " verified records\n";
}

// CR/FlR are attached when the corresponding logs exist: CR as the mean of
// per-record mutant-rejection fractions, FlR as the mean of per-record flip
// rates over records whose base specification verified.
MetricReport compute_scores(const RunConfig& cfg, const Corpus& corpus, const OutcomeLog& log,
                            Provenance& prov) {
  MetricReport report = build_report(log, corpus);

  fs::path comp = cfg.completeness_log.empty() ? cfg.out / "outcomes" / "completeness.log"
                                               : cfg.completeness_log;
  if (fs::exists(comp)) {
    prov.input("completeness_log", comp);
    OutcomeLog mlog = load_log(comp);
    std::map<std::string, std::vector<OutcomeKind>> by_parent;
    for (const LogEntry& e : mlog.entries)
      if (e.origin.kind == Origin::Kind::Transformed)
        by_parent[e.origin.parent_id].push_back(e.kind);
    std::vector<std::vector<Rational>> groups;
    for (const auto& [parent, kinds] : by_parent)
      groups.push_back({completeness_rate(parent, kinds)});
    if (!groups.empty()) report.cr = normalized_metric(groups);
  }

  fs::path flip = cfg.flip_log.empty() ? cfg.out / "outcomes" / "flip.log" : cfg.flip_log;
  if (fs::exists(flip)) {
    prov.input("flip_log", flip);
    OutcomeLog vlog = load_log(flip);
    std::map<std::string, OutcomeKind> base;
    for (const LogEntry& e : log.entries) base[e.record_id] = e.kind;
    std::map<std::string, std::vector<OutcomeKind>> by_parent;
    for (const LogEntry& e : vlog.entries)
      if (e.origin.kind == Origin::Kind::Transformed)
        by_parent[e.origin.parent_id].push_back(e.kind);
    std::vector<std::vector<Rational>> groups;
    for (const auto& [parent, kinds] : by_parent) {
      auto it = base.find(parent);
      if (it == base.end() || it->second != OutcomeKind::Success) continue;
      groups.push_back({flip_rate(it->second, kinds)});
    }
    if (!groups.empty()) report.flr = normalized_metric(groups);
  }
  return report;
}

OutcomeLog load_scored_log(const RunConfig& cfg, Provenance& prov) {
  fs::path path = cfg.log.empty() ? cfg.out / "outcomes" / "verify.log" : cfg.log;
  if (!fs::exists(path))
    throw StageError("no outcome log at " + path.string() + "; run `jmlbench verify` first");
  prov.input("log", path);
  return load_log(path);
}

void cmd_score(const RunConfig& cfg, Provenance& prov) {
  Corpus corpus = load_run_corpus(cfg);
  prov.input("corpus", cfg.out / "corpus");
  OutcomeLog log = load_scored_log(cfg, prov);
  MetricReport report = compute_scores(cfg, corpus, log, prov);
  fs::path dest = cfg.out / "scores";
  fs::remove_all(dest);
  write_file(dest / "report.csv", report_csv(report));
  write_file(dest / "report.txt", report_table(report));
  prov.output("scores", dest);
  std::cout << report_table(report);
}

// All triaged errors for non-Success outcomes, in corpus order.
std::vector<std::pair<std::string, AtomicError>> collect_errors(const RunConfig& cfg,
                                                                const Corpus& corpus,
                                                                const PatternTable& patterns) {
  fs::path outcomes = cfg.out / "outcomes";
  if (!fs::exists(outcomes))
    throw StageError("no outcomes at " + outcomes.string() + "; run `jmlbench verify` first");
  std::vector<std::pair<std::string, AtomicError>> rows;
  for (const ProgramRecord& rec : corpus.records) {
    fs::path path = outcomes / (rec.id + ".outcome");
    if (!fs::exists(path)) continue;
    VerificationOutcome outcome = load_outcome(path);
    if (outcome.kind == OutcomeKind::Success) continue;
    for (AtomicError& e : triage_outcome(outcome, patterns)) rows.emplace_back(rec.id, e);
  }
  return rows;
}

PatternTable effective_patterns(const RunConfig& cfg) {
  return cfg.patterns.empty() ? default_pattern_table() : load_pattern_table(cfg.patterns);
}

std::string render_distribution(const std::vector<std::pair<FailureCategory, std::size_t>>& dist) {
  std::ostringstream ss;
  for (const auto& [category, count] : dist) {
    char buf[16];
    std::snprintf(buf, sizeof buf, "%6zu", count);
    ss << buf << "  " << to_string(category) << '\n';
  }
  return ss.str();
}

void cmd_triage(const RunConfig& cfg, Provenance& prov) {
  Corpus corpus = load_run_corpus(cfg);
  prov.input("corpus", cfg.out / "corpus");
  prov.input("outcomes", cfg.out / "outcomes");
  if (!cfg.patterns.empty()) prov.input("patterns", cfg.patterns);
  PatternTable patterns = effective_patterns(cfg);
  std::vector<std::pair<std::string, AtomicError>> rows = collect_errors(cfg, corpus, patterns);

  std::ostringstream tsv;
  tsv << "record\tline\tcategory\tpattern\tmessage\n";
  std::vector<AtomicError> all;
  for (const auto& [id, e] : rows) {
    tsv << id << '\t' << e.diagnostic.line << '\t' << to_string(e.category) << '\t'
        << e.matched_pattern << '\t' << e.diagnostic.raw_message << '\n';
    all.push_back(e);
  }
  std::vector<std::pair<FailureCategory, std::size_t>> dist;
  if (!all.empty()) dist = distribution(all, cfg.top ? cfg.top : all.size());

  fs::path dest = cfg.out / "triage";
  fs::remove_all(dest);
  write_file(dest / "errors.tsv", tsv.str());
  write_file(dest / "distribution.csv", distribution_csv(dist));
  write_file(dest / "distribution.txt", render_distribution(dist));
  prov.output("triage", dest);
  if (dist.empty())
    std::cout << "triage: no errors\n";
  else
    std::cout << "triage: " << all.size() << " errors; top: " << to_string(dist.front().first)
              << " (" << dist.front().second << ")\n";
}

void cmd_repair(const RunConfig& cfg, Provenance& prov) {
  Corpus corpus = load_run_corpus(cfg);
  prov.input("corpus", cfg.out / "corpus");
  if (!cfg.verifier_replay.empty()) prov.input("verifier_replay", cfg.verifier_replay);
  std::unique_ptr<VerifierBackend> backend = make_verifier_backend(cfg);
  bool replay = replay_verifier(cfg);
  fs::path dest = cfg.out / "repair";
  fs::remove_all(dest);
  fs::create_directories(dest);
  OutcomeLog rlog;

  if (cfg.mutation_budget > 0) {
    // Specification-mutation mode: weaken the already-generated spec of each
    // record whose verification failed, reusing the verify stage's outcomes.
    prov.input("specs", cfg.out / "specs");
    prov.input("outcomes", cfg.out / "outcomes");
    std::size_t repaired = 0, attempted = 0;
    for (const ProgramRecord& rec : corpus.records) {
      fs::path outcome_file = cfg.out / "outcomes" / (rec.id + ".outcome");
      if (!fs::exists(outcome_file))
        throw StageError("no outcome for " + rec.id + "; run `jmlbench verify` first");
      VerificationOutcome outcome = load_outcome(outcome_file);
      LogEntry entry{rec.id, rec.origin, outcome.kind, 0.0, std::nullopt};
      fs::path spec_file = cfg.out / "specs" / (rec.id + ".java");
      if (outcome.kind == OutcomeKind::Success) {
        write_file(dest / (rec.id + ".java"), read_file(spec_file));
      } else if (outcome.kind != OutcomeKind::Invalid && fs::exists(spec_file)) {
        ++attempted;
        SpecifiedProgram spec = specified_from_source(read_file(spec_file), rec.id);
        SpecMutationResult result =
            spec_mutation_repair(spec, cfg.verifier, *backend, cfg.mutation_budget);
        std::ostringstream note;
        note << "id\t" << rec.id << '\n' << "calls\t" << result.verifier_calls << '\n';
        if (result.repaired) {
          note << "status\trepaired\n";
          write_file(dest / (rec.id + ".java"), result.repaired->source);
          entry.kind = OutcomeKind::Success;
          ++repaired;
        } else {
          note << "status\tfailed\n" << "reason\t" << result.reason << '\n';
        }
        write_file(dest / (rec.id + ".mutation.txt"), note.str());
      }
      rlog.entries.push_back(std::move(entry));
    }
    save_log(rlog, dest / "repair.log");
    prov.output("repair", dest);
    std::cout << "repair: " << repaired << "/" << attempted
              << " failing specifications repaired by mutation (budget " << cfg.mutation_budget
              << ")\n";
    return;
  }

  // Self-repair mode: generate, verify, triage, and re-prompt per record.
  if (!cfg.model_replay.empty()) prov.input("model_replay", cfg.model_replay);
  if (!cfg.demos.empty()) prov.input("demos", cfg.demos);
  if (!cfg.patterns.empty()) prov.input("patterns", cfg.patterns);
  std::unique_ptr<ModelClient> model = make_model(cfg);
  RepairSetup setup{model.get(), cfg.model, backend.get(), cfg.verifier, effective_patterns(cfg)};
  SelfRepairOptions options{cfg.style, load_demos(cfg.demos)};
  std::map<RepairTerminal, std::size_t> terminals;
  for (const ProgramRecord& rec : corpus.records) {
    RepairTrace trace;
    try {
      trace = self_repair(rec, setup, cfg.max_iters, options);
    } catch (const RepairAborted& e) {
      save_trace(e.trace, dest / (rec.id + ".trace.txt"));
      throw;
    }
    save_trace(trace, dest / (rec.id + ".trace.txt"));
    const RepairIteration& last = trace.iterations.back();
    if (trace.terminal == RepairTerminal::Success && last.extracted)
      write_file(dest / (rec.id + ".java"), last.extracted->source);
    long long tokens = 0;
    double wall = 0.0;
    for (const RepairIteration& it : trace.iterations) {
      tokens += it.tokens;
      wall += it.outcome.wall_time;
    }
    rlog.entries.push_back(
        LogEntry{rec.id, rec.origin, last.outcome.kind, replay ? 0.0 : wall, tokens});
    ++terminals[trace.terminal];
  }
  save_log(rlog, dest / "repair.log");
  prov.output("repair", dest);
  std::cout << "repair: " << terminals[RepairTerminal::Success] << "/" << corpus.records.size()
            << " verified within " << cfg.max_iters << " iterations ("
            << terminals[RepairTerminal::Exhausted] << " exhausted, "
            << terminals[RepairTerminal::Invalid] << " invalid)\n";
}

void cmd_report(const RunConfig& cfg, Provenance& prov) {
  Corpus corpus = load_run_corpus(cfg);
  prov.input("corpus", cfg.out / "corpus");
  OutcomeLog log = load_scored_log(cfg, prov);
  MetricReport report = compute_scores(cfg, corpus, log, prov);

  PatternTable patterns = effective_patterns(cfg);
  std::vector<AtomicError> all;
  if (fs::exists(cfg.out / "outcomes")) {
    prov.input("outcomes", cfg.out / "outcomes");
    for (auto& [id, e] : collect_errors(cfg, corpus, patterns)) all.push_back(e);
  }
  std::vector<std::pair<FailureCategory, std::size_t>> dist;
  if (!all.empty()) dist = distribution(all, cfg.top ? cfg.top : all.size());

  std::ostringstream pc_csv, pc_txt;
  pc_csv << "class,success_rate,failure_rate,programs\n";
  for (const auto& [cfc, slice] : report.per_class) {
    pc_csv << to_string(cfc) << ',' << percent(slice.sr) << ',' << percent(slice.fr) << ','
           << slice.total << '\n';
    char buf[96];
    std::snprintf(buf, sizeof buf, "%-16s  sr %6s%%  fr %6s%%  n %zu\n",
                  std::string(to_string(cfc)).c_str(), percent(slice.sr).c_str(),
                  percent(slice.fr).c_str(), slice.total);
    pc_txt << buf;
  }

  fs::path dest = cfg.out / "report";
  fs::remove_all(dest);
  write_file(dest / "metrics.csv", report_csv(report));
  write_file(dest / "metrics.txt", report_table(report));
  write_file(dest / "per_class.csv", pc_csv.str());
  write_file(dest / "per_class.txt", pc_txt.str());
  write_file(dest / "failures.csv", distribution_csv(dist));
  write_file(dest / "failures.txt", render_distribution(dist));
  prov.output("report", dest);
  std::cout << report_table(report);
}

// ---- configuration ------------------------------------------------------

bool guided_style(PromptStyle style) {
  return style == PromptStyle::FewShot || style == PromptStyle::CoT || style == PromptStyle::LTM;
}

void require_exists(const fs::path& path, const std::string& what) {
  if (!path.empty() && !fs::exists(path))
    throw UsageError(what + " does not exist: " + path.string());
}

// RunConfig invariants that do not depend on upstream artifacts.
void finalize(RunConfig& cfg, const std::string& stage, const std::string& style_name) {
  std::optional<PromptStyle> style = prompt_style_from_string(style_name);
  if (!style) throw UsageError("unknown prompt style '" + style_name + "'");
  cfg.style = *style;
  if (cfg.concurrency == 0) throw UsageError("concurrency must be >= 1");

  if (stage == "ingest") {
    if (cfg.corpus.empty()) throw UsageError("ingest needs --corpus");
    require_exists(cfg.corpus, "corpus directory");
  }
  require_exists(cfg.verifier_replay, "verifier replay directory");
  require_exists(cfg.model_replay, "model replay directory");
  require_exists(cfg.demos, "demos directory");
  require_exists(cfg.patterns, "pattern table");
  require_exists(cfg.log, "outcome log");
  require_exists(cfg.flip_log, "flip log");
  require_exists(cfg.completeness_log, "completeness log");

  if (stage == "verify" || stage == "repair") validate_config(cfg.verifier);
  if (stage == "generate" || (stage == "repair" && cfg.mutation_budget == 0)) {
    validate_config(cfg.model);
    if (cfg.style == PromptStyle::Repair)
      throw UsageError("the Repair style is chosen by the repair loop, not per run");
    if (guided_style(cfg.style) && cfg.demos.empty())
      throw UsageError(std::string(to_string(cfg.style)) + " prompts need --demos");
    if (cfg.model_replay.empty() && cfg.model.endpoint.empty())
      throw UsageError(stage + " needs --model-replay or --model-endpoint");
  }
  if (stage == "repair" && cfg.max_iters == 0) throw UsageError("max-iters must be >= 1");
}

int run_stage(const RunConfig& cfg, const std::string& stage,
              const std::function<void(const RunConfig&, Provenance&)>& body) {
  fs::create_directories(cfg.out / "provenance");
  fs::remove(cfg.out / "provenance" / (stage + ".error"));
  append_stamp(cfg, stage, "started " + iso_now(), true);
  Provenance prov{stage, {}, {}};
  try {
    body(cfg, prov);
  } catch (const std::exception& e) {
    append_stamp(cfg, stage, "failed " + iso_now(), false);
    write_error_record(cfg, stage, error_kind(e), e.what());
    std::cerr << "jmlbench " << stage << ": " << e.what() << '\n';
    return 3;
  }
  write_provenance(cfg, prov);
  append_stamp(cfg, stage, "finished " + iso_now(), false);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"jmlbench: specification-inference evaluation pipeline"};
  app.set_config("--config", "", "key=value config file; keys match the long option names");
  app.require_subcommand(1);
  app.set_version_flag("--version", JMLBENCH_VERSION);

  RunConfig cfg;
  std::string corpus, out = "run", style = "ZeroShot";
  std::string verifier_replay, model_replay, demos, patterns;
  std::string log, flip_log, completeness_log;

  app.add_option("--corpus", corpus, "corpus directory to ingest");
  app.add_option("--out", out, "artifact root directory")->capture_default_str();
  app.add_option("--style", style, "prompt style: ZeroShot|FewShot|CoT|LTM")
      ->capture_default_str();
  app.add_option("--max-iters", cfg.max_iters, "self-repair iteration cap")
      ->capture_default_str();
  app.add_option("--concurrency", cfg.concurrency, "verification worker count")
      ->capture_default_str();
  app.add_option("--seed", cfg.seed, "reserved for randomized tie-breaking");
  app.add_option("--verifier-command", cfg.verifier.command_template, "verifier command template");
  app.add_option("--verifier-mode", cfg.verifier.mode, "verifier mode");
  app.add_option("--verifier-solver", cfg.verifier.solver, "SMT solver name");
  app.add_option("--verifier-timeout", cfg.verifier.timeout_seconds, "verifier timeout (s)");
  app.add_flag("--verifier-nullable,!--verifier-no-nullable", cfg.verifier.nullable_by_default,
               "pass the nullable-by-default flag");
  app.add_flag("--verifier-arithmetic,!--verifier-no-arithmetic", cfg.verifier.arithmetic_mode,
               "pass the arithmetic-mode flag");
  app.add_option("--verifier-replay", verifier_replay, "replay recorded verifier runs from here");
  app.add_option("--model-name", cfg.model.model, "model name sent to the endpoint");
  app.add_option("--model-temperature", cfg.model.temperature, "sampling temperature");
  app.add_option("--model-max-tokens", cfg.model.max_tokens, "completion token cap");
  app.add_option("--model-endpoint", cfg.model.endpoint, "chat-completions base URL");
  app.add_option("--model-api-key-env", cfg.model.api_key_env, "env var holding the API key");
  app.add_option("--model-interval", cfg.model.request_interval_seconds,
                 "minimum seconds between requests");
  app.add_option("--model-replay", model_replay, "replay recorded model replies from here");
  app.add_option("--demos", demos, "directory of worked examples (*.java)");
  app.add_option("--patterns", patterns, "triage pattern table file");
  app.add_option("--log", log, "outcome log to score (default: <out>/outcomes/verify.log)");
  app.add_option("--flip-log", flip_log, "variant-run outcome log for the flip rate");
  app.add_option("--completeness-log", completeness_log, "mutant-run outcome log");
  app.add_option("--mutation-budget", cfg.mutation_budget,
                 "repair by spec mutation with this verifier-call budget");
  app.add_option("--top", cfg.top, "cap ranked failure categories (0 = all)");

  const char* stages[] = {"ingest",  "transform", "mutate", "generate", "verify",
                          "score",   "triage",    "repair", "report"};
  const char* blurbs[] = {
      "validate a corpus and copy it into the run directory",
      "build the semantic-preserving variant corpora",
      "generate and suppress mutants for every record",
      "prompt the model for a specification per record",
      "run the verifier over generated specifications (and mutants)",
      "compute metric reports from outcome logs",
      "classify failure messages and rank categories",
      "self-repair (or mutation-repair) failing specifications",
      "render metric, per-class, and failure reports",
  };
  for (std::size_t i = 0; i < 9; ++i) app.add_subcommand(stages[i], blurbs[i])->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  std::string stage = app.get_subcommands().front()->get_name();
  cfg.corpus = corpus;
  cfg.out = out;
  cfg.verifier_replay = verifier_replay;
  cfg.model_replay = model_replay;
  cfg.demos = demos;
  cfg.patterns = patterns;
  cfg.log = log;
  cfg.flip_log = flip_log;
  cfg.completeness_log = completeness_log;

  try {
    finalize(cfg, stage, style);
  } catch (const std::exception& e) {
    std::cerr << "jmlbench: " << e.what() << '\n';
    return 2;
  }

  static const std::map<std::string, void (*)(const RunConfig&, Provenance&)> dispatch = {
      {"ingest", cmd_ingest},   {"transform", cmd_transform}, {"mutate", cmd_mutate},
      {"generate", cmd_generate}, {"verify", cmd_verify},     {"score", cmd_score},
      {"triage", cmd_triage},   {"repair", cmd_repair},       {"report", cmd_report},
  };
  return run_stage(cfg, stage, dispatch.at(stage));
}
