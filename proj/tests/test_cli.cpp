// End-to-end checks of the jmlbench binary: pipeline stages over replay
// backends, exit codes, artifact idempotence, and provenance records.
#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <string>
#include <sys/wait.h>

#include "jmlbench/corpus.hpp"
#include "jmlbench/genrepair.hpp"
#include "jmlbench/metrics.hpp"
#include "jmlbench/mutate.hpp"
#include "jmlbench/triage.hpp"
#include "jmlbench/verify.hpp"
#include "support.hpp"

using namespace jmlbench;
namespace fs = std::filesystem;
using testsupport::TempDir;
using testsupport::slurp;
using testsupport::spit;

namespace {

fs::path cli_path() {
  const char* env = std::getenv("JMLBENCH_CLI");
  if (!env) throw std::runtime_error("JMLBENCH_CLI not set");
  return fs::path(env);
}

// Runs the binary, returning its exit code; stdout/stderr land in `dir`.
int run_cli(const std::string& args, const fs::path& dir) {
  std::string cmd = cli_path().string() + " " + args + " > " + (dir / "stdout.txt").string() +
                    " 2> " + (dir / "stderr.txt").string();
  int status = std::system(cmd.c_str());
  REQUIRE(WIFEXITED(status));
  return WEXITSTATUS(status);
}

const char* kGainBare =
    "class Gain {\n"
    "    int gain(int x) {\n"
    "        return x + 1;\n"
    "    }\n"
    "}\n";

const char* kGainSpec =
    "class Gain {\n"
    "    //@ ensures \\result == x + 1;\n"
    "    int gain(int x) {\n"
    "        return x + 1;\n"
    "    }\n"
    "}\n";

const char* kPickBare =
    "class Pick {\n"
    "    int pick(int a, int b) {\n"
    "        return a < b ? a : b;\n"
    "    }\n"
    "}\n";

const char* kPickSpec =
    "class Pick {\n"
    "    //@ ensures \\result <= a;\n"
    "    int pick(int a, int b) {\n"
    "        return a < b ? a : b;\n"
    "    }\n"
    "}\n";

const char* kBlankBare =
    "class Blank {\n"
    "    int same(int x) {\n"
    "        return x;\n"
    "    }\n"
    "}\n";

std::string fenced(const std::string& source) {
  return "Here is the specification.\n\n```java\n" + source + "```\n";
}

ProgramRecord record(const std::string& id, const std::string& source, const std::string& intent) {
  ProgramRecord r;
  r.id = id;
  r.bare_source = source;
  r.intent = intent;
  r.cfc = classify_control_flow(source);
  return r;
}

RawRun success_run() { return RawRun{"Summary: 0 verification failures\n", 0, false}; }

RawRun postcondition_run(const std::string& file) {
  return RawRun{file +
                    ":2: verify: The prover cannot establish an assertion "
                    "(PostconditionFailure) in method m\n",
                1, false};
}

std::string tree_digest(const fs::path& dir) {
  std::vector<fs::path> files;
  for (const auto& entry : fs::recursive_directory_iterator(dir))
    if (entry.is_regular_file()) files.push_back(entry.path());
  std::sort(files.begin(), files.end());
  std::string acc;
  for (const fs::path& f : files) {
    acc += fs::relative(f, dir).generic_string();
    acc += '\0';
    acc += slurp(f);
    acc += '\n';
  }
  return content_hash(acc);
}

}  // namespace

TEST_CASE("pipeline over a three-record corpus with replay backends") {
  TempDir tmp;
  fs::path src_corpus = tmp.path() / "corpus_src";
  fs::path out = tmp.path() / "run";
  fs::path mdir = tmp.path() / "model";
  fs::path vdir = tmp.path() / "verifier";

  Corpus mini;
  mini.meta.name = "mini";
  mini.meta.version = "1";
  mini.records.push_back(record("Gain", kGainBare, "Add one to an integer."));
  mini.records.push_back(record("Pick", kPickBare, "Return the smaller argument."));
  mini.records.push_back(record("Blank", kBlankBare, "Return the argument."));
  save_corpus(mini, src_corpus);

  // Model transcript: a good spec for Gain, a failing one for Pick, prose
  // without any code block for Blank.
  record_model_reply(mdir, build_prompt(PromptStyle::ZeroShot, mini.records[0]), fenced(kGainSpec));
  record_model_reply(mdir, build_prompt(PromptStyle::ZeroShot, mini.records[1]), fenced(kPickSpec));
  record_model_reply(mdir, build_prompt(PromptStyle::ZeroShot, mini.records[2]),
                     "I could not produce a specification for this one.");

  record_replay(vdir, kGainSpec, success_run());
  record_replay(vdir, kPickSpec, postcondition_run("Pick.java"));

  // Mutant runs for the verified spec: every mutant killed except the first,
  // so CR = 5/6.
  MutantSet mutants =
      suppress_equivalents(generate_mutants(kGainBare, all_mutation_operators(), "Gain"));
  Extraction gain = extract_specification(fenced(kGainSpec), mini.records[0]);
  REQUIRE(gain.program.has_value());
  CompletenessInputs inputs = completeness_inputs(*gain.program, mutants);
  REQUIRE(inputs.pairs.size() == 6);
  for (std::size_t i = 0; i < inputs.pairs.size(); ++i)
    record_replay(vdir, inputs.pairs[i].second.source,
                  i == 0 ? success_run() : postcondition_run("Gain.java"));

  std::string common = " --out " + out.string();
  std::string backends =
      " --model-replay " + mdir.string() + " --verifier-replay " + vdir.string();

  REQUIRE(run_cli("ingest --corpus " + src_corpus.string() + common, tmp.path()) == 0);
  REQUIRE(run_cli("generate" + common + backends, tmp.path()) == 0);
  CHECK(slurp(out / "specs" / "Gain.java") == kGainSpec);
  CHECK(!fs::exists(out / "specs" / "Blank.java"));
  CHECK(slurp(out / "specs" / "Blank.meta").find("status\tNoCodeBlock") != std::string::npos);

  REQUIRE(run_cli("mutate" + common, tmp.path()) == 0);
  REQUIRE(run_cli("verify" + common + backends, tmp.path()) == 0);

  OutcomeLog log = load_log(out / "outcomes" / "verify.log");
  REQUIRE(log.entries.size() == 3);
  CHECK(log.entries[0].kind == OutcomeKind::Success);
  CHECK(log.entries[1].kind == OutcomeKind::Failure);
  CHECK(log.entries[2].kind == OutcomeKind::Invalid);
  long long want_tokens = 0;
  for (const LogEntry& e : log.entries) {
    REQUIRE(e.token_cost.has_value());
    want_tokens += *e.token_cost;
  }
  CHECK(want_tokens > 0);

  OutcomeLog comp = load_log(out / "outcomes" / "completeness.log");
  REQUIRE(comp.entries.size() == 6);
  std::size_t survivors = 0;
  for (const LogEntry& e : comp.entries) {
    CHECK(e.origin.parent_id == "Gain");
    survivors += e.kind == OutcomeKind::Success ? 1 : 0;
  }
  CHECK(survivors == 1);

  REQUIRE(run_cli("score" + common, tmp.path()) == 0);
  std::string csv = slurp(out / "scores" / "report.csv");
  std::string want_row = "33.3,66.7,83.3,,3," + std::to_string(want_tokens) + "\n";
  CHECK(csv.find(want_row) != std::string::npos);

  REQUIRE(run_cli("triage" + common, tmp.path()) == 0);
  CHECK(slurp(out / "triage" / "distribution.csv") ==
        "category,count\nInvalidSpecification,1\nPostconditionFailure,1\n");
  std::string errors = slurp(out / "triage" / "errors.tsv");
  CHECK(errors.find("Pick\t2\tPostconditionFailure") != std::string::npos);
  CHECK(errors.find("Blank\t1\tInvalidSpecification") != std::string::npos);

  REQUIRE(run_cli("report" + common, tmp.path()) == 0);
  CHECK(slurp(out / "report" / "metrics.csv") == csv);
  CHECK(slurp(out / "report" / "failures.csv") == slurp(out / "triage" / "distribution.csv"));
  std::string per_class = slurp(out / "report" / "per_class.csv");
  CHECK(per_class.find("Sequential,33.3,66.7,3") != std::string::npos);

  SUBCASE("re-running a stage reproduces its artifacts byte for byte") {
    std::string outcomes_before = tree_digest(out / "outcomes");
    std::string scores_before = tree_digest(out / "scores");
    std::string prov_before = slurp(out / "provenance" / "verify.prov");
    REQUIRE(run_cli("verify" + common + backends, tmp.path()) == 0);
    REQUIRE(run_cli("score" + common, tmp.path()) == 0);
    CHECK(tree_digest(out / "outcomes") == outcomes_before);
    CHECK(tree_digest(out / "scores") == scores_before);
    CHECK(slurp(out / "provenance" / "verify.prov") == prov_before);
  }

  SUBCASE("a flip log populates the flip-rate column") {
    OutcomeLog flip;
    flip.entries.push_back(LogEntry{"Gain__For2While",
                                    Origin{Origin::Kind::Transformed, "Gain", "For2While"},
                                    OutcomeKind::Failure, 0.0, std::nullopt});
    flip.entries.push_back(LogEntry{"Gain__TernaryToIf",
                                    Origin{Origin::Kind::Transformed, "Gain", "TernaryToIf"},
                                    OutcomeKind::Success, 0.0, std::nullopt});
    save_log(flip, out / "outcomes" / "flip.log");
    REQUIRE(run_cli("score" + common, tmp.path()) == 0);
    CHECK(slurp(out / "scores" / "report.csv")
              .find("33.3,66.7,83.3,50.0,3," + std::to_string(want_tokens) + "\n") !=
          std::string::npos);
  }

  SUBCASE("mutation repair weakens the failing spec and rescoring picks it up") {
    // Dropping Pick's only clause leaves the bare program, which verifies.
    record_replay(vdir, kPickBare, success_run());
    REQUIRE(run_cli("repair --mutation-budget 5" + common + " --verifier-replay " + vdir.string(),
                    tmp.path()) == 0);
    CHECK(slurp(out / "repair" / "Pick.java") == kPickBare);
    CHECK(slurp(out / "repair" / "Gain.java") == kGainSpec);
    CHECK(slurp(out / "repair" / "Pick.mutation.txt").find("status\trepaired") !=
          std::string::npos);

    OutcomeLog rlog = load_log(out / "repair" / "repair.log");
    REQUIRE(rlog.entries.size() == 3);
    CHECK(rlog.entries[0].kind == OutcomeKind::Success);
    CHECK(rlog.entries[1].kind == OutcomeKind::Success);
    CHECK(rlog.entries[2].kind == OutcomeKind::Invalid);

    REQUIRE(run_cli("score" + common + " --log " + (out / "repair" / "repair.log").string(),
                    tmp.path()) == 0);
    CHECK(slurp(out / "scores" / "report.csv").find("66.7,33.3,83.3,,3,0\n") !=
          std::string::npos);
  }
}

TEST_CASE("self-repair via the CLI resolves a planted syntax error at iteration 2") {
  TempDir tmp;
  fs::path src_corpus = tmp.path() / "corpus_src";
  fs::path out = tmp.path() / "run";
  fs::path mdir = tmp.path() / "model";
  fs::path vdir = tmp.path() / "verifier";

  Corpus mini;
  mini.meta.name = "mini";
  mini.meta.version = "1";
  mini.records.push_back(record("Gain", kGainBare, "Add one to an integer."));
  save_corpus(mini, src_corpus);

  std::string broken =
      "class Gain {\n"
      "    //@ ensures \\result == BROKEN x;\n"
      "    int gain(int x) {\n"
      "        return x + 1;\n"
      "    }\n"
      "}\n";
  RawRun broken_run{"Gain.java:2: error: Unexpected or misspelled JML token: BROKEN\n", 1, false};

  record_model_reply(mdir, build_prompt(PromptStyle::ZeroShot, mini.records[0]), fenced(broken));
  record_replay(vdir, broken, broken_run);
  record_replay(vdir, kGainSpec, success_run());

  // The second reply answers the repair prompt the loop will build from the
  // first iteration's triage, reproduced here over the same replay store.
  Extraction first = extract_specification(fenced(broken), mini.records[0]);
  REQUIRE(first.program.has_value());
  VerifierConfig vcfg;
  ReplayBackend backend(vdir);
  VerificationOutcome first_outcome = verify(*first.program, vcfg, backend);
  REQUIRE(first_outcome.kind == OutcomeKind::Failure);
  std::vector<AtomicError> first_errors = triage_outcome(first_outcome, default_pattern_table());
  std::optional<FailureCategory> cat = dominant_category(first_errors);
  REQUIRE(cat.has_value());
  CHECK(*cat == FailureCategory::of(FailureCategory::Value::SyntaxError));
  PromptBundle repair_prompt = build_repair_prompt(*cat, *first.program, first_errors);
  record_model_reply(mdir, repair_prompt,
                     "### FIXED SPECIFICATION\n\n```java\n" + std::string(kGainSpec) + "```\n");

  std::string common = " --out " + out.string();
  REQUIRE(run_cli("ingest --corpus " + src_corpus.string() + common, tmp.path()) == 0);
  REQUIRE(run_cli("repair --max-iters 3" + common + " --model-replay " + mdir.string() +
                      " --verifier-replay " + vdir.string(),
                  tmp.path()) == 0);
  CHECK(slurp(tmp.path() / "stdout.txt").find("repair: 1/1") != std::string::npos);

  std::string trace = slurp(out / "repair" / "Gain.trace.txt");
  CHECK(trace.find("=== iteration 1 (ZeroShot") != std::string::npos);
  CHECK(trace.find("=== iteration 2 (Repair: SyntaxError") != std::string::npos);
  CHECK(trace.find("=== terminal Success") != std::string::npos);
  CHECK(slurp(out / "repair" / "Gain.java") == kGainSpec);

  OutcomeLog rlog = load_log(out / "repair" / "repair.log");
  REQUIRE(rlog.entries.size() == 1);
  CHECK(rlog.entries[0].kind == OutcomeKind::Success);
  CHECK(rlog.entries[0].token_cost.has_value());

  SUBCASE("a missing recorded reply aborts the stage with a partial trace") {
    fs::remove_all(mdir / "missing");  // placeholder so the subcase has a body distinct per run
    fs::path mdir2 = tmp.path() / "model2";
    fs::create_directories(mdir2);
    record_model_reply(mdir2, build_prompt(PromptStyle::ZeroShot, mini.records[0]),
                       fenced(broken));
    CHECK(run_cli("repair --max-iters 3" + common + " --model-replay " + mdir2.string() +
                      " --verifier-replay " + vdir.string(),
                  tmp.path()) == 3);
    std::string err = slurp(out / "provenance" / "repair.error");
    CHECK(err.find("error\tRepairAborted") != std::string::npos);
    CHECK(slurp(out / "repair" / "Gain.trace.txt").find("=== iteration 1") != std::string::npos);
  }
}

TEST_CASE("config file values apply and explicit flags take precedence") {
  TempDir tmp;
  fs::path cfg = tmp.path() / "run.ini";
  fs::path out_a = tmp.path() / "a";
  fs::path out_b = tmp.path() / "b";
  spit(cfg, "corpus=" + (testsupport::fixtures_dir() / "corpus_small").string() +
                "\nout=" + out_a.string() +
                "\nverifier-timeout=120\n");

  REQUIRE(run_cli("ingest --config " + cfg.string(), tmp.path()) == 0);
  CHECK(fs::exists(out_a / "corpus" / "manifest.json"));
  CHECK(slurp(out_a / "provenance" / "ingest.config").find("verifier.timeout 120") !=
        std::string::npos);

  REQUIRE(run_cli("ingest --config " + cfg.string() + " --out " + out_b.string(), tmp.path()) ==
          0);
  CHECK(fs::exists(out_b / "corpus" / "manifest.json"));
  CHECK(!fs::exists(out_a / "corpus" / "manifest.json") == false);  // untouched
}

TEST_CASE("exit codes distinguish configuration errors from stage failures") {
  TempDir tmp;
  fs::path out = tmp.path() / "run";

  CHECK(run_cli("--no-such-flag", tmp.path()) == 2);
  CHECK(run_cli("ingest", tmp.path()) == 2);  // no corpus given
  CHECK(run_cli("ingest --corpus " + (tmp.path() / "absent").string() + " --out " + out.string(),
                tmp.path()) == 2);
  CHECK(run_cli("generate --out " + out.string(), tmp.path()) == 2);  // no model backend
  CHECK(run_cli("score --style Nonsense --out " + out.string(), tmp.path()) == 2);
  CHECK(run_cli("repair --max-iters 0 --out " + out.string() + " --verifier-replay " +
                    tmp.path().string(),
                tmp.path()) == 2);

  // Stage failures: missing upstream artifacts, then an empty log.
  CHECK(run_cli("transform --out " + out.string(), tmp.path()) == 3);
  REQUIRE(run_cli("ingest --corpus " + (testsupport::fixtures_dir() / "corpus_small").string() +
                      " --out " + out.string(),
                  tmp.path()) == 0);
  spit(out / "outcomes" / "verify.log", "");
  CHECK(run_cli("score --out " + out.string(), tmp.path()) == 3);
  std::string err = slurp(out / "provenance" / "score.error");
  CHECK(err.find("error\tMetricsError:EmptyLog") != std::string::npos);
  CHECK(err.find("stage\tscore") != std::string::npos);

  // A later successful run clears the stale error record.
  OutcomeLog log;
  log.entries.push_back(LogEntry{"Maximum", Origin{}, OutcomeKind::Success, 0.0, std::nullopt});
  save_log(log, out / "outcomes" / "verify.log");
  CHECK(run_cli("score --out " + out.string(), tmp.path()) == 0);
  CHECK(!fs::exists(out / "provenance" / "score.error"));
}

TEST_CASE("provenance records stage, version, config hash, and input hashes") {
  TempDir tmp;
  fs::path out = tmp.path() / "run";
  REQUIRE(run_cli("ingest --corpus " + (testsupport::fixtures_dir() / "corpus_small").string() +
                      " --out " + out.string(),
                  tmp.path()) == 0);
  std::string prov = slurp(out / "provenance" / "ingest.prov");
  CHECK(prov.find("stage\tingest\n") != std::string::npos);
  CHECK(prov.find("version\t") != std::string::npos);
  CHECK(prov.find("config\t") != std::string::npos);
  CHECK(prov.find("input\t") != std::string::npos);
  CHECK(prov.find("output\tcorpus\t") != std::string::npos);

  std::string stamp = slurp(out / "provenance" / "ingest.stamp");
  CHECK(stamp.find("started ") != std::string::npos);
  CHECK(stamp.find("finished ") != std::string::npos);
  CHECK(prov.find("202") == std::string::npos);  // timestamps live in the sidecar only

  REQUIRE(run_cli("ingest --corpus " + (testsupport::fixtures_dir() / "corpus_small").string() +
                      " --out " + out.string(),
                  tmp.path()) == 0);
  CHECK(slurp(out / "provenance" / "ingest.prov") == prov);
}
