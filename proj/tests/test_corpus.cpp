#include <doctest.h>

#include "jmlbench/corpus.hpp"
#include "support.hpp"

using namespace jmlbench;
using testsupport::TempDir;
using testsupport::fixtures_dir;
using testsupport::spit;

TEST_CASE("load_corpus reads the small fixture corpus") {
  Corpus corpus = load_corpus(fixtures_dir() / "corpus_small");
  CHECK(corpus.meta.name == "corpus_small");
  CHECK(corpus.records.size() == 9);
  CHECK(corpus.warnings.empty());

  std::size_t total = 0;
  for (const auto& [cfc, n] : corpus.meta.counts) total += n;
  CHECK(total == corpus.records.size());

  CHECK(corpus.meta.counts.at(ControlFlowClass::Sequential) == 4);
  CHECK(corpus.meta.counts.at(ControlFlowClass::Branching) == 2);
  CHECK(corpus.meta.counts.at(ControlFlowClass::SinglePathLoop) == 1);
  CHECK(corpus.meta.counts.at(ControlFlowClass::MultiPathLoop) == 1);
  CHECK(corpus.meta.counts.at(ControlFlowClass::NestedLoop) == 1);

  const ProgramRecord* rec = corpus.find("Maximum");
  REQUIRE(rec != nullptr);
  CHECK(rec->intent == "Return the larger of two non-negative integers.");
  CHECK(rec->origin.kind == Origin::Kind::Base);
  CHECK(corpus.find("NoSuchId") == nullptr);
}

TEST_CASE("classify_control_flow follows the dominance order") {
  // ternary conditionals are not statement-level branches
  CHECK(classify_control_flow(
            "class A { int f(int a, int b) { return a > b ? a : b; } }") ==
        ControlFlowClass::Sequential);
  CHECK(classify_control_flow(
            "class A { int f(int a) { if (a > 0) { return a; } return -a; } }") ==
        ControlFlowClass::Branching);
  CHECK(classify_control_flow(
            "class A { int f(int t) { int r = 0; for (int i = 0; i < t; i++) { r = r + 2; } "
            "return r; } }") == ControlFlowClass::SinglePathLoop);
  CHECK(classify_control_flow(
            "class A { int f(int t) { int r = 0; while (t > 0) { if (t % 2 == 0) { r++; } t--; } "
            "return r; } }") == ControlFlowClass::MultiPathLoop);
  // early exit alone also makes a loop multi-path
  CHECK(classify_control_flow(
            "class A { int f(int[] v) { for (int i = 0; i < v.length; i++) { return v[i]; } "
            "return 0; } }") == ControlFlowClass::MultiPathLoop);
  CHECK(classify_control_flow(
            "class A { int f(int n) { int r = 0; for (int i = 0; i < n; i++) { for (int j = 0; "
            "j < n; j++) { r++; } } return r; } }") == ControlFlowClass::NestedLoop);
  // nesting dominates internal branching
  CHECK(classify_control_flow(
            "class A { int f(int n) { int r = 0; for (int i = 0; i < n; i++) { if (i > 2) { "
            "for (int j = 0; j < n; j++) { r++; } } } return r; } }") ==
        ControlFlowClass::NestedLoop);
}

TEST_CASE("classification is stable under reparsing") {
  Corpus corpus = load_corpus(fixtures_dir() / "corpus_small");
  for (const ProgramRecord& rec : corpus.records) {
    SyntaxTree tree = parse(rec.bare_source);
    CHECK(classify_control_flow(render(tree)) == rec.cfc);
  }
}

TEST_CASE("corpus save then load round-trips") {
  Corpus corpus = load_corpus(fixtures_dir() / "corpus_small");
  TempDir tmp;
  save_corpus(corpus, tmp.path());
  Corpus reloaded = load_corpus(tmp.path());
  CHECK(reloaded == corpus);
}

TEST_CASE("validate_record flags invariant violations") {
  ProgramRecord good;
  good.id = "Good";
  good.bare_source = "class Good { int f() { return 1; } }";
  CHECK(validate_record(good).empty());

  ProgramRecord annotated = good;
  annotated.id = "Annotated";
  annotated.bare_source = "class A { //@ ensures \\result == 1;\n int f() { return 1; } }";
  auto violations = validate_record(annotated);
  REQUIRE(violations.size() == 1);
  CHECK(violations[0].code == "AnnotationPresent");

  ProgramRecord broken = good;
  broken.id = "Broken";
  broken.bare_source = "class A {";
  violations = validate_record(broken);
  REQUIRE(violations.size() == 1);
  CHECK(violations[0].code == "ParseFailure");

  Corpus corpus;
  corpus.records.push_back(good);
  ProgramRecord variant = good;
  variant.id = "Variant";
  variant.origin.kind = Origin::Kind::Transformed;
  variant.origin.parent_id = "Missing";
  variant.origin.transform_id = "NotATransform";
  std::set<std::string> known{"For2While"};
  violations = validate_record(variant, &corpus, &known);
  REQUIRE(violations.size() == 2);
  CHECK(violations[0].code == "DanglingParent");
  CHECK(violations[1].code == "UnknownTransform");

  variant.origin.parent_id = "Good";
  variant.origin.transform_id = "For2While";
  CHECK(validate_record(variant, &corpus, &known).empty());
}

TEST_CASE("load_corpus error paths") {
  TempDir tmp;
  SUBCASE("missing manifest") {
    try {
      load_corpus(tmp.path());
      FAIL("expected CorpusError");
    } catch (const CorpusError& e) {
      CHECK(e.code() == CorpusError::Code::MissingManifest);
    }
  }
  SUBCASE("duplicate id") {
    spit(tmp.path() / "src/A.java", "class A { }");
    spit(tmp.path() / "manifest.json",
         R"({"name":"x","version":"1","records":[)"
         R"({"id":"A","source_path":"src/A.java","intent":""},)"
         R"({"id":"A","source_path":"src/A.java","intent":""}]})");
    try {
      load_corpus(tmp.path());
      FAIL("expected CorpusError");
    } catch (const CorpusError& e) {
      CHECK(e.code() == CorpusError::Code::DuplicateId);
    }
    Corpus lenient = load_corpus(tmp.path(), true);
    CHECK(lenient.records.size() == 1);
    CHECK(lenient.warnings.size() == 1);
  }
  SUBCASE("unparseable record") {
    spit(tmp.path() / "src/A.java", "class A {");
    spit(tmp.path() / "manifest.json",
         R"({"name":"x","version":"1","records":[)"
         R"({"id":"A","source_path":"src/A.java","intent":""}]})");
    try {
      load_corpus(tmp.path());
      FAIL("expected CorpusError");
    } catch (const CorpusError& e) {
      CHECK(e.code() == CorpusError::Code::ParseFailure);
    }
    Corpus lenient = load_corpus(tmp.path(), true);
    CHECK(lenient.records.empty());
    REQUIRE(lenient.warnings.size() == 1);
  }
  SUBCASE("annotated record is rejected") {
    spit(tmp.path() / "src/A.java",
         "class A { //@ ensures \\result == 1;\n int f() { return 1; } }");
    spit(tmp.path() / "manifest.json",
         R"({"name":"x","version":"1","records":[)"
         R"({"id":"A","source_path":"src/A.java","intent":""}]})");
    try {
      load_corpus(tmp.path());
      FAIL("expected CorpusError");
    } catch (const CorpusError& e) {
      CHECK(e.code() == CorpusError::Code::InvalidRecord);
    }
  }
  SUBCASE("class mismatch becomes a warning") {
    spit(tmp.path() / "src/A.java", "class A { int f() { return 1; } }");
    spit(tmp.path() / "manifest.json",
         R"({"name":"x","version":"1","records":[)"
         R"({"id":"A","source_path":"src/A.java","intent":"","class":"NestedLoop"}]})");
    Corpus corpus = load_corpus(tmp.path());
    REQUIRE(corpus.records.size() == 1);
    CHECK(corpus.records[0].cfc == ControlFlowClass::Sequential);
    REQUIRE(corpus.warnings.size() == 1);
    CHECK(corpus.warnings[0].find("recomputed") != std::string::npos);
  }
  SUBCASE("crlf sources are normalized") {
    spit(tmp.path() / "src/A.java", "class A {\r\n int f() { return 1; }\r\n}\r\n");
    spit(tmp.path() / "manifest.json",
         R"({"name":"x","version":"1","records":[)"
         R"({"id":"A","source_path":"src/A.java","intent":""}]})");
    Corpus corpus = load_corpus(tmp.path());
    REQUIRE(corpus.records.size() == 1);
    CHECK(corpus.records[0].bare_source.find('\r') == std::string::npos);
  }
}
