#include <doctest.h>

#include <algorithm>
#include <set>
#include <unordered_set>

#include "jmlbench/ast.hpp"
#include "jmlbench/corpus.hpp"
#include "jmlbench/mutate.hpp"
#include "support.hpp"

using namespace jmlbench;
using testsupport::TempDir;
using testsupport::fixtures_dir;
using testsupport::slurp;

namespace {

std::string wrap(const std::string& body) {
  return "class T {\n" + body + "}\n";
}

const char* kMaximum =
    "class Maximum {\n"
    "    int max(int a, int b) {\n"
    "        return a > b ? a : b;\n"
    "    }\n"
    "}\n";

const char* kFig1 =
    "class TheMaximumAchievableX {\n"
    "    //@ requires num >= 0 && t >= 0;\n"
    "    //@ requires num + 2*t <= Integer.MAX_VALUE;\n"
    "    //@ requires num + 2*t >= Integer.MIN_VALUE;\n"
    "    //@ ensures \\result == num + 2*t;\n"
    "    int maximumAchievableX(int num, int t) {\n"
    "        int res = num;\n"
    "        //@ maintaining res == num + 2*(i-1);\n"
    "        //@ maintaining i >= 1 && i <= t+1;\n"
    "        //@ decreasing t-i+1;\n"
    "        for (int i = 1; i <= t; i++) {\n"
    "            res = res + 2;\n"
    "        }\n"
    "        return res;\n"
    "    }\n"
    "}\n";

MutantSet gen(const std::string& src, std::initializer_list<MutationOperator> ops,
              const std::string& id = "p") {
  return generate_mutants(src, std::set<MutationOperator>(ops), id);
}

Mutant plant(const MutantSet& set, const std::string& from, const std::string& to) {
  std::size_t at = set.parent_source.find(from);
  REQUIRE(at != std::string::npos);
  Mutant m;
  m.source = set.parent_source.substr(0, at) + to + set.parent_source.substr(at + from.size());
  m.parent_id = set.parent_id;
  m.op = MutationOperator::ArithmeticOpReplace;
  m.site = Span{at, at + from.size()};
  return m;
}

}  // namespace

TEST_CASE("mutation operator names round-trip") {
  CHECK(all_mutation_operators().size() == 6);
  for (MutationOperator op : kAllMutationOperators) {
    std::string_view name = to_string(op);
    CHECK(!name.empty());
    CHECK(mutation_operator_from_string(name) == op);
  }
  CHECK(!mutation_operator_from_string("TotallyBogus").has_value());
}

TEST_CASE("Maximum yields exactly six mutants in a stable order") {
  MutantSet set = generate_mutants(kMaximum, all_mutation_operators(), "Maximum");
  CHECK(set.parent_id == "Maximum");
  CHECK(set.parent_source == kMaximum);
  REQUIRE(set.mutants.size() == 6);

  const char* expected_exprs[] = {"a < b", "a <= b", "a >= b", "a == b", "a != b"};
  for (int i = 0; i < 5; ++i) {
    CHECK(set.mutants[i].op == MutationOperator::RelationalOpReplace);
    CHECK(set.mutants[i].source.find(std::string("return ") + expected_exprs[i] + " ? a : b;") !=
          std::string::npos);
  }
  CHECK(set.mutants[5].op == MutationOperator::UnaryInsert);
  CHECK(set.mutants[5].source.find("return !(a > b) ? a : b;") != std::string::npos);

  std::string src(kMaximum);
  std::size_t op_at = src.find(" > ") + 1;
  std::size_t cond_at = src.find("a > b");
  for (int i = 0; i < 5; ++i) CHECK(set.mutants[i].site == Span{op_at, op_at + 1});
  CHECK(set.mutants[5].site == Span{cond_at, cond_at + 5});

  for (const Mutant& m : set.mutants) {
    CHECK(m.parent_id == "Maximum");
    CHECK(!m.suppressed);
    CHECK_NOTHROW(parse(m.source));
  }

  SUBCASE("generation is deterministic") {
    MutantSet again = generate_mutants(kMaximum, all_mutation_operators(), "Maximum");
    REQUIRE(again.mutants.size() == set.mutants.size());
    for (std::size_t i = 0; i < set.mutants.size(); ++i)
      CHECK(again.mutants[i] == set.mutants[i]);
  }
}

TEST_CASE("replacement sets per operator family") {
  SUBCASE("arithmetic + gets the other four operators") {
    MutantSet set = gen(wrap("    int f(int a, int b) { return a + b; }\n"),
                        {MutationOperator::ArithmeticOpReplace});
    REQUIRE(set.mutants.size() == 4);
    const char* exprs[] = {"a - b", "a * b", "a / b", "a % b"};
    for (int i = 0; i < 4; ++i)
      CHECK(set.mutants[i].source.find(exprs[i]) != std::string::npos);
  }
  SUBCASE("== only flips to !=") {
    MutantSet set = gen(wrap("    boolean f(int a, int b) { return a == b; }\n"),
                        {MutationOperator::RelationalOpReplace});
    REQUIRE(set.mutants.size() == 1);
    CHECK(set.mutants[0].source.find("a != b") != std::string::npos);
  }
  SUBCASE("!= only flips to ==") {
    MutantSet set = gen(wrap("    boolean f(int a, int b) { return a != b; }\n"),
                        {MutationOperator::RelationalOpReplace});
    REQUIRE(set.mutants.size() == 1);
    CHECK(set.mutants[0].source.find("a == b") != std::string::npos);
  }
  SUBCASE("logical connectors swap") {
    MutantSet set = gen(wrap("    boolean f(boolean a, boolean b) { return a && b || a; }\n"),
                        {MutationOperator::LogicalConnectorReplace});
    REQUIRE(set.mutants.size() == 2);
    CHECK(set.mutants[0].source.find("a && b && a") != std::string::npos);
    CHECK(set.mutants[1].source.find("a || b || a") != std::string::npos);
  }
  SUBCASE("empty body yields no mutants") {
    MutantSet set = gen(wrap("    void f() { }\n"), {MutationOperator::RelationalOpReplace,
                                                     MutationOperator::ArithmeticOpReplace,
                                                     MutationOperator::LogicalConnectorReplace,
                                                     MutationOperator::UnaryInsert,
                                                     MutationOperator::LiteralReplace,
                                                     MutationOperator::StatementDelete});
    CHECK(set.mutants.empty());
  }
}

TEST_CASE("literal replacement") {
  SUBCASE("k maps to k+1, k-1, 0") {
    MutantSet set = gen(wrap("    int f() { int x = 2; return x; }\n"),
                        {MutationOperator::LiteralReplace});
    REQUIRE(set.mutants.size() == 3);
    CHECK(set.mutants[0].source.find("int x = 3;") != std::string::npos);
    CHECK(set.mutants[1].source.find("int x = 1;") != std::string::npos);
    CHECK(set.mutants[2].source.find("int x = 0;") != std::string::npos);
  }
  SUBCASE("k = 1 deduplicates k-1 against 0") {
    MutantSet set = gen(wrap("    int f() { int y = 1; return y; }\n"),
                        {MutationOperator::LiteralReplace});
    REQUIRE(set.mutants.size() == 2);
    CHECK(set.mutants[0].source.find("int y = 2;") != std::string::npos);
    CHECK(set.mutants[1].source.find("int y = 0;") != std::string::npos);
  }
  SUBCASE("k = 0 skips the self replacement") {
    MutantSet set = gen(wrap("    int f() { int z = 0; return z; }\n"),
                        {MutationOperator::LiteralReplace});
    REQUIRE(set.mutants.size() == 2);
    CHECK(set.mutants[0].source.find("int z = 1;") != std::string::npos);
    CHECK(set.mutants[1].source.find("int z = -1;") != std::string::npos);
  }
  SUBCASE("booleans negate") {
    MutantSet set = gen(wrap("    boolean f() { return true; }\n"),
                        {MutationOperator::LiteralReplace});
    REQUIRE(set.mutants.size() == 1);
    CHECK(set.mutants[0].source.find("return false;") != std::string::npos);
  }
  SUBCASE("hex and suffixed literals are left alone") {
    MutantSet set = gen(wrap("    long f() { long a = 0x10; long b = 5L; return a + b; }\n"),
                        {MutationOperator::LiteralReplace});
    CHECK(set.mutants.empty());
  }
}

TEST_CASE("unary insertion negates condition positions") {
  std::string src = wrap(
      "    int f(int a) {\n"
      "        int s = 0;\n"
      "        for (int i = 0; i < a; i++) {\n"
      "            s = s + i;\n"
      "        }\n"
      "        while (s > 10) {\n"
      "            s = s - 2;\n"
      "        }\n"
      "        do {\n"
      "            s = s + 1;\n"
      "        } while (s < 5);\n"
      "        if (s == 4) {\n"
      "            s = a > 0 ? s : a;\n"
      "        }\n"
      "        return s;\n"
      "    }\n");
  MutantSet set = gen(src, {MutationOperator::UnaryInsert});
  REQUIRE(set.mutants.size() == 5);
  CHECK(set.mutants[0].source.find("for (int i = 0; !(i < a); i++)") != std::string::npos);
  CHECK(set.mutants[1].source.find("while (!(s > 10))") != std::string::npos);
  CHECK(set.mutants[2].source.find("} while (!(s < 5));") != std::string::npos);
  CHECK(set.mutants[3].source.find("if (!(s == 4))") != std::string::npos);
  CHECK(set.mutants[4].source.find("s = !(a > 0) ? s : a;") != std::string::npos);

  SUBCASE("a for loop without a condition has no site") {
    MutantSet none = gen(wrap("    void f() { for (;;) { break; } }\n"),
                         {MutationOperator::UnaryInsert});
    CHECK(none.mutants.empty());
  }
}

TEST_CASE("statement deletion") {
  std::string src = wrap(
      "    int f(int a) {\n"
      "        int x = 0;\n"
      "        x = x + a;\n"
      "        x = x * 2;\n"
      "        a = a - 1;\n"
      "        return x;\n"
      "    }\n");
  MutantSet set = gen(src, {MutationOperator::StatementDelete});
  REQUIRE(set.mutants.size() == 3);
  const char* removed[] = {"x = x + a;", "x = x * 2;", "a = a - 1;"};
  for (int i = 0; i < 3; ++i) {
    std::size_t at = src.find(removed[i]);
    std::string expected = src.substr(0, at) + src.substr(at + std::string(removed[i]).size());
    CHECK(set.mutants[i].source == expected);
    CHECK(set.mutants[i].op == MutationOperator::StatementDelete);
  }

  SUBCASE("declarations and returns survive") {
    for (const Mutant& m : set.mutants) {
      CHECK(m.source.find("int x = 0;") != std::string::npos);
      CHECK(m.source.find("return x;") != std::string::npos);
    }
  }
  SUBCASE("statements in nested blocks are sites too") {
    MutantSet nested = gen(wrap("    void f(int a) {\n"
                                "        if (a > 0) {\n"
                                "            a = a + 1;\n"
                                "        }\n"
                                "    }\n"),
                           {MutationOperator::StatementDelete});
    REQUIRE(nested.mutants.size() == 2);  // the if itself and its body statement
    CHECK(nested.mutants[0].source.find("if") == std::string::npos);
    CHECK(nested.mutants[1].source.find("a = a + 1;") == std::string::npos);
    CHECK(nested.mutants[1].source.find("if (a > 0)") != std::string::npos);
  }
}

TEST_CASE("every mutant differs from its parent at exactly its site") {
  Corpus corpus = load_corpus(fixtures_dir() / "corpus_small");
  std::size_t total = 0;
  for (const ProgramRecord& rec : corpus.records) {
    MutantSet set = generate_mutants(rec.bare_source, all_mutation_operators(), rec.id);
    if (rec.id == "CountCharac") {
      CHECK(set.mutants.empty());  // a lone delegation call has no mutable site
    } else {
      CHECK(!set.mutants.empty());
    }
    total += set.mutants.size();

    std::unordered_set<std::string> sources;
    for (const Mutant& m : set.mutants) {
      CHECK(sources.insert(m.source).second);
      CHECK(m.source != rec.bare_source);
      CHECK_NOTHROW(parse(m.source));

      std::ptrdiff_t delta = static_cast<std::ptrdiff_t>(m.source.size()) -
                             static_cast<std::ptrdiff_t>(rec.bare_source.size());
      REQUIRE(static_cast<std::ptrdiff_t>(m.site.size()) + delta >= 0);
      std::string repl = m.source.substr(m.site.begin, m.site.size() + delta);
      CHECK(m.source == rec.bare_source.substr(0, m.site.begin) + repl +
                            rec.bare_source.substr(m.site.end));
    }
  }
  CHECK(total > corpus.records.size());
}

TEST_CASE("equivalent mutant suppression") {
  SUBCASE("multiply-by-one and divide-by-one collapse") {
    MutantSet set = gen(wrap("    int f(int x) { return x * 1; }\n"),
                        {MutationOperator::ArithmeticOpReplace});
    REQUIRE(set.mutants.size() == 4);  // +, -, /, %
    MutantSet out = suppress_equivalents(set);
    CHECK(!out.mutants[0].suppressed);  // x + 1
    CHECK(!out.mutants[1].suppressed);  // x - 1
    CHECK(out.mutants[2].suppressed);   // x / 1 == x
    CHECK(!out.mutants[3].suppressed);  // x % 1
  }
  SUBCASE("plus-zero and minus-zero collapse") {
    MutantSet set = gen(wrap("    int f(int x) { return x + 0; }\n"),
                        {MutationOperator::ArithmeticOpReplace});
    REQUIRE(set.mutants.size() == 4);  // -, *, /, %
    MutantSet out = suppress_equivalents(set);
    CHECK(out.mutants[0].suppressed);   // x - 0 == x
    CHECK(!out.mutants[1].suppressed);  // x * 0
    CHECK(!out.mutants[2].suppressed);  // x / 0
    CHECK(!out.mutants[3].suppressed);  // x % 0
  }
  SUBCASE("relational flips are never equivalent") {
    MutantSet out = suppress_equivalents(generate_mutants(kMaximum, all_mutation_operators(), "Maximum"));
    for (const Mutant& m : out.mutants) CHECK(!m.suppressed);
  }
  SUBCASE("planted commutative swap is caught") {
    MutantSet set = gen(wrap("    int f(int a, int b) { return a + b; }\n"), {});
    set.mutants.push_back(plant(set, "a + b", "b + a"));
    MutantSet out = suppress_equivalents(set);
    CHECK(out.mutants[0].suppressed);
  }
  SUBCASE("swapped calls are kept because of side effects") {
    MutantSet set = gen(wrap("    int f() { return f() + g(); }\n    int g() { return 1; }\n"), {});
    set.mutants.push_back(plant(set, "f() + g()", "g() + f()"));
    MutantSet out = suppress_equivalents(set);
    CHECK(!out.mutants[0].suppressed);
  }
  SUBCASE("whitespace-only and parenthesis-only changes are caught") {
    MutantSet set = gen(wrap("    int f(int x) { return x; }\n"), {});
    set.mutants.push_back(plant(set, "int f", "int  f"));
    set.mutants.push_back(plant(set, "return x;", "return (x);"));
    MutantSet out = suppress_equivalents(set);
    CHECK(out.mutants[0].suppressed);
    CHECK(out.mutants[1].suppressed);
  }
}

TEST_CASE("planted equivalents across the corpus are the only suppressions") {
  Corpus corpus = load_corpus(fixtures_dir() / "corpus_small");
  for (const ProgramRecord& rec : corpus.records) {
    MutantSet set = generate_mutants(rec.bare_source, all_mutation_operators(), rec.id);
    MutantSet out = suppress_equivalents(set);
    for (const Mutant& m : out.mutants) CHECK(!m.suppressed);
  }

  const ProgramRecord* fig1 = corpus.find("TheMaximumAchievableX");
  REQUIRE(fig1 != nullptr);
  MutantSet set = generate_mutants(fig1->bare_source, all_mutation_operators(), fig1->id);
  std::size_t planted_at = set.mutants.size();
  set.mutants.push_back(plant(set, "int res = num;", "int  res = num;"));
  set.mutants.push_back(plant(set, "res + 2", "2 + res"));
  set.mutants.push_back(plant(set, "return res;", "return (res);"));

  MutantSet out = suppress_equivalents(set);
  std::size_t suppressed = 0;
  for (std::size_t i = 0; i < out.mutants.size(); ++i) {
    if (out.mutants[i].suppressed) ++suppressed;
    CHECK(out.mutants[i].suppressed == (i >= planted_at));
  }
  CHECK(suppressed == 3);
}

TEST_CASE("completeness inputs pair mutants with the unchanged annotations") {
  StrippedProgram sp = strip_annotations_source(kFig1);
  SpecifiedProgram spec = embed_annotations(sp.bare, sp.index, "fig1");
  REQUIRE(spec.source == kFig1);

  MutantSet set = generate_mutants(sp.bare, {MutationOperator::RelationalOpReplace}, "fig1");
  REQUIRE(set.mutants.size() == 5);  // i <= t is the only relational site

  CompletenessInputs ci = completeness_inputs(spec, set);
  CHECK(ci.skipped.empty());
  REQUIRE(ci.pairs.size() == 5);

  CHECK(ci.pairs[0].second.source.find("for (int i = 1; i < t; i++)") != std::string::npos);
  for (std::size_t i = 0; i < ci.pairs.size(); ++i) {
    const SpecifiedProgram& paired = ci.pairs[i].second;
    CHECK(paired.base_id == "fig1_m" + std::to_string(i));
    StrippedProgram back = strip_annotations(paired);
    CHECK(back.bare == ci.pairs[i].first.source);
    REQUIRE(back.index.entries.size() == sp.index.entries.size());
    for (std::size_t e = 0; e < back.index.entries.size(); ++e)
      CHECK(back.index.entries[e].text == sp.index.entries[e].text);
  }
}

TEST_CASE("statement deletion over an anchor is reported, not paired") {
  std::string annotated = wrap(
      "    int f(int x) {\n"
      "        x = x - 1;\n"
      "        //@ assert x >= 0;\n"
      "        x = x + 1;\n"
      "        return x;\n"
      "    }\n");
  StrippedProgram sp = strip_annotations_source(annotated);
  SpecifiedProgram spec = embed_annotations(sp.bare, sp.index, "del");
  MutantSet set = generate_mutants(sp.bare, {MutationOperator::StatementDelete}, "del");
  REQUIRE(set.mutants.size() == 2);

  CompletenessInputs ci = completeness_inputs(spec, set);
  REQUIRE(ci.pairs.size() == 1);
  REQUIRE(ci.skipped.size() == 1);
  CHECK(ci.skipped[0] == "del_m1");
  CHECK(ci.pairs[0].first.source.find("x = x - 1;") == std::string::npos);
  CHECK(ci.pairs[0].second.source.find("//@ assert x >= 0;") != std::string::npos);
  StrippedProgram back = strip_annotations(ci.pairs[0].second);
  CHECK(back.bare == ci.pairs[0].first.source);

  SUBCASE("suppressed mutants are excluded silently") {
    set.mutants[0].suppressed = true;
    CompletenessInputs rest = completeness_inputs(spec, set);
    CHECK(rest.pairs.empty());
    REQUIRE(rest.skipped.size() == 1);
    CHECK(rest.skipped[0] == "del_m1");
  }
}

TEST_CASE("completeness inputs reject a foreign specification") {
  StrippedProgram sp = strip_annotations_source(kFig1);
  SpecifiedProgram spec = embed_annotations(sp.bare, sp.index, "fig1");
  MutantSet other = generate_mutants(kMaximum, all_mutation_operators(), "Maximum");
  CHECK_THROWS_AS(completeness_inputs(spec, other), std::invalid_argument);
}

TEST_CASE("mutant sets round-trip through the export directory") {
  MutantSet set = generate_mutants(kMaximum, all_mutation_operators(), "Maximum");
  set = suppress_equivalents(set);
  TempDir tmp;
  save_mutants(set, tmp.path());

  for (std::size_t i = 0; i < set.mutants.size(); ++i) {
    std::string id = mutant_id(set, i);
    CHECK(id == "Maximum_m" + std::to_string(i));
    CHECK(slurp(tmp.path() / (id + ".java")) == set.mutants[i].source);
  }

  std::string csv = slurp(tmp.path() / "mutants.csv");
  CHECK(csv.find("id,parent_id,operator,site_begin,site_end,suppressed") == 0);
  std::string src(kMaximum);
  std::size_t op_at = src.find(" > ") + 1;
  std::string first_row = "Maximum_m0,Maximum,RelationalOpReplace," + std::to_string(op_at) + "," +
                          std::to_string(op_at + 1) + ",0";
  CHECK(csv.find(first_row) != std::string::npos);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == static_cast<std::ptrdiff_t>(set.mutants.size() + 1));
}
