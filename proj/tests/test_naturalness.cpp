#include <doctest.h>

#include <cmath>

#include "jmlbench/naturalness.hpp"
#include "support.hpp"

using namespace jmlbench;

namespace {

const char* kLoopProgram =
    "class TheMaximumAchievableX {\n"
    "    int maximumAchievableX(int num, int t) {\n"
    "        int res = num;\n"
    "        for (int i = 1; i <= t; i++) {\n"
    "            res = res + 2;\n"
    "        }\n"
    "        return res;\n"
    "    }\n"
    "}\n";

struct ConstantScorer : LanguageModelScorer {
  double entropy(const std::string&) const override { return 1.0; }
};

ProgramRecord make_record(std::string id, std::string source) {
  ProgramRecord rec;
  rec.id = std::move(id);
  rec.bare_source = std::move(source);
  rec.intent = "synthetic";
  rec.cfc = classify_control_flow(rec.bare_source);
  return rec;
}

}  // namespace

TEST_CASE("trigram entropy matches the add-one smoothing arithmetic") {
  NgramScorer scorer({"a = b ;"});

  // every prediction P = (1+1)/(1+5): entropy is log2(3) bits per token
  CHECK(scorer.entropy("a = b ;") == doctest::Approx(1.5849625007).epsilon(1e-9));

  // an unseen first token degrades the first three contexts:
  // 1/6, 1/5, 1/5, then the intact 1/3
  CHECK(scorer.entropy("x = b ;") == doctest::Approx(2.2034452978).epsilon(1e-9));

  SUBCASE("the relative change follows from the two entropies") {
    NaturalnessScore n = naturalness("a = b ;", "x = b ;", scorer);
    CHECK(n.value == doctest::Approx((2.2034452978 - 1.5849625007) / 1.5849625007));
    CHECK(n.value == doctest::Approx(0.3902192).epsilon(1e-5));
  }
  SUBCASE("token-free inputs fail") {
    CHECK_THROWS_AS(scorer.entropy(""), ScorerFailure);
    CHECK_THROWS_AS(scorer.entropy("   \n"), ScorerFailure);
  }
  SUBCASE("a token-free training set fails") {
    CHECK_THROWS_AS(NgramScorer(std::vector<std::string>{"", "  "}), ScorerFailure);
  }
}

TEST_CASE("annotations never influence the score") {
  NgramScorer scorer({kLoopProgram});
  std::string annotated =
      "class TheMaximumAchievableX {\n"
      "    //@ ensures \\result == num + 2*t;\n"
      "    int maximumAchievableX(int num, int t) {\n"
      "        int res = num;\n"
      "        for (int i = 1; i <= t; i++) {\n"
      "            res = res + 2;\n"
      "        }\n"
      "        return res;\n"
      "    }\n"
      "}\n";
  CHECK(scorer.entropy(annotated) == scorer.entropy(kLoopProgram));
}

TEST_CASE("naturalness is zero for identity and positive for unnatural renames") {
  Corpus corpus = load_corpus(testsupport::fixtures_dir() / "corpus_small");
  NgramScorer scorer(corpus);

  CHECK(naturalness(kLoopProgram, kLoopProgram, scorer).value == 0.0);

  TransformOptions options;
  options.rename_provider = [](std::string_view name) -> std::optional<std::string> {
    if (name == "num") return "x1";
    return std::nullopt;
  };
  TransformResult renamed =
      jmlbench::apply(TransformId::VariableRenaming2, std::string(kLoopProgram), options);
  REQUIRE(renamed.applicable);
  double rename_score = naturalness(kLoopProgram, renamed.variant_source, scorer).value;
  CHECK(rename_score > 0.0);
  CHECK(std::isfinite(rename_score));

  SUBCASE("ranking agrees with direct entropy comparison") {
    TransformResult restructured =
        jmlbench::apply(TransformId::For2While, std::string(kLoopProgram));
    REQUIRE(restructured.applicable);
    double other_score = naturalness(kLoopProgram, restructured.variant_source, scorer).value;
    CHECK((rename_score < other_score) ==
          (scorer.entropy(renamed.variant_source) < scorer.entropy(restructured.variant_source)));
  }
}

TEST_CASE("build_diverse produces every applicable variant") {
  Corpus corpus = load_corpus(testsupport::fixtures_dir() / "corpus_small");
  NgramScorer scorer(corpus);
  DiverseBuild build = build_diverse(corpus, scorer);

  std::size_t expected = 0;
  for (const ProgramRecord& rec : corpus.records)
    expected += applicable_transforms(rec.bare_source).size();
  CHECK(build.diverse.records.size() == expected);
  CHECK(build.diverse.meta.name == "corpus_small-diverse");
  CHECK(build.diverse.meta.derived_from == "corpus_small");

  for (const ProgramRecord& rec : build.diverse.records) {
    CHECK(rec.origin.kind == Origin::Kind::Transformed);
    CHECK(corpus.find(rec.origin.parent_id) != nullptr);
    CHECK(rec.id == rec.origin.parent_id + "__" + rec.origin.transform_id);
    CHECK(transform_from_string(rec.origin.transform_id).has_value());
    CHECK(build.scores.count(rec.id) == 1);
    CHECK(std::isfinite(build.scores.at(rec.id)));
    CHECK_NOTHROW(parse(rec.bare_source));
  }

  SUBCASE("the loop fixture contributes exactly its applicable set") {
    std::set<TransformId> expected_fig1 = {
        TransformId::VariableRenaming1, TransformId::VariableRenaming2,
        TransformId::SwitchRelation, TransformId::Unary2Add, TransformId::For2While};
    CHECK(applicable_transforms(corpus.find("TheMaximumAchievableX")->bare_source) ==
          expected_fig1);
  }
  SUBCASE("diverse-n keeps at most half, never a parent below three survivors") {
    CHECK(build.diverse_n.records.size() <= build.diverse.records.size() / 2);
    CHECK(!build.diverse_n.records.empty());
    std::map<std::string, int> per_parent;
    for (const ProgramRecord& rec : build.diverse_n.records) per_parent[rec.origin.parent_id]++;
    for (const auto& [parent, count] : per_parent) CHECK(count >= 3);
  }
  SUBCASE("a derived corpus reloads cleanly without its parents") {
    testsupport::TempDir dir;
    save_corpus(build.diverse, dir.path());
    Corpus reloaded = load_corpus(dir.path());
    CHECK(reloaded == build.diverse);
    CHECK(!reloaded.warnings.empty());  // parents live in the base corpus
  }
}

TEST_CASE("diverse-n selection ranks globally with transform-order ties") {
  Corpus corpus = load_corpus(testsupport::fixtures_dir() / "corpus_small");
  ConstantScorer flat;
  DiverseBuild build = build_diverse(corpus, flat);

  // reference implementation of the selection rule under uniform scores
  struct Cand {
    std::size_t parent, transform;
    std::string id;
  };
  std::vector<Cand> cands;
  const auto& transforms = all_transforms();
  for (std::size_t r = 0; r < corpus.records.size(); ++r)
    for (std::size_t x = 0; x < transforms.size(); ++x)
      if (jmlbench::apply(transforms[x], corpus.records[r].bare_source).applicable)
        cands.push_back({r, x,
                         corpus.records[r].id + "__" + std::string(to_string(transforms[x]))});
  std::vector<std::size_t> order(cands.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (cands[a].transform != cands[b].transform) return cands[a].transform < cands[b].transform;
    return cands[a].parent < cands[b].parent;
  });
  std::set<std::size_t> kept(order.begin(), order.begin() + order.size() / 2);
  std::map<std::size_t, int> survivors;
  for (std::size_t i : kept) survivors[cands[i].parent]++;
  std::vector<std::string> expected_ids;
  for (std::size_t i = 0; i < cands.size(); ++i)
    if (kept.count(i) && survivors[cands[i].parent] >= 3) expected_ids.push_back(cands[i].id);

  std::vector<std::string> actual_ids;
  for (const ProgramRecord& rec : build.diverse_n.records) actual_ids.push_back(rec.id);
  CHECK(actual_ids == expected_ids);
}

TEST_CASE("parents with fewer than three survivors drop out") {
  Corpus corpus;
  corpus.meta.name = "tiny";
  corpus.records.push_back(make_record("P1",
                                       "class P1 {\n"
                                       "    int m(int num, int t) {\n"
                                       "        int res = num;\n"
                                       "        int x = 0;\n"
                                       "        int y = 0;\n"
                                       "        for (int i = 1; i <= t; i++) {\n"
                                       "            res = res + 2;\n"
                                       "        }\n"
                                       "        return res + x + y;\n"
                                       "    }\n"
                                       "}\n"));
  corpus.records.push_back(
      make_record("P2", "class P2 {\n    int m(int number) { return number; }\n}\n"));
  for (const ProgramRecord& rec : corpus.records) corpus.meta.counts[rec.cfc]++;

  // applicability by construction: P1 gets eight transforms, P2 exactly two
  CHECK(applicable_transforms(corpus.records[0].bare_source).size() == 8);
  CHECK(applicable_transforms(corpus.records[1].bare_source) ==
        std::set<TransformId>{TransformId::VariableRenaming1, TransformId::VariableRenaming2});

  ConstantScorer flat;
  DiverseBuild build = build_diverse(corpus, flat);
  CHECK(build.diverse.records.size() == 10);

  // the kept half is P1 x {VariableRenaming1, VariableRenaming2, SwitchRelation}
  // plus P2 x both renamings; P2's two survivors fall to the threshold
  std::vector<std::string> ids;
  for (const ProgramRecord& rec : build.diverse_n.records) ids.push_back(rec.id);
  CHECK(ids == std::vector<std::string>{"P1__VariableRenaming1", "P1__VariableRenaming2",
                                        "P1__SwitchRelation"});
}

TEST_CASE("applicability matrix lists one row per record") {
  Corpus corpus = load_corpus(testsupport::fixtures_dir() / "corpus_small");
  std::string csv = applicability_csv(corpus);

  std::vector<std::string> lines;
  std::size_t start = 0;
  while (start < csv.size()) {
    std::size_t nl = csv.find('\n', start);
    lines.push_back(csv.substr(start, nl - start));
    start = nl + 1;
  }
  REQUIRE(lines.size() == corpus.records.size() + 1);
  CHECK(lines[0] == "id,VariableRenaming1,VariableRenaming2,SwitchRelation,Unary2Add,"
                    "Add2Equal,MergeVarDecl,InfixDividing,SwitchEqualExp,SwitchStringEqual,"
                    "For2While,While2For,ElseIf2If,Switch2If,SwapStatement,ReverseIf,"
                    "If2CondExp,CondExp2If,DividingComposedIf");

  // each data row agrees with applicable_transforms
  for (std::size_t i = 0; i < corpus.records.size(); ++i) {
    const ProgramRecord& rec = corpus.records[i];
    std::set<TransformId> expected = applicable_transforms(rec.bare_source);
    std::string row = rec.id;
    for (TransformId id : all_transforms()) row += expected.count(id) ? ",1" : ",0";
    CHECK(lines[i + 1] == row);
  }
}
