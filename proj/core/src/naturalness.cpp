#include "jmlbench/naturalness.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace jmlbench {

namespace {

constexpr uint32_t kUnseen = 0;
constexpr uint32_t kBos = 1;
constexpr uint32_t kFirstTokenId = 2;

std::vector<std::string> lex_token_texts(const std::string& source) {
  std::vector<std::string> out;
  for (const Token& tok : lex(source)) {
    if (is_trivia(tok.kind) || tok.kind == TokenKind::End) continue;
    out.push_back(source.substr(tok.span.begin, tok.span.size()));
  }
  return out;
}

uint64_t context_key(uint32_t a, uint32_t b) {
  return (static_cast<uint64_t>(a) << 21) | b;
}

uint64_t ngram_key(uint32_t a, uint32_t b, uint32_t c) {
  return (static_cast<uint64_t>(a) << 42) | (static_cast<uint64_t>(b) << 21) | c;
}

}  // namespace

NgramScorer::NgramScorer(const std::vector<std::string>& training_sources) {
  uint32_t next_id = kFirstTokenId;
  std::size_t trained_tokens = 0;
  for (const std::string& src : training_sources) {
    std::vector<std::string> texts = lex_token_texts(src);
    trained_tokens += texts.size();
    std::vector<uint32_t> ids = {kBos, kBos};
    for (const std::string& text : texts) {
      auto [it, inserted] = vocab_.emplace(text, next_id);
      if (inserted) ++next_id;
      ids.push_back(it->second);
    }
    for (std::size_t i = 2; i < ids.size(); ++i) {
      context_counts_[context_key(ids[i - 2], ids[i - 1])]++;
      ngram_counts_[ngram_key(ids[i - 2], ids[i - 1], ids[i])]++;
    }
  }
  if (trained_tokens == 0)
    throw ScorerFailure("scorer training set contains no tokens");
  smoothing_classes_ = vocab_.size() + 1;  // every unseen token shares one class
}

NgramScorer::NgramScorer(const Corpus& corpus)
    : NgramScorer([&] {
        std::vector<std::string> sources;
        sources.reserve(corpus.records.size());
        for (const ProgramRecord& rec : corpus.records) sources.push_back(rec.bare_source);
        return sources;
      }()) {}

std::vector<uint32_t> NgramScorer::token_ids(const std::string& source) const {
  std::vector<uint32_t> ids = {kBos, kBos};
  for (const std::string& text : lex_token_texts(source)) {
    auto it = vocab_.find(text);
    ids.push_back(it == vocab_.end() ? kUnseen : it->second);
  }
  return ids;
}

double NgramScorer::entropy(const std::string& source) const {
  std::vector<uint32_t> ids = token_ids(source);
  std::size_t n = ids.size() - 2;
  if (n == 0) throw ScorerFailure("cannot score a token-free text");

  double bits = 0.0;
  for (std::size_t i = 2; i < ids.size(); ++i) {
    auto ctx = context_counts_.find(context_key(ids[i - 2], ids[i - 1]));
    auto ngram = ngram_counts_.find(ngram_key(ids[i - 2], ids[i - 1], ids[i]));
    double seen_context = ctx == context_counts_.end() ? 0.0 : ctx->second;
    double seen_ngram = ngram == ngram_counts_.end() ? 0.0 : ngram->second;
    double p = (seen_ngram + 1.0) / (seen_context + static_cast<double>(smoothing_classes_));
    bits -= std::log2(p);
  }
  return bits / static_cast<double>(n);
}

NaturalnessScore naturalness(const std::string& original, const std::string& variant,
                             const LanguageModelScorer& scorer) {
  if (original == variant) return {0.0};
  double h_original = scorer.entropy(original);
  double h_variant = scorer.entropy(variant);
  if (h_original == 0.0) throw ScorerFailure("original scores zero entropy");
  return {(h_variant - h_original) / h_original};
}

DiverseBuild build_diverse(const Corpus& corpus, const LanguageModelScorer& scorer) {
  struct Candidate {
    std::size_t parent_index;
    std::size_t transform_index;
    ProgramRecord record;
    double score;
  };
  std::vector<Candidate> candidates;

  const std::vector<TransformId>& transforms = all_transforms();
  for (std::size_t r = 0; r < corpus.records.size(); ++r) {
    const ProgramRecord& parent = corpus.records[r];
    for (std::size_t x = 0; x < transforms.size(); ++x) {
      TransformResult result = apply(transforms[x], parent.bare_source);
      if (!result.applicable) continue;
      ProgramRecord variant;
      variant.id = parent.id + "__" + std::string(to_string(transforms[x]));
      variant.bare_source = result.variant_source;
      variant.intent = parent.intent;
      variant.cfc = classify_control_flow(variant.bare_source);
      variant.origin = {Origin::Kind::Transformed, parent.id,
                        std::string(to_string(transforms[x]))};
      double score = naturalness(parent.bare_source, variant.bare_source, scorer).value;
      candidates.push_back({r, x, std::move(variant), score});
    }
  }

  DiverseBuild out;
  out.diverse.meta.name = corpus.meta.name + "-diverse";
  out.diverse.meta.version = corpus.meta.version;
  out.diverse.meta.derived_from = corpus.meta.name;
  for (const Candidate& c : candidates) {
    out.diverse.records.push_back(c.record);
    out.diverse.meta.counts[c.record.cfc]++;
    out.scores[c.record.id] = c.score;
  }

  // better half by score; ties resolved by transform declaration order,
  // then by record order
  std::vector<std::size_t> order(candidates.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    const Candidate& ca = candidates[a];
    const Candidate& cb = candidates[b];
    if (ca.score != cb.score) return ca.score < cb.score;
    if (ca.transform_index != cb.transform_index) return ca.transform_index < cb.transform_index;
    return ca.parent_index < cb.parent_index;
  });
  std::vector<bool> kept(candidates.size(), false);
  std::map<std::size_t, std::size_t> survivors_per_parent;
  for (std::size_t i = 0; i < candidates.size() / 2; ++i) {
    kept[order[i]] = true;
    survivors_per_parent[candidates[order[i]].parent_index]++;
  }

  out.diverse_n.meta.name = corpus.meta.name + "-diverse-n";
  out.diverse_n.meta.version = corpus.meta.version;
  out.diverse_n.meta.derived_from = corpus.meta.name;
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    if (!kept[i]) continue;
    if (survivors_per_parent[candidates[i].parent_index] < 3) continue;
    out.diverse_n.records.push_back(candidates[i].record);
    out.diverse_n.meta.counts[candidates[i].record.cfc]++;
  }
  return out;
}

std::string applicability_csv(const Corpus& corpus) {
  std::string csv = "id";
  for (TransformId id : all_transforms()) {
    csv += ",";
    csv += std::string(to_string(id));
  }
  csv += "\n";
  for (const ProgramRecord& rec : corpus.records) {
    std::set<TransformId> applicable = applicable_transforms(rec.bare_source);
    csv += rec.id;
    for (TransformId id : all_transforms()) csv += applicable.count(id) ? ",1" : ",0";
    csv += "\n";
  }
  return csv;
}

}  // namespace jmlbench
