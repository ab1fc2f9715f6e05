// naturalness.hpp - Cross-entropy naturalness scoring and construction of
// the variant corpora (all applicable variants, and the more natural half).
#pragma once

#include <map>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "jmlbench/corpus.hpp"
#include "jmlbench/transforms.hpp"

namespace jmlbench {

class ScorerFailure : public std::runtime_error {
public:
  explicit ScorerFailure(const std::string& what) : std::runtime_error(what) {}
};

// Token-level cross-entropy of a source text, in bits per token.
class LanguageModelScorer {
public:
  virtual ~LanguageModelScorer() = default;
  virtual double entropy(const std::string& source) const = 0;
};

// Order-3 token n-gram model with add-one smoothing. Comments (including
// specification annotations) are trivia to the lexer and never scored, so
// annotated and bare sources of the same program score identically.
class NgramScorer : public LanguageModelScorer {
public:
  static constexpr int kOrder = 3;

  // Trains on the given sources; throws ScorerFailure when they contain no
  // tokens at all.
  explicit NgramScorer(const std::vector<std::string>& training_sources);
  explicit NgramScorer(const Corpus& corpus);

  // Bits per token; throws ScorerFailure on token-free input.
  double entropy(const std::string& source) const override;

private:
  std::vector<uint32_t> token_ids(const std::string& source) const;

  std::unordered_map<std::string, uint32_t> vocab_;
  std::unordered_map<uint64_t, uint32_t> context_counts_;
  std::unordered_map<uint64_t, uint32_t> ngram_counts_;
  std::size_t smoothing_classes_ = 0;  // vocabulary size plus the unseen class
};

// Relative change in cross-entropy between a program and a variant of it.
// Lower is more natural; identical texts score exactly zero.
struct NaturalnessScore {
  double value = 0.0;
};

NaturalnessScore naturalness(const std::string& original, const std::string& variant,
                             const LanguageModelScorer& scorer);

struct DiverseBuild {
  Corpus diverse;    // every applicable variant of every record
  Corpus diverse_n;  // the better-scoring half, parents with >= 3 survivors
  std::map<std::string, double> scores;  // variant id -> naturalness vs parent
};

// Applies all transforms to every record and splits the result per the
// selection rule. Variant ids are "<parent>__<transform>".
DiverseBuild build_diverse(const Corpus& corpus, const LanguageModelScorer& scorer);

// One row per record: id plus a 0/1 column for each transform.
std::string applicability_csv(const Corpus& corpus);

}  // namespace jmlbench
