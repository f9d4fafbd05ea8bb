#pragma once

// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 the conflict-decode authors

/**
 * @file ngram.hpp
 * @brief Add-k smoothed n-gram model with context-as-evidence conditioning.
 *
 * The trained count tables are the parametric knowledge: a conditional for
 * history h is (count(h,y) + k) / (total(h) + k*V); unseen histories back off
 * to the add-k smoothed unigram.
 *
 * The with-context conditional treats the context segment as fresh evidence
 * on top of the trained counts, mirroring how a prompt-prepended passage
 * shifts a causal LM:
 *   - each sliding window inside the context adds `window_weight * decay^i`
 *     pseudo-observations to its history's count table (the earliest window,
 *     the fact pattern itself, carries the most weight);
 *   - every distinct context token receives a flat `presence_weight` boost
 *     at every history (the copy bias: tokens appearing in the context are
 *     globally more available).
 * The no-context conditional uses trained counts only, so the pair of
 * conditionals realizes the two sides of the contrastive comparison.
 */

#include <filesystem>
#include <map>
#include <vector>

#include "ccd/lm_source.hpp"

namespace ccd::lm {

struct NgramOptions {
  int order = 3;
  double add_k = 0.1;
};

struct ContextAbsorption {
  double window_weight = 70.0;
  double window_decay = 0.35;
  double presence_weight = 0.85;
};

class NgramModel {
 public:
  using CountTable = std::map<TokenId, double>;

  /// Accumulates sliding-window counts over every sequence. Sequences are
  /// sentinel-wrapped first (BOS prepended / EOS appended when missing), and
  /// histories shorter than order-1 are left-padded with BOS.
  static NgramModel train(const std::vector<TokenIds>& corpus,
                          const Vocabulary& vocab, NgramOptions options = {});

  int order() const { return options_.order; }
  double add_k() const { return options_.add_k; }
  const Vocabulary& vocab() const { return vocab_; }

  /// Trained count table for a history, or nullptr when unseen.
  const CountTable* history_counts(const TokenIds& history) const;

  double history_total(const TokenIds& history) const;

  const CountTable& unigram_counts() const { return unigram_; }
  double unigram_total() const { return unigram_total_; }

  /// The history used for a conditioning sequence: its last order-1 tokens,
  /// BOS-padded on the left. An empty conditioning sequence yields an empty
  /// history, which is unseen for order >= 2 and falls back to the unigram.
  TokenIds history_of(const TokenIds& conditioning) const;

  /// No-context conditional (trained counts only, add-k smoothed).
  TokenDistribution conditional(const TokenIds& conditioning) const;

  void save(const std::filesystem::path& file) const;
  static NgramModel load(const std::filesystem::path& file);

 private:
  NgramModel(NgramOptions options, Vocabulary vocab)
      : options_(options), vocab_(std::move(vocab)) {}

  friend class NgramSource;

  NgramOptions options_;
  Vocabulary vocab_;
  std::map<TokenIds, CountTable> counts_;
  std::map<TokenIds, double> totals_;
  CountTable unigram_;
  double unigram_total_ = 0.0;
};

class NgramSource final : public LmSource {
 public:
  explicit NgramSource(NgramModel model, ContextAbsorption absorption = {});

  const Vocabulary& vocab() const override { return model_.vocab(); }

  TokenDistribution next_distribution(const std::optional<TokenIds>& context,
                                      const TokenIds& query,
                                      const TokenIds& prefix) const override;

  const NgramModel& model() const { return model_; }
  const ContextAbsorption& absorption() const { return absorption_; }

 private:
  NgramModel model_;
  ContextAbsorption absorption_;
};

}  // namespace ccd::lm
