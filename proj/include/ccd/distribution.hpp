#pragma once

// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 the conflict-decode authors

/**
 * @file distribution.hpp
 * @brief Probability-distribution algebra over a fixed token vocabulary.
 *
 * TokenDistribution stores natural-log probabilities and is immutable after
 * construction; every operation returns a fresh, renormalized distribution.
 * Divergences (KL, JSD) and entropy are reported in bits so that JSD lands
 * in [0, 1]. Before any divergence or contrastive combination, probabilities
 * below kProbFloor are clamped to the floor and renormalized: the PMI ratio
 * and KL's log are undefined at exact-zero mass.
 *
 * Tie-breaking for argmax and top-k is always by lowest token id, which keeps
 * golden tests and replayed runs deterministic.
 */

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "ccd/errors.hpp"

namespace ccd {

using TokenId = std::int32_t;

/// Probability floor applied before KL/JSD/contrastive combination.
inline constexpr double kProbFloor = 1e-12;

/// Tolerance on |sum(exp(log_probs)) - 1| after any operation.
inline constexpr double kNormalizationTolerance = 1e-9;

class TokenDistribution {
 public:
  /// Log-softmax over raw logits. Throws NonFiniteLogit on NaN/inf entries
  /// and VocabTooSmall when fewer than two entries are given.
  static TokenDistribution from_logits(std::span<const double> logits);

  /// Build from (approximately normalized) probabilities: entries are floored
  /// at kProbFloor, renormalized, and stored in log space. Point masses such
  /// as (1, 0) are therefore representable with finite log-probabilities.
  static TokenDistribution from_probs(std::span<const double> probs);

  int vocab_size() const { return static_cast<int>(log_probs_.size()); }

  double log_prob(TokenId id) const {
    return log_probs_[static_cast<std::size_t>(id)];
  }

  double prob(TokenId id) const;

  const std::vector<double>& log_probs() const { return log_probs_; }

  std::vector<double> probs() const;

  /// Highest-probability token id; ties resolve to the lowest id.
  TokenId argmax() const;

  double max_prob() const;

 private:
  explicit TokenDistribution(std::vector<double> log_probs)
      : log_probs_(std::move(log_probs)) {}

  std::vector<double> log_probs_;
};

struct Alpha {
  explicit Alpha(double v);
  double value;
};

/// KL(p || m) in bits. Requires matching vocabularies; inputs are floored
/// first, so m carries mass wherever p does. 0*log(0) is treated as 0.
double kl_divergence(const TokenDistribution& p, const TokenDistribution& m);

/// Jensen-Shannon divergence in bits, in [0, 1]. Symmetric bit-exactly: the
/// mixture and the two KL terms are combined with commutative additions only.
double jsd(const TokenDistribution& p, const TokenDistribution& q);

/// Shannon entropy in bits.
double entropy_bits(const TokenDistribution& p);

/// Contrastive reweighting: result proportional to
/// p_ctx * (p_ctx / p_noctx)^alpha, computed in log space as
/// (1 + alpha) * log p_ctx - alpha * log p_noctx followed by log-softmax.
/// alpha = 0 returns p_ctx (up to flooring); alpha may exceed 1.
TokenDistribution contrastive_combine(const TokenDistribution& p_ctx,
                                      const TokenDistribution& p_noctx,
                                      Alpha alpha);

/// Top k (token id, probability) pairs, descending by probability, ties by
/// ascending token id. Throws KOutOfRange unless 1 <= k <= vocab_size.
std::vector<std::pair<TokenId, double>> top_k(const TokenDistribution& p,
                                              int k);

}  // namespace ccd
