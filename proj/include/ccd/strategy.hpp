#pragma once

// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 the conflict-decode authors

/**
 * @file strategy.hpp
 * @brief Per-step decoding strategies: greedy, CAD, AdaCAD, ConfCD, COIECD.
 *
 * Every strategy reduces to the same shape: given the with-context and
 * without-context next-token distributions, pick a per-step adjustment weight
 * (or a branch, for COIECD), form the final distribution, and select its
 * argmax. Token selection is greedy for all strategies; the per-step
 * Jensen-Shannon divergence is recorded in the trace regardless of strategy
 * so downstream analyses can use it.
 */

#include <string>
#include <utility>

#include "ccd/distribution.hpp"

namespace ccd {

enum class DecodeKind { Greedy, Cad, AdaCad, ConfCd, Coiecd };

/// Tagged decoding configuration. Fields irrelevant to the selected kind are
/// ignored (e.g. cad_alpha for greedy).
struct DecodeStrategy {
  DecodeKind kind = DecodeKind::Greedy;
  double cad_alpha = 1.0;       // Cad; fixed exponent, >= 0
  double warmup_lambda = 0.0;   // AdaCad; floor on the JSD alpha, in [0, 1]
  double coiecd_lambda = 0.25;  // Coiecd; typical-set threshold, in (0, 1)
  double coiecd_alpha = 1.0;    // Coiecd; exponent on the conflict branch
  int max_tokens = 16;
  TokenId stop_token = 1;

  /// Throws BadHyperparameter when a field is outside its documented range.
  void validate() const;

  /// Parse a CLI descriptor: "greedy", "cad:alpha=0.5",
  /// "adacad:lambda=0.3", "coiecd:lambda=0.25,alpha=1", "confcd".
  /// Optional common keys: max_tokens, stop_token. `base` supplies defaults
  /// for fields the descriptor leaves unset.
  static DecodeStrategy parse(const std::string& descriptor,
                              const DecodeStrategy& base = {});

  /// Short stable name used for result files and report rows.
  std::string name() const;
};

/// Per-token decode record. p_final is always a valid distribution; for
/// AdaCAD, alpha_used == max(jsd_value, warmup_lambda).
struct StepTrace {
  int step_index = 0;
  TokenDistribution p_ctx;
  TokenDistribution p_noctx;
  TokenDistribution p_final;
  double alpha_used = 0.0;
  double jsd_value = 0.0;
  TokenId chosen_token = 0;
};

/// AdaCAD weight: max(JSD(p_noctx || p_ctx), warmup_lambda), in [0, 1].
Alpha alpha_adacad(const TokenDistribution& p_ctx,
                   const TokenDistribution& p_noctx, double warmup_lambda);

/// ConfCD weight from model confidence: with C_R = max p_ctx and
/// C = max p_noctx, returns C_R when C_R > C, else 1 - C.
Alpha alpha_confcd(const TokenDistribution& p_ctx,
                   const TokenDistribution& p_noctx);

/// COIECD-style step. A step is classified as conflicting when the
/// information content of p_ctx's argmax under p_noctx exceeds the entropy
/// of p_noctx, i.e. -log2 p_noctx(y_hat) > H2(p_noctx). Conflicting steps
/// return contrastive_combine(p_ctx, p_noctx, alpha); non-conflicting steps
/// return p_ctx restricted to tokens with probability >= lambda * max(p_ctx)
/// and renormalized.
std::pair<TokenDistribution, bool> step_coiecd(const TokenDistribution& p_ctx,
                                               const TokenDistribution& p_noctx,
                                               double lambda, double alpha);

/// One decoding step under `strategy`. chosen_token is the argmax of p_final
/// with lowest-id tie-breaking.
StepTrace decode_step(const DecodeStrategy& strategy,
                      const TokenDistribution& p_ctx,
                      const TokenDistribution& p_noctx);

}  // namespace ccd
