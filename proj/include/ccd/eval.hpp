#pragma once

// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 the conflict-decode authors

/**
 * @file eval.hpp
 * @brief Metrics over decoding runs: exact match, top-k Spearman rank
 *        correlation against the base distribution, and conflict sensitivity.
 *
 * The rank correlation is measured over the top-k token ids of the base
 * (with-context) distribution; ties receive average ranks. Per-step values
 * are averaged over steps within an instance, then over instances within a
 * label. Sensitivity is |rho(SWAP) - rho(SYNTH)| and is reported only when
 * both splits are present.
 */

#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ccd/bench.hpp"
#include "ccd/distribution.hpp"

namespace ccd::eval {

/// True iff the emitted tokens are exactly the single gold token.
/// Answers are single closed-vocabulary tokens, so equality is by token id.
bool exact_match(std::span<const TokenId> emitted, TokenId gold);

/// Spearman rank correlation between p_base and p_adj over the top-k ids of
/// p_base (default k = 20). Average ranks for ties; if both rank vectors are
/// constant the correlation is 1 by convention (identical degenerate
/// rankings), and 0 if exactly one is constant.
double spearman_topk(const TokenDistribution& p_base,
                     const TokenDistribution& p_adj, int k = 20);

/// |rho_conflict - rho_noconflict|; both inputs must lie in [-1, 1].
double sensitivity(double rho_conflict, double rho_noconflict);

/// Per-instance outcome of one strategy run.
struct InstanceRecord {
  std::string instance_id;
  bench::Label label = bench::Label::Original;
  std::vector<TokenId> emitted;
  bool correct = false;
  double alpha_max = 0.0;
  double mean_jsd = 0.0;
  std::vector<double> rho_per_step;
};

struct LabelStats {
  int n = 0;
  double accuracy = 0.0;
  double mean_alpha_max = 0.0;
  double mean_rho = 0.0;
};

struct Aggregates {
  std::map<std::string, LabelStats> per_label;  // key: label name
  LabelStats overall;
  std::optional<double> sensitivity;  // needs both SWAP and SYNTH splits
};

/// Throws EmptyRun on an empty record list.
Aggregates aggregate(const std::vector<InstanceRecord>& records);

}  // namespace ccd::eval
