// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 the conflict-decode authors

#include "ccd/eval.hpp"

#include <algorithm>
#include <cmath>

namespace ccd::eval {

namespace {

/// Average ("fractional") ranks, 1-based, ties share the mean rank.
std::vector<double> average_ranks(const std::vector<double>& values) {
  const std::size_t n = values.size();
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) {
                     return values[a] > values[b];
                   });
  std::vector<double> ranks(n, 0.0);
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j + 1 < n && values[order[j + 1]] == values[order[i]]) ++j;
    const double shared = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t t = i; t <= j; ++t) ranks[order[t]] = shared;
    i = j + 1;
  }
  return ranks;
}

double pearson(const std::vector<double>& xs, const std::vector<double>& ys) {
  const double n = static_cast<double>(xs.size());
  double mean_x = 0.0, mean_y = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    mean_x += xs[i];
    mean_y += ys[i];
  }
  mean_x /= n;
  mean_y /= n;
  double cov = 0.0, var_x = 0.0, var_y = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double dx = xs[i] - mean_x;
    const double dy = ys[i] - mean_y;
    cov += dx * dy;
    var_x += dx * dx;
    var_y += dy * dy;
  }
  if (var_x == 0.0 && var_y == 0.0) return 1.0;  // identical constant ranks
  if (var_x == 0.0 || var_y == 0.0) return 0.0;
  return std::clamp(cov / std::sqrt(var_x * var_y), -1.0, 1.0);
}

}  // namespace

bool exact_match(std::span<const TokenId> emitted, TokenId gold) {
  return emitted.size() == 1 && emitted[0] == gold;
}

double spearman_topk(const TokenDistribution& p_base,
                     const TokenDistribution& p_adj, int k) {
  if (p_base.vocab_size() != p_adj.vocab_size()) {
    throw VocabMismatch("spearman_topk: vocab sizes differ");
  }
  if (k < 1 || k > p_base.vocab_size()) {
    throw KOutOfRange("spearman_topk: k=" + std::to_string(k) +
                      " outside [1, " + std::to_string(p_base.vocab_size()) +
                      "]");
  }
  const auto head = top_k(p_base, k);
  std::vector<double> base_probs, adj_probs;
  base_probs.reserve(head.size());
  adj_probs.reserve(head.size());
  for (const auto& [id, prob] : head) {
    base_probs.push_back(prob);
    adj_probs.push_back(p_adj.prob(id));
  }
  return pearson(average_ranks(base_probs), average_ranks(adj_probs));
}

double sensitivity(double rho_conflict, double rho_noconflict) {
  if (rho_conflict < -1.0 || rho_conflict > 1.0 || rho_noconflict < -1.0 ||
      rho_noconflict > 1.0) {
    throw BadConfig("sensitivity: correlations must lie in [-1, 1]");
  }
  return std::abs(rho_conflict - rho_noconflict);
}

Aggregates aggregate(const std::vector<InstanceRecord>& records) {
  if (records.empty()) throw EmptyRun("aggregate: no records");

  struct Accumulator {
    int n = 0;
    int correct = 0;
    double alpha_max_sum = 0.0;
    double rho_sum = 0.0;
  };
  std::map<std::string, Accumulator> by_label;
  Accumulator all;

  for (const InstanceRecord& record : records) {
    const std::string label = bench::label_name(record.label);
    double rho = 0.0;
    if (!record.rho_per_step.empty()) {
      for (double r : record.rho_per_step) rho += r;
      rho /= static_cast<double>(record.rho_per_step.size());
    }
    for (Accumulator* acc : {&by_label[label], &all}) {
      acc->n += 1;
      acc->correct += record.correct ? 1 : 0;
      acc->alpha_max_sum += record.alpha_max;
      acc->rho_sum += rho;
    }
  }

  auto finalize = [](const Accumulator& acc) {
    LabelStats stats;
    stats.n = acc.n;
    stats.accuracy = static_cast<double>(acc.correct) / acc.n;
    stats.mean_alpha_max = acc.alpha_max_sum / acc.n;
    stats.mean_rho = acc.rho_sum / acc.n;
    return stats;
  };

  Aggregates result;
  for (const auto& [label, acc] : by_label) {
    result.per_label[label] = finalize(acc);
  }
  result.overall = finalize(all);

  const auto swap_it = result.per_label.find("SWAP");
  const auto synth_it = result.per_label.find("SYNTH");
  if (swap_it != result.per_label.end() &&
      synth_it != result.per_label.end()) {
    result.sensitivity =
        sensitivity(swap_it->second.mean_rho, synth_it->second.mean_rho);
  }
  return result;
}

}  // namespace ccd::eval
