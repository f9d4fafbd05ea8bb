// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 the conflict-decode authors

#include "ccd/distribution.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace ccd {

namespace {

constexpr double kLn2 = 0.6931471805599453094172321214581766;

/// Numerically stable in-place log-softmax (shift by max, subtract log-sum).
void log_softmax(std::vector<double>& values) {
  double max_value = -std::numeric_limits<double>::infinity();
  for (double v : values) max_value = std::max(max_value, v);
  double sum = 0.0;
  for (double v : values) sum += std::exp(v - max_value);
  const double log_z = max_value + std::log(sum);
  for (double& v : values) v -= log_z;
}

void check_same_vocab(const TokenDistribution& a, const TokenDistribution& b,
                      const char* op) {
  if (a.vocab_size() != b.vocab_size()) {
    throw VocabMismatch(std::string(op) + ": vocab sizes differ (" +
                        std::to_string(a.vocab_size()) + " vs " +
                        std::to_string(b.vocab_size()) + ")");
  }
}

/// Probabilities clamped at kProbFloor and renormalized.
std::vector<double> floored_probs(const TokenDistribution& d) {
  std::vector<double> probs = d.probs();
  double sum = 0.0;
  for (double& p : probs) {
    if (p < kProbFloor) p = kProbFloor;
    sum += p;
  }
  for (double& p : probs) p /= sum;
  return probs;
}

}  // namespace

TokenDistribution TokenDistribution::from_logits(
    std::span<const double> logits) {
  if (logits.size() < 2) {
    throw VocabTooSmall("from_logits: need at least 2 entries, got " +
                        std::to_string(logits.size()));
  }
  std::vector<double> values(logits.begin(), logits.end());
  for (double v : values) {
    if (!std::isfinite(v)) {
      throw NonFiniteLogit("from_logits: non-finite logit encountered");
    }
  }
  log_softmax(values);
  return TokenDistribution(std::move(values));
}

TokenDistribution TokenDistribution::from_probs(std::span<const double> probs) {
  if (probs.size() < 2) {
    throw VocabTooSmall("from_probs: need at least 2 entries, got " +
                        std::to_string(probs.size()));
  }
  std::vector<double> values(probs.begin(), probs.end());
  for (double v : values) {
    if (!std::isfinite(v) || v < 0.0) {
      throw NonFiniteLogit("from_probs: entries must be finite and >= 0");
    }
  }
  for (double& v : values) v = std::log(std::max(v, kProbFloor));
  log_softmax(values);
  return TokenDistribution(std::move(values));
}

double TokenDistribution::prob(TokenId id) const {
  return std::exp(log_probs_[static_cast<std::size_t>(id)]);
}

std::vector<double> TokenDistribution::probs() const {
  std::vector<double> out(log_probs_.size());
  for (std::size_t i = 0; i < log_probs_.size(); ++i) {
    out[i] = std::exp(log_probs_[i]);
  }
  return out;
}

TokenId TokenDistribution::argmax() const {
  std::size_t best = 0;
  for (std::size_t i = 1; i < log_probs_.size(); ++i) {
    if (log_probs_[i] > log_probs_[best]) best = i;
  }
  return static_cast<TokenId>(best);
}

double TokenDistribution::max_prob() const {
  return std::exp(log_probs_[static_cast<std::size_t>(argmax())]);
}

Alpha::Alpha(double v) : value(v) {
  if (!(v >= 0.0) || !std::isfinite(v)) {
    throw NegativeAlpha("alpha must be finite and >= 0, got " +
                        std::to_string(v));
  }
}

double kl_divergence(const TokenDistribution& p, const TokenDistribution& m) {
  check_same_vocab(p, m, "kl_divergence");
  const std::vector<double> fp = floored_probs(p);
  const std::vector<double> fm = floored_probs(m);
  double sum_nats = 0.0;
  for (std::size_t i = 0; i < fp.size(); ++i) {
    if (fp[i] > 0.0) sum_nats += fp[i] * std::log(fp[i] / fm[i]);
  }
  return std::max(0.0, sum_nats / kLn2);
}

double jsd(const TokenDistribution& p, const TokenDistribution& q) {
  check_same_vocab(p, q, "jsd");
  const std::vector<double> fp = floored_probs(p);
  const std::vector<double> fq = floored_probs(q);
  // Mixture and the two KL sums use only commutative additions, so
  // jsd(p, q) == jsd(q, p) bit-exactly.
  double kl_p = 0.0;
  double kl_q = 0.0;
  for (std::size_t i = 0; i < fp.size(); ++i) {
    const double mix = 0.5 * (fp[i] + fq[i]);
    kl_p += fp[i] * std::log(fp[i] / mix);
    kl_q += fq[i] * std::log(fq[i] / mix);
  }
  const double bits = 0.5 * (kl_p + kl_q) / kLn2;
  return std::min(1.0, std::max(0.0, bits));
}

double entropy_bits(const TokenDistribution& p) {
  double sum_nats = 0.0;
  for (double lp : p.log_probs()) {
    const double prob = std::exp(lp);
    if (prob > 0.0) sum_nats -= prob * lp;
  }
  return std::max(0.0, sum_nats / kLn2);
}

TokenDistribution contrastive_combine(const TokenDistribution& p_ctx,
                                      const TokenDistribution& p_noctx,
                                      Alpha alpha) {
  check_same_vocab(p_ctx, p_noctx, "contrastive_combine");
  const std::vector<double> ctx = floored_probs(p_ctx);
  const std::vector<double> noctx = floored_probs(p_noctx);
  std::vector<double> scores(ctx.size());
  const double a = alpha.value;
  for (std::size_t i = 0; i < ctx.size(); ++i) {
    scores[i] = (1.0 + a) * std::log(ctx[i]) - a * std::log(noctx[i]);
  }
  return TokenDistribution::from_logits(scores);
}

std::vector<std::pair<TokenId, double>> top_k(const TokenDistribution& p,
                                              int k) {
  if (k < 1 || k > p.vocab_size()) {
    throw KOutOfRange("top_k: k=" + std::to_string(k) +
                      " outside [1, " + std::to_string(p.vocab_size()) + "]");
  }
  std::vector<std::pair<TokenId, double>> entries;
  entries.reserve(static_cast<std::size_t>(p.vocab_size()));
  for (TokenId id = 0; id < p.vocab_size(); ++id) {
    entries.emplace_back(id, p.prob(id));
  }
  std::stable_sort(entries.begin(), entries.end(),
                   [](const auto& a, const auto& b) {
                     if (a.second != b.second) return a.second > b.second;
                     return a.first < b.first;
                   });
  entries.resize(static_cast<std::size_t>(k));
  return entries;
}

}  // namespace ccd
