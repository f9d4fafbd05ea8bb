// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 the conflict-decode authors

#include "ccd/strategy.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>
#include <vector>

namespace ccd {

namespace {

std::string trim(const std::string& s) {
  std::size_t begin = s.find_first_not_of(" \t");
  std::size_t end = s.find_last_not_of(" \t");
  if (begin == std::string::npos) return "";
  return s.substr(begin, end - begin + 1);
}

double parse_double(const std::string& key, const std::string& value) {
  try {
    std::size_t used = 0;
    double parsed = std::stod(value, &used);
    if (used != value.size()) throw std::invalid_argument(value);
    return parsed;
  } catch (const std::exception&) {
    throw BadHyperparameter("strategy parameter " + key +
                            ": cannot parse number '" + value + "'");
  }
}

std::string format_param(double v) {
  char buffer[32];
  std::snprintf(buffer, sizeof(buffer), "%g", v);
  return buffer;
}

}  // namespace

void DecodeStrategy::validate() const {
  if (!(cad_alpha >= 0.0)) {
    throw BadHyperparameter("cad_alpha must be >= 0");
  }
  if (!(warmup_lambda >= 0.0 && warmup_lambda <= 1.0)) {
    throw BadHyperparameter("warmup_lambda must be in [0, 1]");
  }
  if (!(coiecd_lambda > 0.0 && coiecd_lambda < 1.0)) {
    throw BadHyperparameter("coiecd_lambda must be in (0, 1)");
  }
  if (!(coiecd_alpha >= 0.0)) {
    throw BadHyperparameter("coiecd_alpha must be >= 0");
  }
  if (max_tokens < 1) {
    throw BadHyperparameter("max_tokens must be >= 1");
  }
  if (stop_token < 0) {
    throw BadHyperparameter("stop_token must be a valid token id");
  }
}

DecodeStrategy DecodeStrategy::parse(const std::string& descriptor,
                                     const DecodeStrategy& base) {
  DecodeStrategy strategy = base;
  std::string spec = trim(descriptor);
  std::string kind_name = spec;
  std::string params;
  if (std::size_t colon = spec.find(':'); colon != std::string::npos) {
    kind_name = trim(spec.substr(0, colon));
    params = spec.substr(colon + 1);
  }

  if (kind_name == "greedy") {
    strategy.kind = DecodeKind::Greedy;
  } else if (kind_name == "cad") {
    strategy.kind = DecodeKind::Cad;
  } else if (kind_name == "adacad") {
    strategy.kind = DecodeKind::AdaCad;
  } else if (kind_name == "confcd") {
    strategy.kind = DecodeKind::ConfCd;
  } else if (kind_name == "coiecd") {
    strategy.kind = DecodeKind::Coiecd;
  } else {
    throw BadHyperparameter("unknown strategy '" + kind_name + "'");
  }

  std::stringstream stream(params);
  std::string item;
  while (std::getline(stream, item, ',')) {
    item = trim(item);
    if (item.empty()) continue;
    std::size_t eq = item.find('=');
    if (eq == std::string::npos) {
      throw BadHyperparameter("strategy parameter '" + item +
                              "' is not key=value");
    }
    std::string key = trim(item.substr(0, eq));
    std::string value = trim(item.substr(eq + 1));
    if (key == "alpha" && strategy.kind == DecodeKind::Cad) {
      strategy.cad_alpha = parse_double(key, value);
    } else if (key == "alpha" && strategy.kind == DecodeKind::Coiecd) {
      strategy.coiecd_alpha = parse_double(key, value);
    } else if (key == "lambda" && strategy.kind == DecodeKind::AdaCad) {
      strategy.warmup_lambda = parse_double(key, value);
    } else if (key == "lambda" && strategy.kind == DecodeKind::Coiecd) {
      strategy.coiecd_lambda = parse_double(key, value);
    } else if (key == "max_tokens") {
      strategy.max_tokens = static_cast<int>(parse_double(key, value));
    } else if (key == "stop_token") {
      strategy.stop_token = static_cast<TokenId>(parse_double(key, value));
    } else {
      throw BadHyperparameter("parameter '" + key + "' not valid for '" +
                              kind_name + "'");
    }
  }
  strategy.validate();
  return strategy;
}

std::string DecodeStrategy::name() const {
  switch (kind) {
    case DecodeKind::Greedy:
      return "greedy";
    case DecodeKind::Cad:
      return "cad_a" + format_param(cad_alpha);
    case DecodeKind::AdaCad:
      return warmup_lambda > 0.0 ? "adacad_l" + format_param(warmup_lambda)
                                 : "adacad";
    case DecodeKind::ConfCd:
      return "confcd";
    case DecodeKind::Coiecd:
      return "coiecd_l" + format_param(coiecd_lambda) + "_a" +
             format_param(coiecd_alpha);
  }
  return "unknown";
}

Alpha alpha_adacad(const TokenDistribution& p_ctx,
                   const TokenDistribution& p_noctx, double warmup_lambda) {
  if (!(warmup_lambda >= 0.0 && warmup_lambda <= 1.0)) {
    throw BadHyperparameter("warmup_lambda must be in [0, 1]");
  }
  // Argument order matches the per-step alpha definition; JSD is symmetric,
  // the order is fixed for trace reproducibility only.
  const double divergence = jsd(p_noctx, p_ctx);
  return Alpha(std::max(divergence, warmup_lambda));
}

Alpha alpha_confcd(const TokenDistribution& p_ctx,
                   const TokenDistribution& p_noctx) {
  if (p_ctx.vocab_size() != p_noctx.vocab_size()) {
    throw VocabMismatch("alpha_confcd: vocab sizes differ");
  }
  const double with_context = p_ctx.max_prob();
  const double without_context = p_noctx.max_prob();
  if (with_context > without_context) return Alpha(with_context);
  return Alpha(1.0 - without_context);
}

std::pair<TokenDistribution, bool> step_coiecd(const TokenDistribution& p_ctx,
                                               const TokenDistribution& p_noctx,
                                               double lambda, double alpha) {
  if (p_ctx.vocab_size() != p_noctx.vocab_size()) {
    throw VocabMismatch("step_coiecd: vocab sizes differ");
  }
  if (!(lambda > 0.0 && lambda < 1.0)) {
    throw BadHyperparameter("coiecd lambda must be in (0, 1)");
  }
  if (!(alpha >= 0.0)) {
    throw BadHyperparameter("coiecd alpha must be >= 0");
  }

  const TokenId context_choice = p_ctx.argmax();
  const double info_content =
      -std::log2(std::max(p_noctx.prob(context_choice), kProbFloor));
  const bool conflict = info_content > entropy_bits(p_noctx);

  if (conflict) {
    return {contrastive_combine(p_ctx, p_noctx, Alpha(alpha)), true};
  }

  // Non-conflict branch: keep the head of p_ctx (probability within a factor
  // lambda of the maximum), renormalize over it.
  const double threshold = lambda * p_ctx.max_prob();
  std::vector<double> restricted(
      static_cast<std::size_t>(p_ctx.vocab_size()), 0.0);
  for (TokenId id = 0; id < p_ctx.vocab_size(); ++id) {
    const double prob = p_ctx.prob(id);
    if (prob >= threshold) restricted[static_cast<std::size_t>(id)] = prob;
  }
  return {TokenDistribution::from_probs(restricted), false};
}

StepTrace decode_step(const DecodeStrategy& strategy,
                      const TokenDistribution& p_ctx,
                      const TokenDistribution& p_noctx) {
  if (p_ctx.vocab_size() != p_noctx.vocab_size()) {
    throw VocabMismatch("decode_step: vocab sizes differ");
  }

  // Recorded for every strategy so analyses do not depend on the kind.
  const double divergence = jsd(p_noctx, p_ctx);

  double alpha_used = 0.0;
  TokenDistribution p_final = p_ctx;
  switch (strategy.kind) {
    case DecodeKind::Greedy:
      break;
    case DecodeKind::Cad: {
      Alpha alpha(strategy.cad_alpha);
      alpha_used = alpha.value;
      p_final = contrastive_combine(p_ctx, p_noctx, alpha);
      break;
    }
    case DecodeKind::AdaCad: {
      Alpha alpha = alpha_adacad(p_ctx, p_noctx, strategy.warmup_lambda);
      alpha_used = alpha.value;
      p_final = contrastive_combine(p_ctx, p_noctx, alpha);
      break;
    }
    case DecodeKind::ConfCd: {
      Alpha alpha = alpha_confcd(p_ctx, p_noctx);
      alpha_used = alpha.value;
      p_final = contrastive_combine(p_ctx, p_noctx, alpha);
      break;
    }
    case DecodeKind::Coiecd: {
      auto [dist, conflict] = step_coiecd(p_ctx, p_noctx,
                                          strategy.coiecd_lambda,
                                          strategy.coiecd_alpha);
      alpha_used = conflict ? strategy.coiecd_alpha : 0.0;
      p_final = std::move(dist);
      break;
    }
  }

  StepTrace trace{0, p_ctx, p_noctx, std::move(p_final), alpha_used,
                  divergence, 0};
  trace.chosen_token = trace.p_final.argmax();
  return trace;
}

}  // namespace ccd
