// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 the conflict-decode authors

#include "ccd/decode.hpp"

namespace ccd {

DecodeResult decode_sequence(const DecodeStrategy& strategy,
                             const lm::LmSource& source,
                             const lm::TokenIds& context,
                             const lm::TokenIds& query) {
  strategy.validate();
  if (query.empty()) throw EmptyQuery("decode_sequence: query is empty");

  const std::optional<lm::TokenIds> with_context(context);
  const std::optional<lm::TokenIds> without_context;

  DecodeResult result;
  lm::TokenIds prefix;
  for (int step = 0; step < strategy.max_tokens; ++step) {
    TokenDistribution p_ctx =
        source.next_distribution(with_context, query, prefix);
    TokenDistribution p_noctx =
        source.next_distribution(without_context, query, prefix);
    StepTrace trace = decode_step(strategy, p_ctx, p_noctx);
    trace.step_index = step;
    const TokenId chosen = trace.chosen_token;
    result.traces.push_back(std::move(trace));
    if (chosen == strategy.stop_token) break;
    result.tokens.push_back(chosen);
    prefix.push_back(chosen);
  }
  return result;
}

}  // namespace ccd
