#pragma once

// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 the conflict-decode authors

/**
 * @file decode.hpp
 * @brief Sequence-level decoding loop over an LmSource.
 *
 * Each step queries the source twice — with and without the context segment —
 * and feeds the chosen token back into both conditionals. Decoding stops when
 * the strategy's stop token is chosen or max_tokens steps have run. The stop
 * token is excluded from the emitted tokens but its trace is retained.
 */

#include <vector>

#include "ccd/lm_source.hpp"
#include "ccd/strategy.hpp"

namespace ccd {

struct DecodeResult {
  std::vector<TokenId> tokens;   // emitted answer, stop token excluded
  std::vector<StepTrace> traces; // one per step, stop step included
};

/// Throws EmptyQuery when query is empty, BadHyperparameter for an invalid
/// strategy, and propagates SourceError from the source.
DecodeResult decode_sequence(const DecodeStrategy& strategy,
                             const lm::LmSource& source,
                             const lm::TokenIds& context,
                             const lm::TokenIds& query);

}  // namespace ccd
