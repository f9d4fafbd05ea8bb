#pragma once

// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 the conflict-decode authors

/**
 * @file scripted.hpp
 * @brief Scripted distribution source: exact per-step pairs for oracle tests.
 *
 * A scenario stores one (p_ctx, p_noctx) probability pair per decoding step.
 * The step index is the generated-prefix length, so decoding replays the
 * stored pairs exactly; scenarios are written so that the final step is
 * peaked on the stop token for every strategy.
 */

#include <filesystem>
#include <string>
#include <vector>

#include "ccd/lm_source.hpp"

namespace ccd::lm {

struct ScriptedStep {
  std::vector<double> p_ctx;
  std::vector<double> p_noctx;
};

struct ScriptedScenario {
  Vocabulary vocab;
  std::vector<ScriptedStep> steps;

  /// Each vector must have |vocab| entries and sum to 1 within 1e-9.
  void validate() const;

  static ScriptedScenario load(const std::filesystem::path& file);
  void save(const std::filesystem::path& file) const;
};

class ScriptedSource final : public LmSource {
 public:
  explicit ScriptedSource(ScriptedScenario scenario);

  const Vocabulary& vocab() const override { return scenario_.vocab; }

  /// Returns the stored pair for step |prefix| verbatim; throws
  /// StepOutOfRange once the script is exhausted.
  TokenDistribution next_distribution(const std::optional<TokenIds>& context,
                                      const TokenIds& query,
                                      const TokenIds& prefix) const override;

  const ScriptedScenario& scenario() const { return scenario_; }

 private:
  ScriptedScenario scenario_;
};

}  // namespace ccd::lm
