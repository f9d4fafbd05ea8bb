// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 the conflict-decode authors

#include "ccd/scripted.hpp"

#include <cmath>
#include <fstream>

#include <json.hpp>

namespace ccd::lm {

namespace {

void check_vector(const std::vector<double>& probs, int vocab_size,
                  std::size_t step, const char* which) {
  if (static_cast<int>(probs.size()) != vocab_size) {
    throw BadConfig("scenario step " + std::to_string(step) + " " + which +
                    " has " + std::to_string(probs.size()) +
                    " entries, vocab has " + std::to_string(vocab_size));
  }
  double sum = 0.0;
  for (double p : probs) {
    if (!std::isfinite(p) || p < 0.0) {
      throw BadConfig("scenario step " + std::to_string(step) + " " + which +
                      " has invalid probability");
    }
    sum += p;
  }
  if (std::abs(sum - 1.0) > 1e-9) {
    throw BadConfig("scenario step " + std::to_string(step) + " " + which +
                    " sums to " + std::to_string(sum));
  }
}

}  // namespace

void ScriptedScenario::validate() const {
  if (vocab.size() < 2) throw BadConfig("scenario vocab too small");
  if (steps.empty()) throw BadConfig("scenario has no steps");
  for (std::size_t i = 0; i < steps.size(); ++i) {
    check_vector(steps[i].p_ctx, vocab.size(), i, "p_ctx");
    check_vector(steps[i].p_noctx, vocab.size(), i, "p_noctx");
  }
}

ScriptedScenario ScriptedScenario::load(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw IoError("cannot open scenario file " + file.string());
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::exception& e) {
    throw BadConfig("scenario " + file.string() + ": " + e.what());
  }
  ScriptedScenario scenario;
  try {
    scenario.vocab =
        Vocabulary::from_tokens(doc.at("vocab").get<std::vector<std::string>>());
    for (const auto& step : doc.at("steps")) {
      scenario.steps.push_back(
          {step.at("p_ctx").get<std::vector<double>>(),
           step.at("p_noctx").get<std::vector<double>>()});
    }
  } catch (const nlohmann::json::exception& e) {
    throw BadConfig("scenario " + file.string() + ": " + e.what());
  }
  scenario.validate();
  return scenario;
}

void ScriptedScenario::save(const std::filesystem::path& file) const {
  validate();
  nlohmann::json doc;
  doc["vocab"] = vocab.tokens();
  doc["steps"] = nlohmann::json::array();
  for (const auto& step : steps) {
    doc["steps"].push_back({{"p_ctx", step.p_ctx}, {"p_noctx", step.p_noctx}});
  }
  std::ofstream out(file);
  if (!out) throw IoError("cannot write scenario file " + file.string());
  out << doc.dump(2) << '\n';
}

ScriptedSource::ScriptedSource(ScriptedScenario scenario)
    : scenario_(std::move(scenario)) {
  scenario_.validate();
}

TokenDistribution ScriptedSource::next_distribution(
    const std::optional<TokenIds>& context, const TokenIds& /*query*/,
    const TokenIds& prefix) const {
  const std::size_t step = prefix.size();
  if (step >= scenario_.steps.size()) {
    throw StepOutOfRange("scripted scenario has " +
                         std::to_string(scenario_.steps.size()) +
                         " steps, requested step " + std::to_string(step));
  }
  const ScriptedStep& s = scenario_.steps[step];
  return TokenDistribution::from_probs(context.has_value() ? s.p_ctx
                                                           : s.p_noctx);
}

}  // namespace ccd::lm
