#pragma once

// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 the conflict-decode authors

/**
 * @file runner.hpp
 * @brief Experiment harness: run configs, the gen/train/run/report commands,
 *        result persistence, and the manifest.
 *
 * Runs are deterministic end to end: a fixed config and seed produce
 * byte-identical suite files, result files, and CSVs, independent of the
 * worker count (workers parallelize across instances only and results are
 * merged in instance order).
 */

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "ccd/bench.hpp"
#include "ccd/eval.hpp"
#include "ccd/ngram.hpp"
#include "ccd/strategy.hpp"

namespace ccd::run {

enum class ModelKind { Ngram, Scripted, Remote };

struct ModelConfig {
  ModelKind kind = ModelKind::Ngram;
  // ngram
  lm::NgramOptions ngram;
  lm::ContextAbsorption absorption;
  std::optional<std::string> model_path;  // pre-trained model instead of
                                          // training from the suite corpus
  // scripted
  std::string scenario_path;
  // remote: "host:port" or "stdio"
  std::string endpoint;
};

struct RunConfig {
  int schema_version = 1;
  std::optional<bench::BenchConfig> bench;
  std::optional<std::string> suite_path;
  ModelConfig model;
  std::vector<std::string> strategies = {"greedy"};
  std::uint64_t seed = 0;
  std::filesystem::path output_dir = "out";
  int workers = 1;
  int max_tokens = 8;
  TokenId stop_token = 1;

  void validate() const;

  static RunConfig from_json_text(const std::string& text);
  static RunConfig load(const std::filesystem::path& file);
};

/// Generates the suite under <output_dir>/suite. Exit-code contract of the
/// CLI wrapper: 0 ok, 2 BadConfig, 3 IoError.
std::filesystem::path cmd_gen(const RunConfig& config);

/// Trains the n-gram model on the resolved suite corpus and writes
/// <output_dir>/model.json.
std::filesystem::path cmd_train(const RunConfig& config);

struct StrategyRun {
  std::string strategy_name;
  std::vector<eval::InstanceRecord> records;
  eval::Aggregates aggregates;
  std::filesystem::path results_file;
};

struct RunOutput {
  std::vector<StrategyRun> runs;
  std::filesystem::path manifest_file;
};

/// Decodes every strategy x instance, writes one results JSONL per strategy
/// plus manifest.json. On SourceError, flushes completed records with a
/// truncation marker, records the failure in the manifest, and rethrows
/// (CLI exit code 4).
RunOutput cmd_run(const RunConfig& config);

struct LoadedResults {
  std::string strategy_name;
  std::vector<eval::InstanceRecord> records;
};

/// Parses a results JSONL file; throws ResultsFormatError (CLI exit code 5)
/// with the offending line number.
LoadedResults load_results(const std::filesystem::path& file);

/// Renders the per-strategy summary table to `out` and writes the companion
/// CSV. Returns the CSV text (also what was written).
std::string cmd_report(const std::vector<std::filesystem::path>& results_files,
                       const std::filesystem::path& csv_out, std::ostream& out);

}  // namespace ccd::run
