// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 the conflict-decode authors

#include "ccd/runner.hpp"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <mutex>
#include <ostream>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "ccd/decode.hpp"
#include "ccd/log.hpp"
#include "ccd/remote.hpp"
#include "ccd/scripted.hpp"
#include "ccd/version.hpp"

namespace ccd::run {

namespace {

std::uint64_t fnv1a_hash(const std::string& text) {
  std::uint64_t hash = 0xCBF29CE484222325ULL;
  for (unsigned char c : text) {
    hash ^= c;
    hash *= 0x100000001B3ULL;
  }
  return hash;
}

std::string hex64(std::uint64_t value) {
  char buffer[24];
  std::snprintf(buffer, sizeof(buffer), "%016llx",
                static_cast<unsigned long long>(value));
  return buffer;
}

std::string format_number(double value) {
  char buffer[40];
  std::snprintf(buffer, sizeof(buffer), "%.10g", value);
  return buffer;
}

bench::BenchConfig bench_from_json(const nlohmann::json& doc) {
  bench::BenchConfig config;
  config.n_subjects = doc.value("n_subjects", config.n_subjects);
  config.n_relations = doc.value("n_relations", config.n_relations);
  config.n_objects = doc.value("n_objects", config.n_objects);
  config.repetitions = doc.value("repetitions", config.repetitions);
  config.n_instances = doc.value("n_instances", config.n_instances);
  if (doc.contains("mix")) {
    const auto& mix = doc.at("mix");
    config.mix_original = mix.value("ORIGINAL", 0.0);
    config.mix_swap = mix.value("SWAP", 0.0);
    config.mix_synth = mix.value("SYNTH", 0.0);
  }
  config.period_fraction = doc.value("period_fraction", config.period_fraction);
  config.noise_fraction = doc.value("noise_fraction", config.noise_fraction);
  config.ngram_order = doc.value("ngram_order", config.ngram_order);
  config.add_k = doc.value("add_k", config.add_k);
  config.seed = doc.value("seed", config.seed);
  return config;
}

nlohmann::json canonical_json(const RunConfig& config) {
  nlohmann::json doc;
  doc["schema_version"] = config.schema_version;
  if (config.bench.has_value()) {
    const bench::BenchConfig& b = *config.bench;
    doc["bench"] = {{"n_subjects", b.n_subjects},
                    {"n_relations", b.n_relations},
                    {"n_objects", b.n_objects},
                    {"repetitions", b.repetitions},
                    {"n_instances", b.n_instances},
                    {"mix", {{"ORIGINAL", b.mix_original},
                             {"SWAP", b.mix_swap},
                             {"SYNTH", b.mix_synth}}},
                    {"period_fraction", b.period_fraction},
                    {"noise_fraction", b.noise_fraction},
                    {"ngram_order", b.ngram_order},
                    {"add_k", b.add_k},
                    {"seed", b.seed}};
  }
  if (config.suite_path.has_value()) doc["suite"] = *config.suite_path;
  switch (config.model.kind) {
    case ModelKind::Ngram: {
      nlohmann::json model = {{"order", config.model.ngram.order},
                              {"add_k", config.model.ngram.add_k},
                              {"context_absorption",
                               {{"window_weight",
                                 config.model.absorption.window_weight},
                                {"window_decay",
                                 config.model.absorption.window_decay},
                                {"presence_weight",
                                 config.model.absorption.presence_weight}}}};
      if (config.model.model_path.has_value()) {
        model["model_path"] = *config.model.model_path;
      }
      doc["model"] = {{"ngram", std::move(model)}};
      break;
    }
    case ModelKind::Scripted:
      doc["model"] = {{"scripted", config.model.scenario_path}};
      break;
    case ModelKind::Remote:
      doc["model"] = {{"remote", config.model.endpoint}};
      break;
  }
  doc["strategies"] = config.strategies;
  doc["seed"] = config.seed;
  doc["output_dir"] = config.output_dir.string();
  doc["workers"] = config.workers;
  doc["max_tokens"] = config.max_tokens;
  doc["stop_token"] = config.stop_token;
  return doc;
}

}  // namespace

void RunConfig::validate() const {
  if (schema_version != 1) {
    throw BadConfig("unsupported schema_version " +
                    std::to_string(schema_version));
  }
  if (strategies.empty()) {
    throw BadConfig("config field 'strategies' must list at least one entry");
  }
  if (workers < 1) throw BadConfig("config field 'workers' must be >= 1");
  if (max_tokens < 1) throw BadConfig("config field 'max_tokens' must be >= 1");
  if (bench.has_value()) bench->validate();
  if (config_needs_suite() && !bench.has_value() && !suite_path.has_value()) {
    throw BadConfig("config needs either 'bench' or 'suite'");
  }
  if (model.kind == ModelKind::Remote) {
    const std::string& endpoint = model.endpoint;
    if (endpoint != "stdio") {
      const std::size_t colon = endpoint.rfind(':');
      if (colon == std::string::npos || colon == 0 ||
          colon + 1 == endpoint.size()) {
        throw BadConfig("remote endpoint must be host:port or 'stdio', got '" +
                        endpoint + "'");
      }
      try {
        (void)std::stoi(endpoint.substr(colon + 1));
      } catch (const std::exception&) {
        throw BadConfig("remote endpoint port is not a number: '" + endpoint +
                        "'");
      }
    } else if (workers != 1) {
      throw BadConfig("remote 'stdio' endpoint requires workers=1");
    }
  }
  for (const std::string& descriptor : strategies) {
    (void)DecodeStrategy::parse(descriptor);  // throws BadHyperparameter
  }
}

bool RunConfig::config_needs_suite() const {
  return model.kind != ModelKind::Scripted || suite_path.has_value() ||
         bench.has_value();
}

RunConfig RunConfig::from_json_text(const std::string& text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw BadConfig(std::string("config is not valid JSON: ") + e.what());
  }
  RunConfig config;
  try {
    config.schema_version = doc.value("schema_version", 1);
    if (doc.contains("bench")) config.bench = bench_from_json(doc.at("bench"));
    if (doc.contains("suite")) {
      config.suite_path = doc.at("suite").get<std::string>();
    }
    if (doc.contains("model")) {
      const auto& model = doc.at("model");
      if (model.contains("ngram")) {
        config.model.kind = ModelKind::Ngram;
        const auto& ngram = model.at("ngram");
        config.model.ngram.order =
            ngram.value("order", config.model.ngram.order);
        config.model.ngram.add_k =
            ngram.value("add_k", config.model.ngram.add_k);
        if (ngram.contains("context_absorption")) {
          const auto& absorption = ngram.at("context_absorption");
          config.model.absorption.window_weight = absorption.value(
              "window_weight", config.model.absorption.window_weight);
          config.model.absorption.window_decay = absorption.value(
              "window_decay", config.model.absorption.window_decay);
          config.model.absorption.presence_weight = absorption.value(
              "presence_weight", config.model.absorption.presence_weight);
        }
        if (ngram.contains("model_path")) {
          config.model.model_path = ngram.at("model_path").get<std::string>();
        }
      } else if (model.contains("scripted")) {
        config.model.kind = ModelKind::Scripted;
        config.model.scenario_path = model.at("scripted").get<std::string>();
      } else if (model.contains("remote")) {
        config.model.kind = ModelKind::Remote;
        config.model.endpoint = model.at("remote").get<std::string>();
      } else {
        throw BadConfig("config field 'model' needs ngram, scripted or remote");
      }
    }
    if (doc.contains("strategies")) {
      config.strategies = doc.at("strategies").get<std::vector<std::string>>();
    }
    config.seed = doc.value("seed", config.seed);
    if (doc.contains("output_dir")) {
      config.output_dir = doc.at("output_dir").get<std::string>();
    }
    config.workers = doc.value("workers", config.workers);
    config.max_tokens = doc.value("max_tokens", config.max_tokens);
    config.stop_token = doc.value("stop_token", config.stop_token);
  } catch (const nlohmann::json::exception& e) {
    throw BadConfig(std::string("config: ") + e.what());
  }
  config.validate();
  return config;
}

RunConfig RunConfig::load(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw IoError("cannot open config file " + file.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  return from_json_text(buffer.str());
}

std::filesystem::path cmd_gen(const RunConfig& config) {
  if (!config.bench.has_value()) {
    throw BadConfig("gen: config field 'bench' is required");
  }
  const std::filesystem::path suite_dir = config.output_dir / "suite";
  bench::build_suite(*config.bench, suite_dir);
  return suite_dir;
}

namespace {

bench::Suite resolve_suite(const RunConfig& config) {
  if (config.suite_path.has_value()) {
    return bench::load_suite(*config.suite_path);
  }
  const std::filesystem::path generated = config.output_dir / "suite";
  if (std::filesystem::exists(generated / "instances.jsonl")) {
    return bench::load_suite(generated);
  }
  if (config.bench.has_value()) {
    return bench::build_suite(*config.bench);
  }
  throw BadConfig("no suite available: run gen first or set 'suite'");
}

eval::InstanceRecord run_instance(const DecodeStrategy& strategy,
                                  const lm::LmSource& source,
                                  const bench::ConflictInstance& instance) {
  const DecodeResult decoded = decode_sequence(
      strategy, source, instance.context_tokens, instance.query_tokens);
  eval::InstanceRecord record;
  record.instance_id = instance.id;
  record.label = instance.label;
  record.emitted = decoded.tokens;
  record.correct = eval::exact_match(decoded.tokens, instance.gold_answer);
  const int k = std::min(20, source.vocab().size());
  double jsd_sum = 0.0;
  for (const StepTrace& trace : decoded.traces) {
    record.alpha_max = std::max(record.alpha_max, trace.alpha_used);
    jsd_sum += trace.jsd_value;
    record.rho_per_step.push_back(
        eval::spearman_topk(trace.p_ctx, trace.p_final, k));
  }
  record.mean_jsd = jsd_sum / static_cast<double>(decoded.traces.size());
  return record;
}

nlohmann::json record_to_json(const eval::InstanceRecord& record) {
  return {{"instance", record.instance_id},
          {"label", bench::label_name(record.label)},
          {"emitted", record.emitted},
          {"correct", record.correct},
          {"alpha_max", record.alpha_max},
          {"mean_jsd", record.mean_jsd},
          {"rho_per_step", record.rho_per_step}};
}

nlohmann::json stats_to_json(const eval::LabelStats& stats) {
  return {{"n", stats.n},
          {"accuracy", stats.accuracy},
          {"mean_alpha_max", stats.mean_alpha_max},
          {"mean_rho", stats.mean_rho}};
}

void write_results_file(const std::filesystem::path& file,
                        const std::string& strategy_name,
                        const std::vector<eval::InstanceRecord>& records,
                        const std::optional<std::string>& truncation_error) {
  std::ofstream out(file);
  if (!out) throw IoError("cannot write results file " + file.string());
  for (const eval::InstanceRecord& record : records) {
    out << record_to_json(record).dump() << '\n';
  }
  if (truncation_error.has_value()) {
    nlohmann::json marker = {{"truncated", true}, {"error", *truncation_error}};
    out << marker.dump() << '\n';
    return;
  }
  const eval::Aggregates aggregates = eval::aggregate(records);
  nlohmann::json summary;
  summary["summary"] = true;
  summary["strategy"] = strategy_name;
  summary["n"] = static_cast<int>(records.size());
  summary["overall"] = stats_to_json(aggregates.overall);
  nlohmann::json per_label;
  for (const auto& [label, stats] : aggregates.per_label) {
    per_label[label] = stats_to_json(stats);
  }
  summary["per_label"] = std::move(per_label);
  if (aggregates.sensitivity.has_value()) {
    summary["sensitivity"] = *aggregates.sensitivity;
  }
  out << summary.dump() << '\n';
}

/// Per-worker view of the model. The shared source is used when non-null;
/// remote runs build one connection per worker.
struct SourceFactory {
  const lm::LmSource* shared = nullptr;
  const RunConfig* config = nullptr;

  std::unique_ptr<lm::LmSource> make_remote(int worker_index) const {
    const std::string& endpoint = config->model.endpoint;
    const std::string session = "w" + std::to_string(worker_index);
    if (endpoint == "stdio") {
      return std::make_unique<lm::RemoteSource>(
          lm::RemoteLogitClient::from_fds(0, 1), session);
    }
    const std::size_t colon = endpoint.rfind(':');
    const std::string host = endpoint.substr(0, colon);
    const int port = std::stoi(endpoint.substr(colon + 1));
    return std::make_unique<lm::RemoteSource>(
        lm::RemoteLogitClient::connect_tcp(host, port), session);
  }
};

}  // namespace

std::filesystem::path cmd_train(const RunConfig& config) {
  if (config.model.kind != ModelKind::Ngram) {
    throw BadConfig("train: config model must be ngram");
  }
  const bench::Suite suite = resolve_suite(config);
  const lm::NgramModel model = lm::NgramModel::train(
      suite.corpus, suite.kb.vocab, config.model.ngram);
  std::filesystem::create_directories(config.output_dir);
  const std::filesystem::path file = config.output_dir / "model.json";
  model.save(file);
  log::info("model written to " + file.string());
  return file;
}

RunOutput cmd_run(const RunConfig& config) {
  config.validate();
  std::error_code ec;
  std::filesystem::create_directories(config.output_dir, ec);
  if (ec) {
    throw IoError("cannot create output dir " + config.output_dir.string());
  }

  const bench::Suite suite = resolve_suite(config);

  // Shared (immutable) source for in-process models.
  std::unique_ptr<lm::LmSource> shared_source;
  SourceFactory factory;
  factory.config = &config;
  switch (config.model.kind) {
    case ModelKind::Ngram: {
      lm::NgramModel model =
          config.model.model_path.has_value()
              ? lm::NgramModel::load(*config.model.model_path)
              : lm::NgramModel::train(suite.corpus, suite.kb.vocab,
                                      config.model.ngram);
      shared_source = std::make_unique<lm::NgramSource>(
          std::move(model), config.model.absorption);
      break;
    }
    case ModelKind::Scripted:
      shared_source = std::make_unique<lm::ScriptedSource>(
          lm::ScriptedScenario::load(config.model.scenario_path));
      break;
    case ModelKind::Remote:
      break;
  }
  factory.shared = shared_source.get();

  nlohmann::json manifest;
  manifest["schema_version"] = 1;
  manifest["tool_version"] = kVersion;
  manifest["seed"] = config.seed;
  manifest["config_hash"] = hex64(fnv1a_hash(canonical_json(config).dump()));
  manifest["suite_instances"] = static_cast<int>(suite.instances.size());
  manifest["results"] = nlohmann::json::array();
  manifest["status"] = "complete";
  const std::filesystem::path manifest_file =
      config.output_dir / "manifest.json";
  auto flush_manifest = [&] {
    std::ofstream out(manifest_file);
    if (!out) throw IoError("cannot write " + manifest_file.string());
    out << manifest.dump(2) << '\n';
  };

  RunOutput output;
  output.manifest_file = manifest_file;

  const DecodeStrategy base_strategy = [&] {
    DecodeStrategy base;
    base.max_tokens = config.max_tokens;
    base.stop_token = config.stop_token;
    return base;
  }();

  for (const std::string& descriptor : config.strategies) {
    const DecodeStrategy strategy =
        DecodeStrategy::parse(descriptor, base_strategy);
    const std::string name = strategy.name();
    const std::filesystem::path results_file =
        config.output_dir / ("results_" + name + ".jsonl");

    const std::size_t n = suite.instances.size();
    std::vector<eval::InstanceRecord> records(n);
    std::vector<char> completed(n, 0);
    std::atomic<std::size_t> cursor{0};
    std::atomic<bool> failed{false};
    std::mutex error_mutex;
    std::string first_error;

    auto worker_main = [&](int worker_index) {
      std::unique_ptr<lm::LmSource> owned;
      const lm::LmSource* source = factory.shared;
      try {
        if (source == nullptr) {
          owned = factory.make_remote(worker_index);
          source = owned.get();
        }
        while (!failed.load()) {
          const std::size_t index = cursor.fetch_add(1);
          if (index >= n) break;
          records[index] =
              run_instance(strategy, *source, suite.instances[index]);
          completed[index] = 1;
        }
      } catch (const SourceError& e) {
        std::scoped_lock lock(error_mutex);
        if (first_error.empty()) first_error = e.what();
        failed.store(true);
      }
    };

    const int worker_count =
        static_cast<int>(std::min<std::size_t>(config.workers, n));
    std::vector<std::thread> workers;
    for (int w = 0; w < worker_count; ++w) workers.emplace_back(worker_main, w);
    for (std::thread& thread : workers) thread.join();

    if (failed.load()) {
      std::vector<eval::InstanceRecord> done;
      for (std::size_t i = 0; i < n; ++i) {
        if (completed[i]) done.push_back(records[i]);
      }
      manifest["status"] = "truncated";
      manifest["error"] = first_error;
      if (!done.empty()) {
        write_results_file(results_file, name, done, first_error);
        manifest["results"].push_back(results_file.filename().string());
      }
      flush_manifest();
      log::error("run truncated under strategy " + name + ": " + first_error);
      throw SourceError(first_error);
    }

    write_results_file(results_file, name, records, std::nullopt);
    manifest["results"].push_back(results_file.filename().string());

    StrategyRun run;
    run.strategy_name = name;
    run.records = std::move(records);
    run.aggregates = eval::aggregate(run.records);
    run.results_file = results_file;
    output.runs.push_back(std::move(run));
    log::info("strategy " + name + " complete (" + std::to_string(n) +
              " instances)");
  }

  flush_manifest();
  return output;
}

LoadedResults load_results(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw IoError("cannot open results file " + file.string());

  LoadedResults loaded;
  loaded.strategy_name = file.stem().string();
  if (loaded.strategy_name.rfind("results_", 0) == 0) {
    loaded.strategy_name = loaded.strategy_name.substr(8);
  }

  std::string line;
  std::size_t line_number = 0;
  while (std::getline(in, line)) {
    ++line_number;
    if (line.empty()) continue;
    nlohmann::json doc;
    try {
      doc = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw ResultsFormatError(file.string() + " line " +
                                   std::to_string(line_number) + ": " +
                                   e.what(),
                               line_number);
    }
    if (doc.contains("summary")) {
      if (doc.contains("strategy")) {
        loaded.strategy_name = doc.at("strategy").get<std::string>();
      }
      continue;
    }
    if (doc.contains("truncated")) continue;
    try {
      if (!doc.contains("label")) {
        throw MissingLabel(file.string() + " line " +
                           std::to_string(line_number) + ": missing label");
      }
      eval::InstanceRecord record;
      record.instance_id = doc.at("instance").get<std::string>();
      record.label =
          bench::label_from_name(doc.at("label").get<std::string>());
      record.emitted = doc.at("emitted").get<std::vector<TokenId>>();
      record.correct = doc.at("correct").get<bool>();
      record.alpha_max = doc.at("alpha_max").get<double>();
      record.mean_jsd = doc.at("mean_jsd").get<double>();
      record.rho_per_step = doc.at("rho_per_step").get<std::vector<double>>();
      loaded.records.push_back(std::move(record));
    } catch (const nlohmann::json::exception& e) {
      throw ResultsFormatError(file.string() + " line " +
                                   std::to_string(line_number) + ": " +
                                   e.what(),
                               line_number);
    }
  }
  if (loaded.records.empty()) {
    throw ResultsFormatError(file.string() + ": no instance records",
                             line_number == 0 ? 1 : line_number);
  }
  // Order-insensitive merge: records sort by instance id.
  std::stable_sort(loaded.records.begin(), loaded.records.end(),
                   [](const auto& a, const auto& b) {
                     return a.instance_id < b.instance_id;
                   });
  return loaded;
}

std::string cmd_report(const std::vector<std::filesystem::path>& results_files,
                       const std::filesystem::path& csv_out,
                       std::ostream& out) {
  if (results_files.empty()) {
    throw BadConfig("report: need at least one results file");
  }
  std::vector<std::pair<std::string, eval::Aggregates>> reports;
  for (const std::filesystem::path& file : results_files) {
    LoadedResults loaded = load_results(file);
    reports.emplace_back(loaded.strategy_name,
                         eval::aggregate(loaded.records));
  }
  std::sort(reports.begin(), reports.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });

  std::ostringstream csv;
  csv << "strategy,label,n,accuracy,mean_alpha_max,mean_rho\n";

  out << std::left << std::setw(18) << "strategy" << std::setw(12) << "label"
      << std::right << std::setw(6) << "n" << std::setw(10) << "accuracy"
      << std::setw(16) << "mean_alpha_max" << std::setw(10) << "mean_rho"
      << '\n';

  auto emit_row = [&](const std::string& strategy, const std::string& label,
                      const eval::LabelStats& stats) {
    csv << strategy << ',' << label << ',' << stats.n << ','
        << format_number(stats.accuracy) << ','
        << format_number(stats.mean_alpha_max) << ','
        << format_number(stats.mean_rho) << '\n';
    char accuracy[16], alpha[16], rho[16];
    std::snprintf(accuracy, sizeof(accuracy), "%.4f", stats.accuracy);
    std::snprintf(alpha, sizeof(alpha), "%.4f", stats.mean_alpha_max);
    std::snprintf(rho, sizeof(rho), "%.4f", stats.mean_rho);
    out << std::left << std::setw(18) << strategy << std::setw(12) << label
        << std::right << std::setw(6) << stats.n << std::setw(10) << accuracy
        << std::setw(16) << alpha << std::setw(10) << rho << '\n';
  };

  for (const auto& [strategy, aggregates] : reports) {
    for (const auto& [label, stats] : aggregates.per_label) {
      emit_row(strategy, label, stats);
    }
    emit_row(strategy, "overall", aggregates.overall);
    if (aggregates.sensitivity.has_value()) {
      // Sensitivity row: the |delta rho| value rides in the mean_rho column.
      csv << strategy << ",sensitivity," << aggregates.overall.n << ",,,"
          << format_number(*aggregates.sensitivity) << '\n';
      char value[16];
      std::snprintf(value, sizeof(value), "%.4f", *aggregates.sensitivity);
      out << std::left << std::setw(18) << strategy << std::setw(12)
          << "sensitivity" << std::right << std::setw(6)
          << aggregates.overall.n << std::setw(10) << "-" << std::setw(16)
          << "-" << std::setw(10) << value << '\n';
    }
  }

  const std::string csv_text = csv.str();
  if (!csv_out.empty()) {
    std::ofstream file(csv_out);
    if (!file) throw IoError("cannot write CSV " + csv_out.string());
    file << csv_text;
  }
  return csv_text;
}

}  // namespace ccd::run
