// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 the conflict-decode authors

#include "ccd/bench.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>

#include <json.hpp>

#include "ccd/log.hpp"

namespace ccd::bench {

namespace {

std::string numbered(const char* prefix, int index) {
  char buffer[32];
  std::snprintf(buffer, sizeof(buffer), "%s%02d", prefix, index);
  return buffer;
}

/// Zipf-weighted draw over [0, n): weight of rank j is 1/(j+1).
int zipf_draw(int n, SplitMix64& rng) {
  double total = 0.0;
  for (int j = 0; j < n; ++j) total += 1.0 / (j + 1);
  double u = rng.uniform() * total;
  for (int j = 0; j < n; ++j) {
    u -= 1.0 / (j + 1);
    if (u <= 0.0) return j;
  }
  return n - 1;
}

}  // namespace

std::vector<TokenId> Kb::objects_of_relation(TokenId relation) const {
  std::set<TokenId> values;
  for (const Fact& fact : facts) {
    if (fact.relation == relation) values.insert(fact.object);
  }
  return {values.begin(), values.end()};
}

Kb generate_kb(int n_subjects, int n_relations, int n_objects,
               std::uint64_t seed) {
  if (n_subjects < 1 || n_relations < 1 || n_objects < 1) {
    throw PoolTooSmall("generate_kb: all pool sizes must be >= 1");
  }

  std::vector<std::string> tokens = {"."};
  for (int i = 0; i < n_subjects; ++i) tokens.push_back(numbered("subj_", i));
  for (int i = 0; i < n_relations; ++i) tokens.push_back(numbered("rel_", i));
  for (int i = 0; i < n_objects; ++i) tokens.push_back(numbered("obj_", i));

  Kb kb;
  kb.vocab = Vocabulary::from_tokens(std::move(tokens));
  kb.period = kb.vocab.id_of(".");
  kb.first_subject = kb.period + 1;
  kb.first_relation = kb.first_subject + n_subjects;
  kb.first_object = kb.first_relation + n_relations;
  kb.n_subjects = n_subjects;
  kb.n_relations = n_relations;
  kb.n_objects = n_objects;

  SplitMix64 rng(seed);
  for (int r = 0; r < n_relations; ++r) {
    for (int s = 0; s < n_subjects; ++s) {
      Fact fact;
      fact.subject = kb.first_subject + s;
      fact.relation = kb.first_relation + r;
      fact.object =
          kb.first_object + static_cast<TokenId>(rng.below(
                                static_cast<std::uint64_t>(n_objects)));
      kb.facts.push_back(fact);
    }
    // A relation whose subjects all share one object admits no same-relation
    // swap; reassign one fact when the pool allows it.
    if (n_objects >= 2 && n_subjects >= 2) {
      auto values = kb.objects_of_relation(kb.first_relation + r);
      if (values.size() < 2) {
        Fact& fact = kb.facts[kb.facts.size() - 1];
        fact.object = kb.first_object +
                      (fact.object - kb.first_object + 1) % n_objects;
      }
    }
  }
  return kb;
}

std::vector<TokenIds> emit_corpus(const Kb& kb, int repetitions,
                                  std::uint64_t seed,
                                  const CorpusOptions& options) {
  if (repetitions < 1) throw BadConfig("emit_corpus: repetitions must be >= 1");
  if (options.period_fraction < 0.0 || options.period_fraction > 1.0 ||
      options.noise_fraction < 0.0 || options.noise_fraction > 1.0) {
    throw BadConfig("emit_corpus: fractions must be in [0, 1]");
  }

  SplitMix64 rng(seed);
  const int n_period = static_cast<int>(
      std::lround(options.period_fraction * repetitions));
  const int n_noise = static_cast<int>(
      std::lround(options.noise_fraction * repetitions));

  std::vector<TokenIds> lines;
  lines.reserve(kb.facts.size() * static_cast<std::size_t>(repetitions));
  for (std::size_t f = 0; f < kb.facts.size(); ++f) {
    const Fact& fact = kb.facts[f];
    SplitMix64 fact_rng = rng.split(f);
    for (int rep = 0; rep < repetitions; ++rep) {
      TokenId object = fact.object;
      if (rep >= repetitions - n_noise) {
        object = kb.first_object +
                 static_cast<TokenId>(zipf_draw(kb.n_objects, fact_rng));
      }
      TokenIds line = {lm::kBosId, fact.subject, fact.relation, object};
      if (rep < n_period) line.push_back(kb.period);
      line.push_back(lm::kEosId);
      lines.push_back(std::move(line));
    }
  }
  deterministic_shuffle(lines, rng);
  return lines;
}

const char* label_name(Label label) {
  switch (label) {
    case Label::Original:
      return "ORIGINAL";
    case Label::Swap:
      return "SWAP";
    case Label::Synth:
      return "SYNTH";
  }
  return "?";
}

Label label_from_name(const std::string& name) {
  if (name == "ORIGINAL") return Label::Original;
  if (name == "SWAP") return Label::Swap;
  if (name == "SYNTH") return Label::Synth;
  throw BadConfig("unknown instance label '" + name + "'");
}

ConflictInstance make_instance(const Kb& kb, const Fact& fact, Label label,
                               const lm::LmSource* model, std::uint64_t seed) {
  ConflictInstance instance;
  instance.label = label;
  instance.query_tokens = {fact.subject, fact.relation};

  TokenId context_object = fact.object;
  instance.gold_answer = fact.object;
  instance.parametric_answer = fact.object;

  switch (label) {
    case Label::Original:
      break;
    case Label::Swap: {
      SplitMix64 rng(seed);
      std::vector<TokenId> pool = kb.objects_of_relation(fact.relation);
      std::erase(pool, fact.object);
      if (pool.empty()) {
        for (int j = 0; j < kb.n_objects; ++j) {
          const TokenId candidate = kb.first_object + j;
          if (candidate != fact.object) pool.push_back(candidate);
        }
      }
      if (pool.empty()) {
        throw PoolTooSmall("make_instance: no distinct swap object exists");
      }
      context_object = pool[rng.below(pool.size())];
      instance.gold_answer = context_object;
      break;
    }
    case Label::Synth: {
      if (model == nullptr) {
        throw ModelRequired("make_instance: SYNTH needs a trained model");
      }
      const TokenDistribution parametric = model->next_distribution(
          std::nullopt, instance.query_tokens, {});
      const TokenId answer = parametric.argmax();
      context_object = answer;
      instance.gold_answer = answer;
      instance.parametric_answer = answer;
      break;
    }
  }

  instance.context_tokens = {fact.subject, fact.relation, context_object,
                             kb.period};
  return instance;
}

void BenchConfig::validate() const {
  if (n_subjects < 1 || n_relations < 1 || n_objects < 1) {
    throw BadConfig("bench: pool sizes must be >= 1");
  }
  if (repetitions < 1) throw BadConfig("bench: repetitions must be >= 1");
  if (n_instances < 1) throw BadConfig("bench: n_instances must be >= 1");
  if (mix_original < 0.0 || mix_swap < 0.0 || mix_synth < 0.0) {
    throw BadConfig("bench: mix ratios must be >= 0");
  }
  const double total = mix_original + mix_swap + mix_synth;
  if (std::abs(total - 1.0) > 1e-9) {
    throw BadConfig("bench: mix ratios sum to " + std::to_string(total) +
                    ", expected 1");
  }
  if (period_fraction < 0.0 || period_fraction > 1.0 ||
      noise_fraction < 0.0 || noise_fraction > 1.0) {
    throw BadConfig("bench: fractions must be in [0, 1]");
  }
  if (ngram_order < 1) throw BadConfig("bench: ngram_order must be >= 1");
  if (!(add_k > 0.0)) throw BadConfig("bench: add_k must be > 0");
}

std::array<int, 3> BenchConfig::label_counts() const {
  const std::array<double, 3> ratios = {mix_original, mix_swap, mix_synth};
  std::array<int, 3> counts{};
  std::array<double, 3> remainders{};
  int assigned = 0;
  for (int i = 0; i < 3; ++i) {
    const double exact = ratios[static_cast<std::size_t>(i)] * n_instances;
    counts[static_cast<std::size_t>(i)] = static_cast<int>(std::floor(exact));
    remainders[static_cast<std::size_t>(i)] =
        exact - counts[static_cast<std::size_t>(i)];
    assigned += counts[static_cast<std::size_t>(i)];
  }
  while (assigned < n_instances) {
    int best = 0;
    for (int i = 1; i < 3; ++i) {
      if (remainders[static_cast<std::size_t>(i)] >
          remainders[static_cast<std::size_t>(best)]) {
        best = i;
      }
    }
    counts[static_cast<std::size_t>(best)] += 1;
    remainders[static_cast<std::size_t>(best)] = -1.0;
    assigned += 1;
  }
  return counts;
}

Suite build_suite(const BenchConfig& config) {
  config.validate();
  Suite suite;
  suite.config = config;

  SplitMix64 seeds(config.seed);
  const std::uint64_t kb_seed = seeds.next();
  const std::uint64_t corpus_seed = seeds.next();
  const std::uint64_t instance_seed_base = seeds.next();

  suite.kb = generate_kb(config.n_subjects, config.n_relations,
                         config.n_objects, kb_seed);
  suite.corpus = emit_corpus(
      suite.kb, config.repetitions, corpus_seed,
      {config.period_fraction, config.noise_fraction});

  const lm::NgramModel model = lm::NgramModel::train(
      suite.corpus, suite.kb.vocab, {config.ngram_order, config.add_k});
  const lm::NgramSource source(model);

  const std::array<int, 3> counts = config.label_counts();
  const std::array<Label, 3> labels = {Label::Original, Label::Swap,
                                       Label::Synth};
  SplitMix64 fact_picker(instance_seed_base);
  int index = 0;
  for (int l = 0; l < 3; ++l) {
    for (int i = 0; i < counts[static_cast<std::size_t>(l)]; ++i, ++index) {
      const Fact& fact =
          suite.kb.facts[fact_picker.below(suite.kb.facts.size())];
      ConflictInstance instance =
          make_instance(suite.kb, fact, labels[static_cast<std::size_t>(l)],
                        &source, fact_picker.split(
                            static_cast<std::uint64_t>(index)).next());
      char id[16];
      std::snprintf(id, sizeof(id), "i%04d", index);
      instance.id = id;
      suite.instances.push_back(std::move(instance));
    }
  }
  return suite;
}

Suite build_suite(const BenchConfig& config,
                  const std::filesystem::path& out_dir) {
  Suite suite = build_suite(config);

  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) throw IoError("cannot create suite directory " + out_dir.string());

  {
    nlohmann::json doc;
    doc["schema_version"] = 1;
    doc["vocab"] = suite.kb.vocab.tokens();
    doc["config"] = {{"n_subjects", config.n_subjects},
                     {"n_relations", config.n_relations},
                     {"n_objects", config.n_objects},
                     {"repetitions", config.repetitions},
                     {"n_instances", config.n_instances},
                     {"mix", {{"ORIGINAL", config.mix_original},
                              {"SWAP", config.mix_swap},
                              {"SYNTH", config.mix_synth}}},
                     {"period_fraction", config.period_fraction},
                     {"noise_fraction", config.noise_fraction},
                     {"ngram_order", config.ngram_order},
                     {"add_k", config.add_k},
                     {"seed", config.seed}};
    std::ofstream out(out_dir / "suite.json");
    if (!out) throw IoError("cannot write suite.json");
    out << doc.dump(2) << '\n';
  }
  {
    std::ofstream out(out_dir / "corpus.txt");
    if (!out) throw IoError("cannot write corpus.txt");
    for (const TokenIds& line : suite.corpus) {
      out << suite.kb.vocab.decode(line) << '\n';
    }
  }
  {
    std::ofstream out(out_dir / "instances.jsonl");
    if (!out) throw IoError("cannot write instances.jsonl");
    for (const ConflictInstance& instance : suite.instances) {
      nlohmann::json line = {{"id", instance.id},
                             {"label", label_name(instance.label)},
                             {"context", instance.context_tokens},
                             {"query", instance.query_tokens},
                             {"gold", instance.gold_answer},
                             {"parametric", instance.parametric_answer}};
      out << line.dump() << '\n';
    }
  }
  log::info("suite written to " + out_dir.string() + " (" +
            std::to_string(suite.instances.size()) + " instances)");
  return suite;
}

Suite load_suite(const std::filesystem::path& dir) {
  Suite suite;

  std::ifstream meta(dir / "suite.json");
  if (!meta) throw IoError("cannot open " + (dir / "suite.json").string());
  nlohmann::json doc;
  try {
    meta >> doc;
    suite.kb.vocab = Vocabulary::from_tokens(
        doc.at("vocab").get<std::vector<std::string>>());
    const auto& cfg = doc.at("config");
    suite.config.n_subjects = cfg.at("n_subjects").get<int>();
    suite.config.n_relations = cfg.at("n_relations").get<int>();
    suite.config.n_objects = cfg.at("n_objects").get<int>();
    suite.config.repetitions = cfg.at("repetitions").get<int>();
    suite.config.n_instances = cfg.at("n_instances").get<int>();
    suite.config.mix_original = cfg.at("mix").at("ORIGINAL").get<double>();
    suite.config.mix_swap = cfg.at("mix").at("SWAP").get<double>();
    suite.config.mix_synth = cfg.at("mix").at("SYNTH").get<double>();
    suite.config.period_fraction = cfg.at("period_fraction").get<double>();
    suite.config.noise_fraction = cfg.at("noise_fraction").get<double>();
    suite.config.ngram_order = cfg.at("ngram_order").get<int>();
    suite.config.add_k = cfg.at("add_k").get<double>();
    suite.config.seed = cfg.at("seed").get<std::uint64_t>();
  } catch (const nlohmann::json::exception& e) {
    throw BadConfig("suite.json: " + std::string(e.what()));
  }

  suite.kb.period = suite.kb.vocab.id_of(".");
  suite.kb.n_subjects = suite.config.n_subjects;
  suite.kb.n_relations = suite.config.n_relations;
  suite.kb.n_objects = suite.config.n_objects;
  suite.kb.first_subject = suite.kb.period + 1;
  suite.kb.first_relation = suite.kb.first_subject + suite.config.n_subjects;
  suite.kb.first_object = suite.kb.first_relation + suite.config.n_relations;

  std::ifstream corpus(dir / "corpus.txt");
  if (!corpus) throw IoError("cannot open " + (dir / "corpus.txt").string());
  std::string line;
  while (std::getline(corpus, line)) {
    if (!line.empty()) suite.corpus.push_back(suite.kb.vocab.encode_line(line));
  }
  if (suite.corpus.empty()) throw EmptyCorpus("corpus.txt is empty");

  std::ifstream instances(dir / "instances.jsonl");
  if (!instances) {
    throw IoError("cannot open " + (dir / "instances.jsonl").string());
  }
  std::size_t line_number = 0;
  while (std::getline(instances, line)) {
    ++line_number;
    if (line.empty()) continue;
    try {
      nlohmann::json entry = nlohmann::json::parse(line);
      ConflictInstance instance;
      instance.id = entry.at("id").get<std::string>();
      instance.label = label_from_name(entry.at("label").get<std::string>());
      instance.context_tokens = entry.at("context").get<TokenIds>();
      instance.query_tokens = entry.at("query").get<TokenIds>();
      instance.gold_answer = entry.at("gold").get<TokenId>();
      instance.parametric_answer = entry.at("parametric").get<TokenId>();
      suite.instances.push_back(std::move(instance));
    } catch (const nlohmann::json::exception& e) {
      throw BadConfig("instances.jsonl line " + std::to_string(line_number) +
                      ": " + e.what());
    }
  }
  if (suite.instances.empty()) throw BadConfig("instances.jsonl is empty");
  return suite;
}

}  // namespace ccd::bench
