#pragma once

// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 the conflict-decode authors

/**
 * @file bench.hpp
 * @brief Synthetic knowledge-conflict benchmark generator.
 *
 * A knowledge base of (subject, relation, object) facts is rendered into a
 * training corpus that an n-gram model memorizes (the parametric knowledge).
 * Instances then pair a one-sentence context with a two-token query:
 *   - ORIGINAL: the context asserts the KB object.
 *   - SWAP: the context asserts a different object (a real conflict).
 *   - SYNTH: the context asserts whatever the trained model already answers
 *     without context, so context and parametric knowledge agree.
 *
 * All generation is a pure function of the seed.
 */

#include <array>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "ccd/lm_source.hpp"
#include "ccd/ngram.hpp"
#include "ccd/rng.hpp"

namespace ccd::bench {

using lm::TokenIds;
using lm::Vocabulary;

struct Fact {
  TokenId subject = 0;
  TokenId relation = 0;
  TokenId object = 0;
};

struct Kb {
  Vocabulary vocab;
  std::vector<Fact> facts;
  TokenId period = 0;
  TokenId first_subject = 0;
  TokenId first_relation = 0;
  TokenId first_object = 0;
  int n_subjects = 0;
  int n_relations = 0;
  int n_objects = 0;

  /// Distinct object values appearing under `relation`, ascending.
  std::vector<TokenId> objects_of_relation(TokenId relation) const;
};

/// Deterministic KB over generated token names; one object per
/// (subject, relation), unique pairs by construction.
Kb generate_kb(int n_subjects, int n_relations, int n_objects,
               std::uint64_t seed);

struct CorpusOptions {
  /// Fraction of each fact's lines that carry a sentence-final period.
  double period_fraction = 0.0;
  /// Fraction of each fact's lines whose object is replaced by a Zipf draw
  /// from the object pool (distributional noise in the parametric knowledge).
  double noise_fraction = 0.0;
};

/// Renders each fact `repetitions` times as "<bos> subject relation object
/// [.] <eos>" and shuffles the lines; pure function of the seed.
std::vector<TokenIds> emit_corpus(const Kb& kb, int repetitions,
                                  std::uint64_t seed,
                                  const CorpusOptions& options = {});

enum class Label { Original, Swap, Synth };

const char* label_name(Label label);
Label label_from_name(const std::string& name);

struct ConflictInstance {
  std::string id;
  Label label = Label::Original;
  TokenIds context_tokens;
  TokenIds query_tokens;
  TokenId gold_answer = 0;
  TokenId parametric_answer = 0;
};

/// Builds one instance from a fact. SWAP draws the substitute object
/// uniformly from the other objects of the same relation when available,
/// else from the global pool; SYNTH queries `model` without context and
/// asserts its argmax in the context. Throws PoolTooSmall when no distinct
/// swap target exists and ModelRequired when SYNTH lacks a model.
ConflictInstance make_instance(const Kb& kb, const Fact& fact, Label label,
                               const lm::LmSource* model, std::uint64_t seed);

struct BenchConfig {
  int n_subjects = 12;
  int n_relations = 3;
  int n_objects = 6;
  int repetitions = 100;
  int n_instances = 200;
  double mix_original = 0.0;
  double mix_swap = 0.5;
  double mix_synth = 0.5;
  double period_fraction = 0.1;
  double noise_fraction = 0.02;
  int ngram_order = 3;
  double add_k = 0.1;
  std::uint64_t seed = 0;

  void validate() const;

  /// Instance count per label by largest-remainder rounding; the mix is
  /// matched exactly.
  std::array<int, 3> label_counts() const;
};

struct Suite {
  BenchConfig config;
  Kb kb;
  std::vector<TokenIds> corpus;
  std::vector<ConflictInstance> instances;
};

/// Generates a full suite in memory.
Suite build_suite(const BenchConfig& config);

/// Generates and persists a suite: <dir>/suite.json, <dir>/corpus.txt,
/// <dir>/instances.jsonl. Byte-identical for identical configs.
Suite build_suite(const BenchConfig& config,
                  const std::filesystem::path& out_dir);

Suite load_suite(const std::filesystem::path& dir);

}  // namespace ccd::bench
