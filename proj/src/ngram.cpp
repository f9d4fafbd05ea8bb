// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 the conflict-decode authors

#include "ccd/ngram.hpp"

#include <algorithm>
#include <fstream>

#include <json.hpp>

namespace ccd::lm {

namespace {

/// BOS-prepend / EOS-append when the sequence lacks them.
TokenIds sentinel_wrap(const TokenIds& sequence) {
  TokenIds wrapped;
  wrapped.reserve(sequence.size() + 2);
  if (sequence.empty() || sequence.front() != kBosId) wrapped.push_back(kBosId);
  wrapped.insert(wrapped.end(), sequence.begin(), sequence.end());
  if (sequence.empty() || sequence.back() != kEosId) wrapped.push_back(kEosId);
  return wrapped;
}

TokenIds padded_history(const TokenIds& sequence, std::size_t end_pos,
                        int history_len) {
  TokenIds history(static_cast<std::size_t>(history_len), kBosId);
  for (int slot = history_len - 1; slot >= 0; --slot) {
    const std::ptrdiff_t pos =
        static_cast<std::ptrdiff_t>(end_pos) - (history_len - slot);
    if (pos < 0) break;
    history[static_cast<std::size_t>(slot)] =
        sequence[static_cast<std::size_t>(pos)];
  }
  return history;
}

}  // namespace

NgramModel NgramModel::train(const std::vector<TokenIds>& corpus,
                             const Vocabulary& vocab, NgramOptions options) {
  if (corpus.empty()) throw EmptyCorpus("train: corpus is empty");
  if (options.order < 1) throw BadConfig("train: order must be >= 1");
  if (!(options.add_k > 0.0)) throw BadConfig("train: add_k must be > 0");

  NgramModel model(options, vocab);
  const int history_len = options.order - 1;
  for (const TokenIds& sequence : corpus) {
    vocab.check_ids(sequence);
    const TokenIds wrapped = sentinel_wrap(sequence);
    for (std::size_t pos = 1; pos < wrapped.size(); ++pos) {
      const TokenId next = wrapped[pos];
      const TokenIds history = padded_history(wrapped, pos, history_len);
      model.counts_[history][next] += 1.0;
      model.totals_[history] += 1.0;
      model.unigram_[next] += 1.0;
      model.unigram_total_ += 1.0;
    }
  }
  return model;
}

const NgramModel::CountTable* NgramModel::history_counts(
    const TokenIds& history) const {
  auto it = counts_.find(history);
  return it == counts_.end() ? nullptr : &it->second;
}

double NgramModel::history_total(const TokenIds& history) const {
  auto it = totals_.find(history);
  return it == totals_.end() ? 0.0 : it->second;
}

TokenIds NgramModel::history_of(const TokenIds& conditioning) const {
  const int history_len = options_.order - 1;
  if (history_len == 0) return {};
  if (conditioning.empty()) return {};
  return padded_history(conditioning, conditioning.size(), history_len);
}

TokenDistribution NgramModel::conditional(const TokenIds& conditioning) const {
  vocab_.check_ids(conditioning);
  const TokenIds history = history_of(conditioning);
  const CountTable* table = nullptr;
  if (!(options_.order > 1 && conditioning.empty())) {
    table = history_counts(history);
  }
  if (table == nullptr) table = &unigram_;  // backoff

  const int size = vocab_.size();
  const double k = options_.add_k;
  double total = 0.0;
  for (const auto& [token, count] : *table) {
    (void)token;
    total += count;
  }
  std::vector<double> probs(static_cast<std::size_t>(size));
  const double denom = total + k * size;
  for (TokenId id = 0; id < size; ++id) {
    auto it = table->find(id);
    const double count = it == table->end() ? 0.0 : it->second;
    probs[static_cast<std::size_t>(id)] = (count + k) / denom;
  }
  return TokenDistribution::from_probs(probs);
}

void NgramModel::save(const std::filesystem::path& file) const {
  nlohmann::json doc;
  doc["order"] = options_.order;
  doc["add_k"] = options_.add_k;
  doc["vocab"] = vocab_.tokens();
  nlohmann::json histories = nlohmann::json::array();
  for (const auto& [history, table] : counts_) {
    nlohmann::json entry;
    entry["h"] = history;
    nlohmann::json counts = nlohmann::json::array();
    for (const auto& [token, count] : table) {
      counts.push_back({token, count});
    }
    entry["c"] = std::move(counts);
    histories.push_back(std::move(entry));
  }
  doc["histories"] = std::move(histories);
  std::ofstream out(file);
  if (!out) throw IoError("cannot write model file " + file.string());
  out << doc.dump() << '\n';
}

NgramModel NgramModel::load(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw IoError("cannot open model file " + file.string());
  nlohmann::json doc;
  try {
    in >> doc;
    NgramOptions options{doc.at("order").get<int>(),
                         doc.at("add_k").get<double>()};
    Vocabulary vocab =
        Vocabulary::from_tokens(doc.at("vocab").get<std::vector<std::string>>());
    NgramModel model(options, std::move(vocab));
    for (const auto& entry : doc.at("histories")) {
      TokenIds history = entry.at("h").get<TokenIds>();
      CountTable table;
      double total = 0.0;
      for (const auto& pair : entry.at("c")) {
        const TokenId token = pair.at(0).get<TokenId>();
        const double count = pair.at(1).get<double>();
        table[token] = count;
        total += count;
        model.unigram_[token] += count;
        model.unigram_total_ += count;
      }
      model.totals_[history] = total;
      model.counts_[std::move(history)] = std::move(table);
    }
    return model;
  } catch (const nlohmann::json::exception& e) {
    throw BadConfig("model " + file.string() + ": " + e.what());
  }
}

NgramSource::NgramSource(NgramModel model, ContextAbsorption absorption)
    : model_(std::move(model)), absorption_(absorption) {
  if (absorption_.window_weight < 0.0 || absorption_.presence_weight < 0.0 ||
      absorption_.window_decay < 0.0 || absorption_.window_decay > 1.0) {
    throw BadConfig("context absorption weights out of range");
  }
}

TokenDistribution NgramSource::next_distribution(
    const std::optional<TokenIds>& context, const TokenIds& query,
    const TokenIds& prefix) const {
  const Vocabulary& vocab = model_.vocab();
  vocab.check_ids(query);
  vocab.check_ids(prefix);
  if (context.has_value()) vocab.check_ids(*context);

  TokenIds conditioning;
  if (context.has_value()) {
    conditioning.insert(conditioning.end(), context->begin(), context->end());
  }
  conditioning.insert(conditioning.end(), query.begin(), query.end());
  conditioning.insert(conditioning.end(), prefix.begin(), prefix.end());

  const TokenIds history = model_.history_of(conditioning);
  const NgramModel::CountTable* base = nullptr;
  if (!(model_.order() > 1 && conditioning.empty())) {
    base = model_.history_counts(history);
  }
  if (base == nullptr) base = &model_.unigram_counts();

  const int size = vocab.size();
  std::vector<double> counts(static_cast<std::size_t>(size), 0.0);
  double total = 0.0;
  for (const auto& [token, count] : *base) {
    counts[static_cast<std::size_t>(token)] += count;
    total += count;
  }

  if (context.has_value() && !context->empty()) {
    // Window evidence: context n-grams whose history matches the current one.
    const int history_len = model_.order() - 1;
    double weight = absorption_.window_weight;
    for (std::size_t pos = static_cast<std::size_t>(history_len);
         pos < context->size(); ++pos) {
      bool match = true;
      for (int slot = 0; slot < history_len; ++slot) {
        if ((*context)[pos - static_cast<std::size_t>(history_len - slot)] !=
            history[static_cast<std::size_t>(slot)]) {
          match = false;
          break;
        }
      }
      if (match) {
        counts[static_cast<std::size_t>((*context)[pos])] += weight;
        total += weight;
      }
      weight *= absorption_.window_decay;
    }
    // Presence boost for each distinct context token.
    std::vector<bool> seen(static_cast<std::size_t>(size), false);
    for (TokenId id : *context) {
      if (!seen[static_cast<std::size_t>(id)]) {
        seen[static_cast<std::size_t>(id)] = true;
        counts[static_cast<std::size_t>(id)] += absorption_.presence_weight;
        total += absorption_.presence_weight;
      }
    }
  }

  const double k = model_.add_k();
  const double denom = total + k * size;
  std::vector<double> probs(static_cast<std::size_t>(size));
  for (int id = 0; id < size; ++id) {
    probs[static_cast<std::size_t>(id)] =
        (counts[static_cast<std::size_t>(id)] + k) / denom;
  }
  return TokenDistribution::from_probs(probs);
}

}  // namespace ccd::lm
