// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 the conflict-decode authors

#include "ccd/lm_source.hpp"

#include <sstream>

namespace ccd::lm {

Vocabulary Vocabulary::from_tokens(std::vector<std::string> tokens) {
  Vocabulary vocab;
  const bool has_sentinels = tokens.size() >= 2 && tokens[0] == kBosText &&
                             tokens[1] == kEosText;
  if (!has_sentinels) {
    tokens.insert(tokens.begin(), {kBosText, kEosText});
  }
  vocab.tokens_ = std::move(tokens);
  for (std::size_t i = 0; i < vocab.tokens_.size(); ++i) {
    auto [it, inserted] =
        vocab.ids_.emplace(vocab.tokens_[i], static_cast<TokenId>(i));
    if (!inserted) {
      throw BadConfig("vocabulary has duplicate token '" + vocab.tokens_[i] +
                      "'");
    }
  }
  return vocab;
}

const std::string& Vocabulary::token(TokenId id) const {
  if (id < 0 || id >= size()) {
    throw UnknownTokenId("token id " + std::to_string(id) +
                         " outside vocabulary of size " +
                         std::to_string(size()));
  }
  return tokens_[static_cast<std::size_t>(id)];
}

TokenId Vocabulary::id_of(const std::string& token) const {
  auto it = ids_.find(token);
  if (it == ids_.end()) {
    throw UnknownTokenId("token '" + token + "' not in vocabulary");
  }
  return it->second;
}

std::vector<TokenId> Vocabulary::encode_line(const std::string& line) const {
  std::vector<TokenId> out;
  std::istringstream stream(line);
  std::string piece;
  while (stream >> piece) out.push_back(id_of(piece));
  return out;
}

std::string Vocabulary::decode(std::span<const TokenId> ids) const {
  std::string out;
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (i > 0) out += ' ';
    out += token(ids[i]);
  }
  return out;
}

void Vocabulary::check_ids(std::span<const TokenId> ids) const {
  for (TokenId id : ids) {
    if (id < 0 || id >= size()) {
      throw UnknownTokenId("token id " + std::to_string(id) +
                           " outside vocabulary of size " +
                           std::to_string(size()));
    }
  }
}

}  // namespace ccd::lm
