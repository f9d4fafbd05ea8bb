#pragma once

// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 the conflict-decode authors

/**
 * @file lm_source.hpp
 * @brief Abstract next-token distribution provider.
 *
 * An LmSource answers the same question a causal LM answers: given an
 * optional context segment, the query, and the generated prefix, what is the
 * distribution over the next token? Passing a context yields the
 * with-context conditional; passing std::nullopt yields the parametric
 * (no-context) conditional. Implementations must be deterministic: identical
 * arguments always produce identical distributions, and const instances are
 * safe to share across decoding workers.
 */

#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ccd/distribution.hpp"
#include "ccd/errors.hpp"

namespace ccd::lm {

/// Reserved sentinel ids shared by every source.
inline constexpr TokenId kBosId = 0;
inline constexpr TokenId kEosId = 1;

inline constexpr const char* kBosText = "<bos>";
inline constexpr const char* kEosText = "<eos>";

/// Closed, ordered token inventory. Ids are positions in the ordered list;
/// ids 0 and 1 are always the BOS and EOS sentinels.
class Vocabulary {
 public:
  Vocabulary() = default;

  /// Tokens must be unique; BOS/EOS are prepended unless already present in
  /// the expected slots.
  static Vocabulary from_tokens(std::vector<std::string> tokens);

  int size() const { return static_cast<int>(tokens_.size()); }

  const std::string& token(TokenId id) const;

  /// Throws UnknownTokenId for out-of-vocabulary text.
  TokenId id_of(const std::string& token) const;

  bool contains(const std::string& token) const {
    return ids_.find(token) != ids_.end();
  }

  const std::vector<std::string>& tokens() const { return tokens_; }

  /// Whitespace-split a line and map each piece; unknown pieces throw.
  std::vector<TokenId> encode_line(const std::string& line) const;

  std::string decode(std::span<const TokenId> ids) const;

  void check_ids(std::span<const TokenId> ids) const;

 private:
  std::vector<std::string> tokens_;
  std::map<std::string, TokenId> ids_;
};

using TokenIds = std::vector<TokenId>;

class LmSource {
 public:
  virtual ~LmSource() = default;

  virtual const Vocabulary& vocab() const = 0;

  /// Next-token distribution conditioned on (context ⊕ query ⊕ prefix) when
  /// a context is given, or (query ⊕ prefix) otherwise.
  virtual TokenDistribution next_distribution(
      const std::optional<TokenIds>& context, const TokenIds& query,
      const TokenIds& prefix) const = 0;
};

}  // namespace ccd::lm
