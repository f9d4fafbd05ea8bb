#pragma once

// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 the conflict-decode authors

/**
 * @file wire.hpp
 * @brief Newline-delimited JSON messages of the remote logit protocol.
 *
 * One UTF-8 JSON object per line, finite decimal floats:
 *   handshake (server -> client): {"type":"hello","vocab":["<bos>","<eos>",...]}
 *   request   (client -> server): {"type":"next","session":s,"variant":"with"|"without",
 *                                  "context":[ids]|null,"query":[ids],"prefix":[ids]}
 *   response  (server -> client): {"type":"logits","session":s,"values":[floats]}
 *   error     (server -> client): {"type":"error","message":m}
 */

#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "ccd/lm_source.hpp"

namespace ccd::wire {

struct Hello {
  std::vector<std::string> vocab;
};

struct NextRequest {
  std::string session;
  bool with_context = false;
  std::optional<lm::TokenIds> context;
  lm::TokenIds query;
  lm::TokenIds prefix;
};

struct LogitsResponse {
  std::string session;
  std::vector<double> values;
};

struct ErrorMessage {
  std::string message;
};

using ServerMessage = std::variant<Hello, LogitsResponse, ErrorMessage>;

std::string encode_hello(const Hello& hello);
std::string encode_request(const NextRequest& request);
std::string encode_logits(const LogitsResponse& response);
std::string encode_error(const ErrorMessage& error);

/// Parses one server->client line. Throws ProtocolError on malformed JSON,
/// unknown type, or non-finite floats; the offending line is kept in the
/// message for diagnostics.
ServerMessage parse_server_line(const std::string& line);

/// Parses one client->server line (used by servers and the test double).
NextRequest parse_request_line(const std::string& line);

}  // namespace ccd::wire
