// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 the conflict-decode authors

#include "ccd/wire.hpp"

#include <cmath>

#include <json.hpp>

namespace ccd::wire {

namespace {

std::string truncate_for_diagnostics(const std::string& line) {
  constexpr std::size_t kMax = 200;
  if (line.size() <= kMax) return line;
  return line.substr(0, kMax) + "...";
}

void check_finite(const std::vector<double>& values, const std::string& line) {
  for (double v : values) {
    if (!std::isfinite(v)) {
      throw ProtocolError("non-finite value in logits line: " +
                          truncate_for_diagnostics(line));
    }
  }
}

}  // namespace

std::string encode_hello(const Hello& hello) {
  nlohmann::json doc = {{"type", "hello"}, {"vocab", hello.vocab}};
  return doc.dump();
}

std::string encode_request(const NextRequest& request) {
  nlohmann::json doc;
  doc["type"] = "next";
  doc["session"] = request.session;
  doc["variant"] = request.with_context ? "with" : "without";
  if (request.context.has_value()) {
    doc["context"] = *request.context;
  } else {
    doc["context"] = nullptr;
  }
  doc["query"] = request.query;
  doc["prefix"] = request.prefix;
  return doc.dump();
}

std::string encode_logits(const LogitsResponse& response) {
  nlohmann::json doc = {{"type", "logits"},
                        {"session", response.session},
                        {"values", response.values}};
  return doc.dump();
}

std::string encode_error(const ErrorMessage& error) {
  nlohmann::json doc = {{"type", "error"}, {"message", error.message}};
  return doc.dump();
}

ServerMessage parse_server_line(const std::string& line) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(line);
  } catch (const nlohmann::json::exception& e) {
    throw ProtocolError(std::string("malformed JSON line: ") + e.what() +
                        " in: " + truncate_for_diagnostics(line));
  }
  try {
    const std::string type = doc.at("type").get<std::string>();
    if (type == "hello") {
      return Hello{doc.at("vocab").get<std::vector<std::string>>()};
    }
    if (type == "logits") {
      LogitsResponse response{doc.at("session").get<std::string>(),
                              doc.at("values").get<std::vector<double>>()};
      check_finite(response.values, line);
      return response;
    }
    if (type == "error") {
      return ErrorMessage{doc.at("message").get<std::string>()};
    }
    throw ProtocolError("unknown message type '" + type +
                        "' in: " + truncate_for_diagnostics(line));
  } catch (const nlohmann::json::exception& e) {
    throw ProtocolError(std::string("bad message shape: ") + e.what() +
                        " in: " + truncate_for_diagnostics(line));
  }
}

NextRequest parse_request_line(const std::string& line) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(line);
  } catch (const nlohmann::json::exception& e) {
    throw ProtocolError(std::string("malformed JSON line: ") + e.what() +
                        " in: " + truncate_for_diagnostics(line));
  }
  try {
    if (doc.at("type").get<std::string>() != "next") {
      throw ProtocolError("expected type 'next' in: " +
                          truncate_for_diagnostics(line));
    }
    NextRequest request;
    request.session = doc.at("session").get<std::string>();
    const std::string variant = doc.at("variant").get<std::string>();
    if (variant != "with" && variant != "without") {
      throw ProtocolError("unknown variant '" + variant + "'");
    }
    request.with_context = variant == "with";
    if (!doc.at("context").is_null()) {
      request.context = doc.at("context").get<lm::TokenIds>();
    }
    request.query = doc.at("query").get<lm::TokenIds>();
    request.prefix = doc.at("prefix").get<lm::TokenIds>();
    return request;
  } catch (const nlohmann::json::exception& e) {
    throw ProtocolError(std::string("bad request shape: ") + e.what() +
                        " in: " + truncate_for_diagnostics(line));
  }
}

}  // namespace ccd::wire
