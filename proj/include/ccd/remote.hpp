#pragma once

// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 the conflict-decode authors

/**
 * @file remote.hpp
 * @brief Client for external logit providers speaking the NDJSON protocol.
 *
 * Lock-step: one in-flight request per session, no pipelining — the decoding
 * loop is sequential per sequence anyway. A client is single-owner; the
 * harness opens one connection per concurrent worker.
 */

#include <chrono>
#include <memory>
#include <string>

#include "ccd/lm_source.hpp"
#include "ccd/wire.hpp"

namespace ccd::lm {

/// Line-oriented byte channel over a pair of file descriptors with a read
/// deadline. Owns the descriptors.
class LineChannel {
 public:
  LineChannel(int read_fd, int write_fd);
  ~LineChannel();

  LineChannel(const LineChannel&) = delete;
  LineChannel& operator=(const LineChannel&) = delete;

  /// Reads one '\n'-terminated line. Throws TimeoutError past the deadline
  /// and TransportError on EOF or I/O failure.
  std::string read_line(std::chrono::milliseconds timeout);

  /// Writes data plus a trailing newline. Throws TransportError on failure.
  void write_line(const std::string& line);

 private:
  int read_fd_;
  int write_fd_;
  std::string buffer_;
};

class RemoteLogitClient {
 public:
  static constexpr std::chrono::milliseconds kDefaultTimeout =
      std::chrono::milliseconds(30'000);

  /// Connects over TCP and performs the handshake.
  static std::unique_ptr<RemoteLogitClient> connect_tcp(
      const std::string& host, int port,
      std::chrono::milliseconds timeout = kDefaultTimeout);

  /// Adopts existing descriptors (stdio, socketpair, ...) and performs the
  /// handshake.
  static std::unique_ptr<RemoteLogitClient> from_fds(
      int read_fd, int write_fd,
      std::chrono::milliseconds timeout = kDefaultTimeout);

  const std::vector<std::string>& vocab_tokens() const { return vocab_; }

  /// One request/response exchange. Throws ProtocolError on malformed or
  /// out-of-session replies, VocabMismatch when the response length differs
  /// from the handshake vocabulary, TimeoutError and TransportError from the
  /// channel, and ServerError when the server reports an error object.
  std::vector<double> next_logits(const std::string& session,
                                  bool with_context,
                                  const std::optional<TokenIds>& context,
                                  const TokenIds& query,
                                  const TokenIds& prefix);

 private:
  RemoteLogitClient(std::unique_ptr<LineChannel> channel,
                    std::chrono::milliseconds timeout);
  void handshake();

  std::unique_ptr<LineChannel> channel_;
  std::chrono::milliseconds timeout_;
  std::vector<std::string> vocab_;
};

/// LmSource adapter over a remote client. next_distribution converts the
/// returned logits with from_logits.
class RemoteSource final : public LmSource {
 public:
  RemoteSource(std::unique_ptr<RemoteLogitClient> client, std::string session);

  const Vocabulary& vocab() const override { return vocab_; }

  TokenDistribution next_distribution(const std::optional<TokenIds>& context,
                                      const TokenIds& query,
                                      const TokenIds& prefix) const override;

 private:
  std::unique_ptr<RemoteLogitClient> client_;
  std::string session_;
  Vocabulary vocab_;
};

}  // namespace ccd::lm
