// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 the conflict-decode authors

#include "ccd/remote.hpp"

#include <arpa/inet.h>
#include <netdb.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>

#include "ccd/log.hpp"

namespace ccd::lm {

namespace {

using Clock = std::chrono::steady_clock;

std::chrono::milliseconds remaining(Clock::time_point deadline) {
  return std::chrono::duration_cast<std::chrono::milliseconds>(deadline -
                                                               Clock::now());
}

}  // namespace

LineChannel::LineChannel(int read_fd, int write_fd)
    : read_fd_(read_fd), write_fd_(write_fd) {}

LineChannel::~LineChannel() {
  if (read_fd_ >= 0) ::close(read_fd_);
  if (write_fd_ >= 0 && write_fd_ != read_fd_) ::close(write_fd_);
}

std::string LineChannel::read_line(std::chrono::milliseconds timeout) {
  const Clock::time_point deadline = Clock::now() + timeout;
  while (true) {
    if (std::size_t pos = buffer_.find('\n'); pos != std::string::npos) {
      std::string line = buffer_.substr(0, pos);
      buffer_.erase(0, pos + 1);
      if (!line.empty() && line.back() == '\r') line.pop_back();
      return line;
    }

    const std::chrono::milliseconds left = remaining(deadline);
    if (left.count() <= 0) {
      throw TimeoutError("timed out waiting for a protocol line");
    }
    struct pollfd pfd{read_fd_, POLLIN, 0};
    const int ready = ::poll(&pfd, 1, static_cast<int>(left.count()));
    if (ready < 0) {
      if (errno == EINTR) continue;
      throw TransportError(std::string("poll failed: ") + std::strerror(errno));
    }
    if (ready == 0) {
      throw TimeoutError("timed out waiting for a protocol line");
    }

    char chunk[4096];
    const ssize_t n = ::read(read_fd_, chunk, sizeof(chunk));
    if (n < 0) {
      if (errno == EINTR) continue;
      throw TransportError(std::string("read failed: ") + std::strerror(errno));
    }
    if (n == 0) {
      throw TransportError("connection closed by peer");
    }
    buffer_.append(chunk, static_cast<std::size_t>(n));
  }
}

void LineChannel::write_line(const std::string& line) {
  std::string payload = line;
  payload.push_back('\n');
  std::size_t written = 0;
  while (written < payload.size()) {
    const ssize_t n =
        ::write(write_fd_, payload.data() + written, payload.size() - written);
    if (n < 0) {
      if (errno == EINTR) continue;
      throw TransportError(std::string("write failed: ") +
                           std::strerror(errno));
    }
    written += static_cast<std::size_t>(n);
  }
}

RemoteLogitClient::RemoteLogitClient(std::unique_ptr<LineChannel> channel,
                                     std::chrono::milliseconds timeout)
    : channel_(std::move(channel)), timeout_(timeout) {}

std::unique_ptr<RemoteLogitClient> RemoteLogitClient::connect_tcp(
    const std::string& host, int port, std::chrono::milliseconds timeout) {
  struct addrinfo hints{};
  hints.ai_family = AF_UNSPEC;
  hints.ai_socktype = SOCK_STREAM;
  struct addrinfo* results = nullptr;
  const std::string service = std::to_string(port);
  if (int rc = ::getaddrinfo(host.c_str(), service.c_str(), &hints, &results);
      rc != 0) {
    throw TransportError("cannot resolve " + host + ": " + gai_strerror(rc));
  }

  int fd = -1;
  std::string last_error = "no addresses";
  for (struct addrinfo* ai = results; ai != nullptr; ai = ai->ai_next) {
    fd = ::socket(ai->ai_family, ai->ai_socktype, ai->ai_protocol);
    if (fd < 0) {
      last_error = std::strerror(errno);
      continue;
    }
    if (::connect(fd, ai->ai_addr, ai->ai_addrlen) == 0) break;
    last_error = std::strerror(errno);
    ::close(fd);
    fd = -1;
  }
  ::freeaddrinfo(results);
  if (fd < 0) {
    throw TransportError("cannot connect to " + host + ":" + service + ": " +
                         last_error);
  }

  auto client = std::unique_ptr<RemoteLogitClient>(new RemoteLogitClient(
      std::make_unique<LineChannel>(fd, fd), timeout));
  client->handshake();
  return client;
}

std::unique_ptr<RemoteLogitClient> RemoteLogitClient::from_fds(
    int read_fd, int write_fd, std::chrono::milliseconds timeout) {
  auto client = std::unique_ptr<RemoteLogitClient>(new RemoteLogitClient(
      std::make_unique<LineChannel>(read_fd, write_fd), timeout));
  client->handshake();
  return client;
}

void RemoteLogitClient::handshake() {
  const std::string line = channel_->read_line(timeout_);
  const wire::ServerMessage message = wire::parse_server_line(line);
  if (const auto* hello = std::get_if<wire::Hello>(&message)) {
    if (hello->vocab.size() < 2) {
      throw ProtocolError("handshake vocabulary too small");
    }
    vocab_ = hello->vocab;
    log::debug("handshake complete, vocab size " +
               std::to_string(vocab_.size()));
    return;
  }
  if (const auto* error = std::get_if<wire::ErrorMessage>(&message)) {
    throw ServerError("server error during handshake: " + error->message);
  }
  throw ProtocolError("expected hello, got another message type");
}

std::vector<double> RemoteLogitClient::next_logits(
    const std::string& session, bool with_context,
    const std::optional<TokenIds>& context, const TokenIds& query,
    const TokenIds& prefix) {
  wire::NextRequest request;
  request.session = session;
  request.with_context = with_context;
  request.context = context;
  request.query = query;
  request.prefix = prefix;
  channel_->write_line(wire::encode_request(request));

  const std::string line = channel_->read_line(timeout_);
  const wire::ServerMessage message = wire::parse_server_line(line);
  if (const auto* error = std::get_if<wire::ErrorMessage>(&message)) {
    throw ServerError("server error: " + error->message);
  }
  const auto* logits = std::get_if<wire::LogitsResponse>(&message);
  if (logits == nullptr) {
    throw ProtocolError("expected logits response");
  }
  if (logits->session != session) {
    throw ProtocolError("response session '" + logits->session +
                        "' does not match request session '" + session + "'");
  }
  if (logits->values.size() != vocab_.size()) {
    throw VocabMismatch("logits length " +
                        std::to_string(logits->values.size()) +
                        " does not match handshake vocab size " +
                        std::to_string(vocab_.size()));
  }
  return logits->values;
}

RemoteSource::RemoteSource(std::unique_ptr<RemoteLogitClient> client,
                           std::string session)
    : client_(std::move(client)), session_(std::move(session)) {
  vocab_ = Vocabulary::from_tokens(client_->vocab_tokens());
}

TokenDistribution RemoteSource::next_distribution(
    const std::optional<TokenIds>& context, const TokenIds& query,
    const TokenIds& prefix) const {
  const std::vector<double> logits = client_->next_logits(
      session_, context.has_value(), context, query, prefix);
  return TokenDistribution::from_logits(logits);
}

}  // namespace ccd::lm
