#pragma once

// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 the conflict-decode authors

#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <string>

namespace ccd::log {

enum class Level { Error = 0, Info = 1, Debug = 2 };

/// Level comes from CONFLICT_DECODE_LOG (error|info|debug), default error.
inline Level threshold() {
  static const Level level = [] {
    const char* env = std::getenv("CONFLICT_DECODE_LOG");
    if (env == nullptr) return Level::Error;
    if (std::strcmp(env, "debug") == 0) return Level::Debug;
    if (std::strcmp(env, "info") == 0) return Level::Info;
    return Level::Error;
  }();
  return level;
}

inline void write(Level level, const std::string& message) {
  if (level > threshold()) return;
  const char* tag = level == Level::Error ? "error"
                    : level == Level::Info ? "info"
                                           : "debug";
  std::fprintf(stderr, "[conflict-decode %s] %s\n", tag, message.c_str());
}

inline void error(const std::string& m) { write(Level::Error, m); }
inline void info(const std::string& m) { write(Level::Info, m); }
inline void debug(const std::string& m) { write(Level::Debug, m); }

}  // namespace ccd::log
