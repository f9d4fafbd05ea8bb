#pragma once

// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 the conflict-decode authors

namespace ccd {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace ccd
