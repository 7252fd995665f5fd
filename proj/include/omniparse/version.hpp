/*
 * Copyright (c) 2026 The omniparse authors
 *
 * SPDX-License-Identifier: Apache-2.0
 */

#pragma once

namespace omniparse {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace omniparse
