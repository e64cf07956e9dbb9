// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The lidarsynth Authors

#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace lidarsynth {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitMalformed = 2;
inline constexpr int kExitNumeric = 3;

/// Runs one subcommand. `args` excludes the program name.
/// Returns 0 ok, 1 usage error, 2 malformed input, 3 numeric failure.
int run_cli(const std::vector<std::string>& args);
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace lidarsynth
