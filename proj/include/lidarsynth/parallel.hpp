// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The lidarsynth Authors

#pragma once

#include <cstddef>
#include <functional>

namespace lidarsynth {

/// Worker cap from LIDARSYNTH_THREADS, else the hardware concurrency (>= 1).
std::size_t worker_count();

/// Runs fn(i) for i in [0, n) on up to worker_count() threads. Iterations
/// must be independent; the first exception thrown is rethrown here.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

}  // namespace lidarsynth
