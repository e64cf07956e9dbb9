// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The lidarsynth Authors

#pragma once

#include <cstddef>

namespace lidarsynth::detail {

/// Row-major C[m,n] = alpha * op(A)[m,k] * op(B)[k,n] + beta * C.
/// op(A) is A[m,k] (or A[k,m] transposed when trans_a); likewise for B.
void gemm(bool trans_a, bool trans_b, std::size_t m, std::size_t n, std::size_t k, float alpha,
          const float* a, const float* b, float beta, float* c);

}  // namespace lidarsynth::detail
