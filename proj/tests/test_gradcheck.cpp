// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The lidarsynth Authors

#include <gtest/gtest.h>

#include "gradcheck.hpp"

namespace {

class GradCheck : public ::testing::TestWithParam<std::string> {};

TEST_P(GradCheck, MatchesOracle) {
  std::size_t shapes = 0;
  for (const auto& c : gradcheck::all_cases()) {
    if (c.op != GetParam()) continue;
    ++shapes;
    const auto r = gradcheck::run(c);
    EXPECT_LT(r.forward_error, 1e-5) << "shape #" << shapes << " forward";
    for (std::size_t a = 0; a < r.gradient_errors.size(); ++a)
      EXPECT_LT(r.gradient_errors[a], 1e-4) << "shape #" << shapes << " input " << a;
  }
  EXPECT_GE(shapes, GetParam() == "shape_ops" ? 1u : 3u);
}

INSTANTIATE_TEST_SUITE_P(Ops, GradCheck,
                         ::testing::Values("linear", "relu", "softmax", "layer_norm", "attention", "self_attention",
                                           "conv_transpose2d", "batch_norm", "mmse_loss", "shape_ops"),
                         [](const auto& info) { return info.param; });

}  // namespace
