// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The lidarsynth Authors

#include <gtest/gtest.h>

#include <cmath>

#include "lidarsynth/error.hpp"
#include "lidarsynth/ops.hpp"
#include "lidarsynth/optim.hpp"

using namespace lidarsynth;

TEST(ParamStore, KindsDecideRequiresGrad) {
  ParamStore s;
  s.add("w", Tensor::zeros({2, 3}), ParamKind::trainable);
  s.add("f", Tensor::zeros({4}), ParamKind::frozen);
  s.add("buf", Tensor::zeros({5}), ParamKind::buffer);
  EXPECT_TRUE(s.get("w").requires_grad());
  EXPECT_FALSE(s.get("f").requires_grad());
  EXPECT_FALSE(s.get("buf").requires_grad());
  EXPECT_EQ(s.trainable_count(), 6u);
  EXPECT_EQ(s.parameter_count(), 10u);
  EXPECT_EQ(s.trainable_names(), std::vector<std::string>{"w"});
  s.set_kind("f", ParamKind::trainable);
  EXPECT_TRUE(s.get("f").requires_grad());
  EXPECT_THROW(s.set_kind("buf", ParamKind::trainable), InvalidArgument);
  EXPECT_THROW(s.add("w", Tensor::zeros({1}), ParamKind::trainable), InvalidArgument);
  EXPECT_THROW(s.get("missing"), InvalidArgument);
}

TEST(ParamStore, CloneIsDeep) {
  ParamStore s;
  s.add("w", Tensor::from({2}, {1, 2}), ParamKind::trainable);
  s.entry("w").adam.m = {0.5f, 0.5f};
  auto c = s.clone();
  s.get("w").mutable_values()[0] = 9.0f;
  EXPECT_FLOAT_EQ(c.get("w").values()[0], 1.0f);
  EXPECT_EQ(c.entry("w").adam.m, (std::vector<float>{0.5f, 0.5f}));
  EXPECT_TRUE(c.get("w").requires_grad());
}

TEST(Adam, FirstStepMovesByLearningRate) {
  // With bias correction the first update is lr * g / (|g| + eps) per element.
  ParamStore s;
  s.add("w", Tensor::from({3}, {1.0f, -2.0f, 0.5f}), ParamKind::trainable);
  const std::vector<float> g{0.3f, -4.0f, 1e-3f};
  weighted_sum(s.get("w"), g).backward();
  adam_step(s, {0.01f});
  const auto v = s.get("w").values();
  EXPECT_NEAR(v[0], 1.0f - 0.01f, 1e-6f);
  EXPECT_NEAR(v[1], -2.0f + 0.01f, 1e-6f);
  EXPECT_NEAR(v[2], 0.5f - 0.01f * 1e-3f / (1e-3f + 1e-8f), 1e-6f);
  EXPECT_EQ(s.entry("w").adam.step, 1u);
}

TEST(Adam, MatchesClosedFormOverSteps) {
  ParamStore s;
  s.add("w", Tensor::from({1}, {0.0f}), ParamKind::trainable);
  double m = 0, v = 0, w = 0;
  const double lr = 0.05, b1 = 0.9, b2 = 0.999, eps = 1e-8;
  for (int t = 1; t <= 5; ++t) {
    const double g = 2.0 * (w - 3.0);  // d/dw (w - 3)^2
    const std::vector<float> cot{static_cast<float>(g)};
    weighted_sum(s.get("w"), cot).backward();
    adam_step(s, {static_cast<float>(lr)});
    s.zero_grad();
    m = b1 * m + (1 - b1) * g;
    v = b2 * v + (1 - b2) * g * g;
    w -= lr * (m / (1 - std::pow(b1, t))) / (std::sqrt(v / (1 - std::pow(b2, t))) + eps);
    EXPECT_NEAR(s.get("w").values()[0], w, 1e-5) << "step " << t;
  }
}

TEST(Adam, SkipsFrozenAndRequiresGradients) {
  ParamStore s;
  s.add("w", Tensor::from({1}, {1.0f}), ParamKind::trainable);
  s.add("f", Tensor::from({1}, {1.0f}), ParamKind::frozen);
  EXPECT_THROW(adam_step(s, {}), InvalidArgument);
  sum(add(s.get("w"), s.get("f"))).backward();
  adam_step(s, {0.1f});
  EXPECT_FLOAT_EQ(s.get("f").values()[0], 1.0f);
  EXPECT_NE(s.get("w").values()[0], 1.0f);
}

TEST(Adam, MinimizesQuadratic) {
  ParamStore s;
  s.add("w", Tensor::from({2}, {5.0f, -5.0f}), ParamKind::trainable);
  const auto target = Tensor::from({1, 2}, {1.0f, 2.0f});
  const std::vector<float> rows{1.0f};
  for (int i = 0; i < 500; ++i) {
    mmse_loss(reshape(s.get("w"), {1, 2}), target, rows).backward();
    adam_step(s, {0.05f});
    s.zero_grad();
  }
  EXPECT_NEAR(s.get("w").values()[0], 1.0f, 1e-2f);
  EXPECT_NEAR(s.get("w").values()[1], 2.0f, 1e-2f);
}
