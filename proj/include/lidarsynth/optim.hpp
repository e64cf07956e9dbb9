// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The lidarsynth Authors

#pragma once

#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

#include "lidarsynth/tensor.hpp"

namespace lidarsynth {

/// trainable: updated by Adam. frozen: a parameter excluded from
/// optimization. buffer: running state such as batch-norm statistics.
enum class ParamKind { trainable, frozen, buffer };

struct AdamState {
  std::vector<float> m;
  std::vector<float> v;
  std::uint64_t step = 0;
};

struct ParamEntry {
  std::string name;
  Tensor value;
  ParamKind kind = ParamKind::trainable;
  AdamState adam;
};

/// Insertion-ordered named parameters with their optimizer state.
class ParamStore {
 public:
  /// Registers a new tensor; trainable entries get requires_grad. Names must be unique.
  Tensor& add(const std::string& name, Tensor value, ParamKind kind);

  bool contains(const std::string& name) const { return index_.count(name) != 0; }
  ParamEntry& entry(const std::string& name);
  const ParamEntry& entry(const std::string& name) const;
  Tensor& get(const std::string& name) { return entry(name).value; }
  const Tensor& get(const std::string& name) const { return entry(name).value; }

  std::vector<ParamEntry>& entries() { return entries_; }
  const std::vector<ParamEntry>& entries() const { return entries_; }
  std::size_t size() const { return entries_.size(); }

  std::vector<std::string> trainable_names() const;
  std::size_t trainable_count() const;
  std::size_t parameter_count() const;  // trainable + frozen scalars, buffers excluded

  /// Marks a parameter trainable or frozen (buffers cannot change kind).
  void set_kind(const std::string& name, ParamKind kind);
  void zero_grad();

  /// Deep copy of every value (and Adam state); no shared storage.
  ParamStore clone() const;

 private:
  std::vector<ParamEntry> entries_;
  std::unordered_map<std::string, std::size_t> index_;
};

struct AdamOptions {
  float lr = 1e-3f;
  float beta1 = 0.9f;
  float beta2 = 0.999f;
  float eps = 1e-8f;
};

/// One bias-corrected Adam update of every trainable entry. Throws
/// InvalidArgument if a trainable entry has no gradient. Gradients are left
/// in place; call ParamStore::zero_grad() afterwards.
void adam_step(ParamStore& store, const AdamOptions& options);

}  // namespace lidarsynth
