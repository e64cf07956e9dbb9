// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The lidarsynth Authors

#include "lidarsynth/optim.hpp"

#include <cmath>

#include "lidarsynth/error.hpp"

namespace lidarsynth {

Tensor& ParamStore::add(const std::string& name, Tensor value, ParamKind kind) {
  if (name.empty()) throw InvalidArgument("parameter name must not be empty");
  if (contains(name)) throw InvalidArgument("duplicate parameter name: " + name);
  value.set_requires_grad(kind == ParamKind::trainable);
  index_.emplace(name, entries_.size());
  entries_.push_back(ParamEntry{name, std::move(value), kind, {}});
  return entries_.back().value;
}

ParamEntry& ParamStore::entry(const std::string& name) {
  auto it = index_.find(name);
  if (it == index_.end()) throw InvalidArgument("unknown parameter: " + name);
  return entries_[it->second];
}

const ParamEntry& ParamStore::entry(const std::string& name) const {
  auto it = index_.find(name);
  if (it == index_.end()) throw InvalidArgument("unknown parameter: " + name);
  return entries_[it->second];
}

std::vector<std::string> ParamStore::trainable_names() const {
  std::vector<std::string> names;
  for (const auto& e : entries_)
    if (e.kind == ParamKind::trainable) names.push_back(e.name);
  return names;
}

std::size_t ParamStore::trainable_count() const {
  std::size_t n = 0;
  for (const auto& e : entries_)
    if (e.kind == ParamKind::trainable) n += e.value.numel();
  return n;
}

std::size_t ParamStore::parameter_count() const {
  std::size_t n = 0;
  for (const auto& e : entries_)
    if (e.kind != ParamKind::buffer) n += e.value.numel();
  return n;
}

void ParamStore::set_kind(const std::string& name, ParamKind kind) {
  auto& e = entry(name);
  if ((e.kind == ParamKind::buffer) != (kind == ParamKind::buffer)) {
    throw InvalidArgument("cannot convert between buffers and parameters: " + name);
  }
  e.kind = kind;
  e.value.set_requires_grad(kind == ParamKind::trainable);
}

void ParamStore::zero_grad() {
  for (auto& e : entries_) e.value.zero_grad();
}

ParamStore ParamStore::clone() const {
  ParamStore copy;
  for (const auto& e : entries_) {
    auto& added = copy.add(e.name, e.value.detach(), e.kind);
    (void)added;
    copy.entries_.back().adam = e.adam;
  }
  return copy;
}

void adam_step(ParamStore& store, const AdamOptions& options) {
  for (auto& e : store.entries()) {
    if (e.kind != ParamKind::trainable) continue;
    if (!e.value.has_grad()) throw InvalidArgument("adam_step: no gradient for " + e.name);
  }
  for (auto& e : store.entries()) {
    if (e.kind != ParamKind::trainable) continue;
    const auto g = e.value.grad();
    auto p = e.value.mutable_values();
    auto& st = e.adam;
    if (st.m.size() != p.size()) {
      st.m.assign(p.size(), 0.0f);
      st.v.assign(p.size(), 0.0f);
    }
    ++st.step;
    const double t = static_cast<double>(st.step);
    const double c1 = 1.0 - std::pow(static_cast<double>(options.beta1), t);
    const double c2 = 1.0 - std::pow(static_cast<double>(options.beta2), t);
    for (std::size_t i = 0; i < p.size(); ++i) {
      st.m[i] = options.beta1 * st.m[i] + (1.0f - options.beta1) * g[i];
      st.v[i] = options.beta2 * st.v[i] + (1.0f - options.beta2) * g[i] * g[i];
      const double m_hat = st.m[i] / c1;
      const double v_hat = st.v[i] / c2;
      p[i] -= static_cast<float>(options.lr * m_hat / (std::sqrt(v_hat) + options.eps));
    }
  }
}

}  // namespace lidarsynth
