// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The lidarsynth Authors

#include "lidarsynth/model.hpp"

#include <random>

#include "lidarsynth/error.hpp"

namespace lidarsynth {
namespace {

constexpr float kInitStd = 0.02f;

class Initializer {
 public:
  Initializer(ParamStore& store, std::uint64_t seed) : store_(store), rng_(seed) {}

  void normal(const std::string& name, Shape shape, float mean, ParamKind kind) {
    std::normal_distribution<float> dist(mean, kInitStd);
    std::vector<float> v(shape_numel(shape));
    for (auto& x : v) x = dist(rng_);
    store_.add(name, Tensor::from(std::move(shape), std::move(v)), kind);
  }
  void constant(const std::string& name, Shape shape, float value, ParamKind kind) {
    store_.add(name, Tensor::full(std::move(shape), value), kind);
  }
  void linear(const std::string& prefix, std::size_t in, std::size_t out, ParamKind kind) {
    normal(prefix + ".w", {in, out}, 0.0f, kind);
    constant(prefix + ".b", {out}, 0.0f, kind);
  }
  void layer_norm(const std::string& prefix, std::size_t d, ParamKind kind) {
    constant(prefix + ".g", {d}, 1.0f, kind);
    constant(prefix + ".b", {d}, 0.0f, kind);
  }
  void encoder_layer(const std::string& prefix, std::size_t d, std::size_t ffn, ParamKind kind) {
    layer_norm(prefix + ".ln1", d, kind);
    for (const char* p : {".attn.q", ".attn.k", ".attn.v", ".attn.o"}) linear(prefix + p, d, d, kind);
    layer_norm(prefix + ".ln2", d, kind);
    linear(prefix + ".ffn1", d, ffn, kind);
    linear(prefix + ".ffn2", ffn, d, kind);
  }

 private:
  ParamStore& store_;
  Rng rng_;
};

std::string encoder_prefix(Modality m) { return "encoder." + std::string(modality_name(m)); }

std::size_t layer_params(std::size_t d, std::size_t ffn) {
  return 2 * d + 4 * (d * d + d) + 2 * d + (d * ffn + ffn) + (ffn * d + d);
}

struct LayerView {
  Tensor ln1_g, ln1_b, ln2_g, ln2_b, ffn1_w, ffn1_b, ffn2_w, ffn2_b;
  AttentionParams attn;
};

LayerView layer_view(const ParamStore& s, const std::string& p) {
  LayerView v;
  v.ln1_g = s.get(p + ".ln1.g");
  v.ln1_b = s.get(p + ".ln1.b");
  v.ln2_g = s.get(p + ".ln2.g");
  v.ln2_b = s.get(p + ".ln2.b");
  v.ffn1_w = s.get(p + ".ffn1.w");
  v.ffn1_b = s.get(p + ".ffn1.b");
  v.ffn2_w = s.get(p + ".ffn2.w");
  v.ffn2_b = s.get(p + ".ffn2.b");
  v.attn = {s.get(p + ".attn.q.w"), s.get(p + ".attn.q.b"), s.get(p + ".attn.k.w"), s.get(p + ".attn.k.b"),
            s.get(p + ".attn.v.w"), s.get(p + ".attn.v.b"), s.get(p + ".attn.o.w"), s.get(p + ".attn.o.b")};
  return v;
}

// Pre-norm encoder layer:
//   h = x + drop(attn(ln1(x)));  out = h + drop(ffn2(drop(relu(ffn1(ln2(h))))))
Tensor encoder_layer(const Tensor& x, const LayerView& p, std::size_t n_heads, float drop, Mode mode, Rng& rng,
                     AttentionProbs* probs) {
  const Tensor a = multi_head_self_attention(layer_norm(x, p.ln1_g, p.ln1_b), p.attn, n_heads, probs);
  const Tensor h = add(x, dropout(a, drop, mode, rng));
  Tensor f = relu(linear(layer_norm(h, p.ln2_g, p.ln2_b), p.ffn1_w, p.ffn1_b));
  f = linear(dropout(f, drop, mode, rng), p.ffn2_w, p.ffn2_b);
  return add(h, dropout(f, drop, mode, rng));
}

}  // namespace

ParamStore init_params(const ModelConfig& config, std::uint64_t seed) {
  validate_model(config);
  ParamStore store;
  Initializer init(store, seed);
  for (auto m : kModalities) {
    const auto& e = config.encoder(m);
    const auto kind = e.frozen ? ParamKind::frozen : ParamKind::trainable;
    const auto p = encoder_prefix(m);
    const std::size_t patch_dim = e.channels * e.patch_size * e.patch_size;
    init.linear(p + ".patch", patch_dim, e.d_model, kind);
    init.normal(p + ".cls", {1, e.d_model}, 0.0f, kind);
    init.normal(p + ".pos", {e.patch_count() + 1, e.d_model}, 0.0f, kind);
    for (std::size_t l = 0; l < e.depth; ++l) init.encoder_layer(p + ".layer" + std::to_string(l), e.d_model, e.ffn_dim, kind);
    if (e.depth > 0) init.layer_norm(p + ".ln_f", e.d_model, kind);
    init.linear(p + ".head", e.d_model, kEmbeddingDim, kind);
  }

  const auto& f = config.fusion;
  const auto t = ParamKind::trainable;
  if (f.mode == FusionMode::transformer) {
    init.normal("fusion.type", {kModalityCount, f.d_model}, 0.0f, t);
    for (std::size_t l = 0; l < f.n_layers; ++l) init.encoder_layer("fusion.layer" + std::to_string(l), f.d_model, f.ffn_dim, t);
  }
  init.linear("fusion.proj", kModalityCount * f.d_model, f.latent_dim, t);

  const auto& d = config.decoder;
  init.linear("decoder.fc", f.latent_dim, d.seed_theta * d.seed_phi, t);
  std::size_t in = 1;
  for (std::size_t l = 0; l <= d.filters.size(); ++l) {
    const bool last = l == d.filters.size();
    const std::size_t out = last ? 1 : d.filters[l];
    const std::string p = "decoder.conv" + std::to_string(l + 1);
    init.normal(p + ".w", {in, out, d.kernel, d.kernel}, 0.0f, t);
    init.constant(p + ".b", {out}, 0.0f, t);
    if (!last) {
      const std::string bn = "decoder.bn" + std::to_string(l + 1);
      init.normal(bn + ".g", {out}, 1.0f, t);
      init.constant(bn + ".b", {out}, 0.0f, t);
      init.constant(bn + ".running_mean", {out}, 0.0f, ParamKind::buffer);
      init.constant(bn + ".running_var", {out}, 1.0f, ParamKind::buffer);
    }
    in = out;
  }
  return store;
}

std::size_t encoder_param_count(const EncoderConfig& e) {
  const std::size_t d = e.d_model;
  const std::size_t patch_dim = e.channels * e.patch_size * e.patch_size;
  std::size_t n = patch_dim * d + d;     // patch embedding
  n += d + (e.patch_count() + 1) * d;    // cls token + positions
  n += e.depth * layer_params(d, e.ffn_dim);
  if (e.depth > 0) n += 2 * d;           // final norm
  n += d * kEmbeddingDim + kEmbeddingDim;  // head
  return n;
}

std::size_t fusion_param_count(const FusionConfig& f) {
  std::size_t n = kModalityCount * f.d_model * f.latent_dim + f.latent_dim;
  if (f.mode == FusionMode::transformer) n += kModalityCount * f.d_model + f.n_layers * layer_params(f.d_model, f.ffn_dim);
  return n;
}

std::size_t decoder_param_count(const DecoderConfig& d, std::size_t latent_dim) {
  const std::size_t seed = d.seed_theta * d.seed_phi;
  std::size_t n = latent_dim * seed + seed;
  std::size_t in = 1;
  const std::size_t kk = d.kernel * d.kernel;
  for (auto out : d.filters) {
    n += kk * in * out + out + 2 * out;  // kernel, bias, batch-norm gain and bias
    in = out;
  }
  return n + kk * in + 1;
}

std::size_t param_count(const ModelConfig& config) {
  std::size_t n = 0;
  for (auto m : kModalities) n += encoder_param_count(config.encoder(m));
  return n + fusion_param_count(config.fusion) + decoder_param_count(config.decoder, config.fusion.latent_dim);
}

Tensor patchify(const Tensor& images, std::size_t patch_size) {
  if (images.rank() != 4) throw InvalidArgument("patchify: images must be [B, C, H, W]");
  const std::size_t B = images.dim(0), C = images.dim(1), H = images.dim(2), W = images.dim(3);
  if (patch_size == 0 || H % patch_size || W % patch_size) {
    throw InvalidArgument("patchify: image " + std::to_string(H) + "x" + std::to_string(W) +
                          " not divisible by patch size " + std::to_string(patch_size));
  }
  const std::size_t ph = H / patch_size, pw = W / patch_size, pd = C * patch_size * patch_size;
  const auto v = images.values();
  std::vector<float> out(B * ph * pw * pd);
  std::size_t o = 0;
  for (std::size_t b = 0; b < B; ++b)
    for (std::size_t py = 0; py < ph; ++py)
      for (std::size_t px = 0; px < pw; ++px)
        for (std::size_t c = 0; c < C; ++c)
          for (std::size_t y = 0; y < patch_size; ++y)
            for (std::size_t x = 0; x < patch_size; ++x)
              out[o++] = v[((b * C + c) * H + py * patch_size + y) * W + px * patch_size + x];
  return Tensor::from({B, ph * pw, pd}, std::move(out));
}

LidarModel::LidarModel(ModelConfig config) : config_(std::move(config)), params_(init_params(config_, config_.seed)) {}

LidarModel::LidarModel(ModelConfig config, ParamStore params) : config_(std::move(config)), params_(std::move(params)) {
  const ParamStore expected = init_params(config_, 0);
  for (const auto& e : expected.entries()) {
    if (!params_.contains(e.name)) throw InvalidArgument("missing parameter: " + e.name);
    if (params_.get(e.name).shape() != e.value.shape()) {
      throw InvalidArgument("parameter " + e.name + " has shape " + shape_string(params_.get(e.name).shape()) +
                            ", expected " + shape_string(e.value.shape()));
    }
    auto& mine = params_.entry(e.name);
    mine.kind = e.kind;
    mine.value.set_requires_grad(e.kind == ParamKind::trainable);
  }
  if (params_.size() != expected.size()) throw InvalidArgument("parameter store has unexpected extra entries");
}

Tensor LidarModel::encode(Modality modality, const Tensor& images) const {
  const auto& e = config_.encoder(modality);
  Tensor batch = images;
  const bool single = images.rank() <= 3;
  if (images.rank() == 2) batch = reshape(images, {1, 1, images.dim(0), images.dim(1)});
  else if (images.rank() == 3) batch = reshape(images, {1, images.dim(0), images.dim(1), images.dim(2)});
  else if (images.rank() != 4) throw InvalidArgument("encode: image must be [H,W], [C,H,W] or [B,C,H,W]");
  if (batch.dim(1) != e.channels || batch.dim(2) != e.height || batch.dim(3) != e.width) {
    throw InvalidArgument("encode: " + std::string(modality_name(modality)) + " expects " + std::to_string(e.channels) +
                          "x" + std::to_string(e.height) + "x" + std::to_string(e.width) + " images, got " +
                          shape_string(images.shape()));
  }
  const std::size_t B = batch.dim(0);
  const auto p = encoder_prefix(modality);
  const auto& s = params_;
  Tensor tokens = linear(patchify(batch, e.patch_size), s.get(p + ".patch.w"), s.get(p + ".patch.b"));
  tokens = concat({tile(s.get(p + ".cls"), B), tokens}, 1);
  tokens = add(tokens, s.get(p + ".pos"));
  Rng unused(0);
  for (std::size_t l = 0; l < e.depth; ++l) {
    tokens = encoder_layer(tokens, layer_view(s, p + ".layer" + std::to_string(l)), e.n_heads, 0.0f, Mode::eval, unused,
                           nullptr);
  }
  if (e.depth > 0) tokens = layer_norm(tokens, s.get(p + ".ln_f.g"), s.get(p + ".ln_f.b"));
  Tensor out = linear(select(tokens, 1, 0), s.get(p + ".head.w"), s.get(p + ".head.b"));
  return single ? reshape(out, {kEmbeddingDim}) : out;
}

Tensor LidarModel::fuse(const std::array<Tensor, kModalityCount>& embeddings, Mode mode, Rng& rng,
                        AttentionProbs* probs) {
  const auto& f = config_.fusion;
  const std::size_t B = embeddings[0].rank() == 2 ? embeddings[0].dim(0) : 1;
  std::vector<Tensor> slots;
  for (const auto& e : embeddings) {
    if (e.numel() != B * f.d_model) throw InvalidArgument("fuse: every embedding must be [B, 768]");
    slots.push_back(reshape(e, {B, 1, f.d_model}));
  }
  Tensor x = concat(slots, 1);
  if (f.mode == FusionMode::transformer) {
    x = add(x, params_.get("fusion.type"));
    for (std::size_t l = 0; l < f.n_layers; ++l) {
      x = encoder_layer(x, layer_view(params_, "fusion.layer" + std::to_string(l)), f.n_heads,
                        static_cast<float>(f.dropout), mode, rng, l + 1 == f.n_layers ? probs : nullptr);
    }
  }
  return linear(reshape(x, {B, kModalityCount * f.d_model}), params_.get("fusion.proj.w"), params_.get("fusion.proj.b"));
}

Tensor LidarModel::decode(const Tensor& latent, Mode mode) {
  const auto& d = config_.decoder;
  const std::size_t latent_dim = config_.fusion.latent_dim;
  if (latent.numel() % latent_dim != 0 || latent.shape().back() != latent_dim) {
    throw InvalidArgument("decode: latent must be [B, " + std::to_string(latent_dim) + "]");
  }
  const std::size_t B = latent.numel() / latent_dim;
  Tensor x = linear(reshape(latent, {B, latent_dim}), params_.get("decoder.fc.w"), params_.get("decoder.fc.b"));
  x = reshape(x, {B, 1, d.seed_phi, d.seed_theta});
  for (std::size_t l = 0; l <= d.filters.size(); ++l) {
    const std::string n = std::to_string(l + 1);
    x = conv_transpose2d(x, params_.get("decoder.conv" + n + ".w"), params_.get("decoder.conv" + n + ".b"), d.stride,
                         d.padding);
    if (l < d.filters.size()) {
      x = batch_norm2d(x, params_.get("decoder.bn" + n + ".g"), params_.get("decoder.bn" + n + ".b"),
                       params_.get("decoder.bn" + n + ".running_mean"), params_.get("decoder.bn" + n + ".running_var"),
                       mode);
    }
    x = relu(x);
  }
  return x;
}

Tensor LidarModel::forward(const std::array<Tensor, kModalityCount>& images, Mode mode, Rng& rng) {
  std::array<Tensor, kModalityCount> embeddings;
  for (auto m : kModalities) embeddings[static_cast<std::size_t>(m)] = encode(m, images[static_cast<std::size_t>(m)]);
  return decode(fuse(embeddings, mode, rng), mode);
}

}  // namespace lidarsynth
