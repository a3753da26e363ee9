#include "dmwat/text/encoder.hpp"

#include <cmath>
#include <memory>
#include <stdexcept>

#include "dmwat/core/ops.hpp"
#include "dmwat/text/attention.hpp"

namespace dmwat::text {

void TextEncoderConfig::validate() const {
  if (embed_dim == 0 || num_layers == 0 || num_heads == 0 || max_len == 0 ||
      relative_bucket_k == 0 || mlp_ratio == 0) {
    throw std::invalid_argument("text encoder sizes must be positive");
  }
  if (embed_dim % num_heads != 0) {
    throw std::invalid_argument("embed_dim must be divisible by num_heads");
  }
  if (emd_layers > num_layers) throw std::invalid_argument("emd_layers exceeds num_layers");
}

nlohmann::json to_json(const TextEncoderConfig& c) {
  return {{"embed_dim", c.embed_dim},   {"num_layers", c.num_layers},
          {"num_heads", c.num_heads},   {"max_len", c.max_len},
          {"relative_bucket_k", c.relative_bucket_k},
          {"emd_layers", c.emd_layers}, {"mlp_ratio", c.mlp_ratio}};
}

TextEncoderConfig text_config_from_json(const nlohmann::json& j) {
  TextEncoderConfig c;
  c.embed_dim = j.value("embed_dim", c.embed_dim);
  c.num_layers = j.value("num_layers", c.num_layers);
  c.num_heads = j.value("num_heads", c.num_heads);
  c.max_len = j.value("max_len", c.max_len);
  c.relative_bucket_k = j.value("relative_bucket_k", c.relative_bucket_k);
  c.emd_layers = j.value("emd_layers", c.emd_layers);
  c.mlp_ratio = j.value("mlp_ratio", c.mlp_ratio);
  c.validate();
  return c;
}

TextEncoder::TextEncoder(const TextEncoderConfig& cfg, std::size_t vocab_size, std::uint64_t seed)
    : cfg_(cfg), vocab_size_(vocab_size) {
  cfg_.validate();
  if (vocab_size_ <= kNumReserved) throw std::invalid_argument("vocabulary has no corpus tokens");
  Rng rng(seed);
  const std::size_t d = cfg_.embed_dim, dh = cfg_.head_dim();
  emb_.content = normal_param({vocab_size_, d}, 1.0, rng);
  emb_.position = normal_param({cfg_.num_buckets(), d}, 1.0, rng);
  emb_norm_ = LayerNormAffine(d);
  const double proj_std = std::sqrt(1.0 / static_cast<double>(d));
  for (std::size_t l = 0; l < cfg_.num_layers; ++l) {
    abs_pos_.push_back(normal_param({cfg_.max_len, d}, 0.02, rng));
    Layer layer;
    layer.ln1 = LayerNormAffine(d);
    layer.ln2 = LayerNormAffine(d);
    for (std::size_t h = 0; h < cfg_.num_heads; ++h) {
      layer.q.emplace_back(d, dh, rng);
      layer.k.emplace_back(d, dh, rng);
      layer.v.emplace_back(d, dh, rng);
      layer.q_rel.push_back(normal_param({d, dh}, proj_std, rng));
      layer.k_rel.push_back(normal_param({d, dh}, proj_std, rng));
    }
    layer.proj = Linear(d, d, rng);
    layer.fc1 = Linear(d, d * cfg_.mlp_ratio, rng);
    layer.fc2 = Linear(d * cfg_.mlp_ratio, d, rng);
    layers_.push_back(std::move(layer));
  }
  final_norm_ = LayerNormAffine(d);
  mlm_head_ = Linear(d, vocab_size_, rng);
  cls_head_ = Linear(d, kNumClasses, rng);
}

bool TextEncoder::layer_uses_absolute(std::size_t layer) const {
  return layer + cfg_.emd_layers >= cfg_.num_layers;
}

Tensor TextEncoder::content_embeddings(std::span<const std::size_t> ids) const {
  for (auto id : ids)
    if (id >= vocab_size_) throw std::out_of_range("token id outside vocabulary");
  return embed_lookup(emb_.content, ids);
}

EncoderTrace TextEncoder::forward_content(const Tensor& content, std::span<const std::size_t> ids,
                                          bool keep_attention) const {
  const std::size_t n = ids.size();
  if (n == 0 || n > cfg_.max_len) throw ShapeError("sequence length must be in [1, max_len]");
  if (content.rank() != 2 || content.dim(0) != n || content.dim(1) != cfg_.embed_dim) {
    throw ShapeError("content rows " + shape_str(content.shape()) + " do not match a sequence of " +
                     std::to_string(n) + " tokens");
  }
  const auto pad = std::make_unique<bool[]>(n);
  for (std::size_t i = 0; i < n; ++i) pad[i] = ids[i] == kPadId;
  const std::span<const bool> key_mask(pad.get(), n);
  const std::size_t k = cfg_.relative_bucket_k;

  EncoderTrace trace;
  Tensor x = emb_norm_(content);
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    const Layer& L = layers_[l];
    if (layer_uses_absolute(l)) x = add(x, slice_rows(abs_pos_[l], 0, n));
    const Tensor h = L.ln1(x);
    std::vector<Tensor> heads;
    Tensor attn_sum;
    for (std::size_t hd = 0; hd < cfg_.num_heads; ++hd) {
      const AttentionResult r =
          disentangled_attention(L.q[hd](h), L.k[hd](h), L.v[hd](h),
                                 matmul(emb_.position, L.q_rel[hd]),
                                 matmul(emb_.position, L.k_rel[hd]), k, key_mask);
      heads.push_back(r.output);
      if (keep_attention) attn_sum = attn_sum.defined() ? add(attn_sum, r.weights) : r.weights;
    }
    if (keep_attention) {
      trace.attention.push_back(scale(attn_sum, 1.0 / static_cast<double>(cfg_.num_heads)));
    }
    x = add(x, L.proj(concat(heads, 1)));
    x = add(x, L.fc2(gelu(L.fc1(L.ln2(x)))));
  }
  trace.hidden = final_norm_(x);
  return trace;
}

Tensor TextEncoder::hidden(std::span<const std::size_t> ids) const {
  return forward_content(content_embeddings(ids), ids).hidden;
}

Tensor TextEncoder::class_logits(const Tensor& hidden) const { return cls_head_(row(hidden, 0)); }

Tensor TextEncoder::mlm_logits(const Tensor& rows) const { return mlm_head_(rows); }

EmbeddingVector TextEncoder::encode(const ClinicalNote& note) const {
  NoGradGuard ng;
  // Trailing PADs are invisible to every other position, so dropping them
  // leaves the CLS state unchanged.
  const auto ids = note.trimmed_ids();
  const Tensor cls = row(hidden(ids), 0);
  return {{cls.values().begin(), cls.values().end()}};
}

std::array<double, kNumClasses> TextEncoder::probabilities(const ClinicalNote& note) const {
  NoGradGuard ng;
  const auto p = softmax_values(class_logits(hidden(note.trimmed_ids())).values());
  return {p[0], p[1], p[2]};
}

ParameterSet TextEncoder::parameters() const {
  ParameterSet ps;
  ps.add("content", emb_.content);
  ps.add("relative", emb_.position);
  emb_norm_.register_into(ps, "emb_norm");
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    const std::string p = "layer" + std::to_string(l) + ".";
    const Layer& L = layers_[l];
    ps.add(p + "abs_pos", abs_pos_[l]);
    L.ln1.register_into(ps, p + "ln1");
    L.ln2.register_into(ps, p + "ln2");
    for (std::size_t h = 0; h < cfg_.num_heads; ++h) {
      const std::string hp = p + "head" + std::to_string(h) + ".";
      L.q[h].register_into(ps, hp + "q");
      L.k[h].register_into(ps, hp + "k");
      L.v[h].register_into(ps, hp + "v");
      ps.add(hp + "q_rel", L.q_rel[h]);
      ps.add(hp + "k_rel", L.k_rel[h]);
    }
    L.proj.register_into(ps, p + "proj");
    L.fc1.register_into(ps, p + "fc1");
    L.fc2.register_into(ps, p + "fc2");
  }
  final_norm_.register_into(ps, "final_norm");
  mlm_head_.register_into(ps, "mlm_head");
  cls_head_.register_into(ps, "cls_head");
  return ps;
}

void TextEncoder::zero_relative_embeddings() {
  for (auto& x : emb_.position.values_mut()) x = 0.0;
}

}  // namespace dmwat::text
