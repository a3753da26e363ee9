#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include <nlohmann/json.hpp>

#include "dmwat/core/params.hpp"
#include "dmwat/text/vocab.hpp"
#include "dmwat/types.hpp"

namespace dmwat::text {

struct TextEncoderConfig {
  std::size_t embed_dim = 64;
  std::size_t num_layers = 4;
  std::size_t num_heads = 4;
  std::size_t max_len = 32;
  std::size_t relative_bucket_k = 8;
  std::size_t emd_layers = 1;  // final layers that receive absolute positions
  std::size_t mlp_ratio = 2;

  void validate() const;
  std::size_t head_dim() const { return embed_dim / num_heads; }
  std::size_t num_buckets() const { return 2 * relative_bucket_k + 1; }
};

nlohmann::json to_json(const TextEncoderConfig& cfg);
TextEncoderConfig text_config_from_json(const nlohmann::json& j);

/// Content table (per token) and relative-position table (per bucket).
/// Separate parameters, never tied.
struct DisentangledEmbeddings {
  Tensor content;   // [vocab, D]
  Tensor position;  // [2k+1, D]
};

struct EncoderTrace {
  Tensor hidden;  // [n, D] after the final norm
  std::vector<Tensor> attention;  // per layer, head-averaged [n, n], when requested
};

/// DeBERTa-style encoder: disentangled self-attention in every layer with
/// shared relative-position embeddings, and learned absolute positions added
/// to the inputs of the final `emd_layers` layers only.
class TextEncoder {
 public:
  TextEncoder(const TextEncoderConfig& cfg, std::size_t vocab_size, std::uint64_t seed);

  const TextEncoderConfig& config() const { return cfg_; }
  std::size_t vocab_size() const { return vocab_size_; }
  const DisentangledEmbeddings& embeddings() const { return emb_; }

  /// Raw content rows for `ids`: [n, D].
  Tensor content_embeddings(std::span<const std::size_t> ids) const;
  /// Runs the stack on given content rows; `ids` supply the PAD mask.
  EncoderTrace forward_content(const Tensor& content, std::span<const std::size_t> ids,
                               bool keep_attention = false) const;
  Tensor hidden(std::span<const std::size_t> ids) const;

  Tensor class_logits(const Tensor& hidden) const;  // from the CLS row
  Tensor mlm_logits(const Tensor& rows) const;      // [m, D] -> [m, vocab]

  /// CLS-position final state. No tape.
  EmbeddingVector encode(const ClinicalNote& note) const;
  std::array<double, kNumClasses> probabilities(const ClinicalNote& note) const;

  ParameterSet parameters() const;
  /// Parameters of the absolute-position table feeding `layer`.
  const Tensor& absolute_positions(std::size_t layer) const { return abs_pos_.at(layer); }
  bool layer_uses_absolute(std::size_t layer) const;
  void zero_relative_embeddings();

  bool trained() const { return trained_; }
  void set_trained(bool t) { trained_ = t; }

 private:
  struct Layer {
    LayerNormAffine ln1, ln2;
    std::vector<Linear> q, k, v;         // content projections per head
    std::vector<Tensor> q_rel, k_rel;    // [D, dh] relative projections per head
    Linear proj, fc1, fc2;
  };

  TextEncoderConfig cfg_;
  std::size_t vocab_size_;
  DisentangledEmbeddings emb_;
  LayerNormAffine emb_norm_;
  std::vector<Tensor> abs_pos_;  // [max_len, D] per layer
  std::vector<Layer> layers_;
  LayerNormAffine final_norm_;
  Linear mlm_head_;
  Linear cls_head_;
  bool trained_ = false;
};

}  // namespace dmwat::text
