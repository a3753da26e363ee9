#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include <nlohmann/json.hpp>

#include "dmwat/core/params.hpp"
#include "dmwat/types.hpp"
#include "dmwat/vision/image.hpp"

namespace dmwat::vision {

enum class DistillMode { hard, soft };

struct VitConfig {
  std::size_t image_size = 32;
  std::size_t patch_size = 8;
  std::size_t embed_dim = 64;
  std::size_t num_layers = 4;
  std::size_t num_heads = 4;
  std::size_t mlp_ratio = 2;
  double distillation_alpha = 0.5;
  DistillMode distillation_mode = DistillMode::hard;
  double soft_temperature = 3.0;

  /// Throws std::invalid_argument on violated invariants.
  void validate() const;
  std::size_t grid() const { return image_size / patch_size; }
  std::size_t num_patches() const { return grid() * grid(); }
  std::size_t sequence_length() const { return num_patches() + 2; }
  std::size_t head_dim() const { return embed_dim / num_heads; }
};

nlohmann::json to_json(const VitConfig& cfg);
VitConfig vit_config_from_json(const nlohmann::json& j);

struct VitOutput {
  Tensor class_embedding;    // [D], position 0
  Tensor distill_embedding;  // [D], position 1
  Tensor patch_states;       // [num_patches, D], final block
  std::vector<Tensor> block_patch_states;  // per block, when requested
};

/// DeiT-style encoder: patch projection, learned class and distillation
/// tokens at positions 0 and 1, learned position embeddings, pre-norm
/// transformer blocks, and one linear head per token.
class VisionTransformer {
 public:
  VisionTransformer(const VitConfig& cfg, std::uint64_t seed);

  const VitConfig& config() const { return cfg_; }

  /// [(H/p)(W/p) + 2, D] token sequence including position embeddings.
  Tensor patch_embed(const ImageSample& img) const;
  VitOutput encode(const ImageSample& img, bool keep_block_states = false) const;

  Tensor class_logits(const VitOutput& out) const;
  Tensor distill_logits(const VitOutput& out) const;
  /// Inference logits: mean of the two heads.
  Tensor logits(const VitOutput& out) const;

  /// Fusion feature: mean of class and distillation embeddings. No tape.
  EmbeddingVector embedding(const ImageSample& img) const;
  std::array<double, kNumClasses> probabilities(const ImageSample& img) const;

  ParameterSet parameters() const;
  void zero_position_embeddings();

  /// Set by training and checkpoint loading; explanations refuse fresh models.
  bool trained() const { return trained_; }
  void set_trained(bool t) { trained_ = t; }

 private:
  struct Block {
    LayerNormAffine ln1, ln2;
    std::vector<Linear> q, k, v;  // one projection per head
    Linear proj;
    Linear fc1, fc2;
  };

  Tensor run_block(const Block& b, const Tensor& x) const;

  VitConfig cfg_;
  Linear patch_proj_;
  Tensor cls_token_;   // [1, D]
  Tensor dist_token_;  // [1, D]
  Tensor pos_embed_;   // [seq, D]
  std::vector<Block> blocks_;
  LayerNormAffine final_norm_;
  Linear cls_head_;
  Linear dist_head_;
  bool trained_ = false;
};

/// Patch pixels as a [num_patches, p*p*3] matrix, patches in raster order.
Tensor extract_patches(const ImageSample& img, std::size_t patch);

}  // namespace dmwat::vision
