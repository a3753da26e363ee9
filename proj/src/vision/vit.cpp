#include "dmwat/vision/vit.hpp"

#include <cmath>
#include <stdexcept>

namespace dmwat::vision {

void VitConfig::validate() const {
  if (patch_size == 0 || embed_dim == 0 || num_layers == 0 || num_heads == 0 || image_size == 0 ||
      mlp_ratio == 0) {
    throw std::invalid_argument("VitConfig sizes must be positive");
  }
  if (embed_dim % num_heads != 0) {
    throw std::invalid_argument("VitConfig: embed_dim must be divisible by num_heads");
  }
  if (image_size % patch_size != 0) {
    throw std::invalid_argument("VitConfig: image_size must be divisible by patch_size");
  }
  if (!(distillation_alpha >= 0.0 && distillation_alpha <= 1.0)) {
    throw std::invalid_argument("VitConfig: distillation_alpha must lie in [0,1]");
  }
  if (!(soft_temperature > 0.0)) {
    throw std::invalid_argument("VitConfig: soft_temperature must be positive");
  }
}

nlohmann::json to_json(const VitConfig& c) {
  return {{"image_size", c.image_size},
          {"patch_size", c.patch_size},
          {"embed_dim", c.embed_dim},
          {"num_layers", c.num_layers},
          {"num_heads", c.num_heads},
          {"mlp_ratio", c.mlp_ratio},
          {"distillation_alpha", c.distillation_alpha},
          {"distillation_mode", c.distillation_mode == DistillMode::hard ? "hard" : "soft"},
          {"soft_temperature", c.soft_temperature}};
}

VitConfig vit_config_from_json(const nlohmann::json& j) {
  VitConfig c;
  c.image_size = j.value("image_size", c.image_size);
  c.patch_size = j.value("patch_size", c.patch_size);
  c.embed_dim = j.value("embed_dim", c.embed_dim);
  c.num_layers = j.value("num_layers", c.num_layers);
  c.num_heads = j.value("num_heads", c.num_heads);
  c.mlp_ratio = j.value("mlp_ratio", c.mlp_ratio);
  c.distillation_alpha = j.value("distillation_alpha", c.distillation_alpha);
  const auto mode = j.value("distillation_mode", std::string("hard"));
  if (mode != "hard" && mode != "soft") {
    throw std::invalid_argument("distillation_mode must be \"hard\" or \"soft\"");
  }
  c.distillation_mode = mode == "hard" ? DistillMode::hard : DistillMode::soft;
  c.soft_temperature = j.value("soft_temperature", c.soft_temperature);
  c.validate();
  return c;
}

Tensor extract_patches(const ImageSample& img, std::size_t p) {
  if (p == 0 || img.height % p != 0 || img.width % p != 0) {
    throw ShapeError("image " + std::to_string(img.height) + "x" + std::to_string(img.width) +
                     " is not divisible by patch size " + std::to_string(p));
  }
  const std::size_t gh = img.height / p, gw = img.width / p;
  const std::size_t feat = p * p * 3;
  std::vector<double> out(gh * gw * feat);
  for (std::size_t pr = 0; pr < gh; ++pr) {
    for (std::size_t pc = 0; pc < gw; ++pc) {
      double* dst = out.data() + (pr * gw + pc) * feat;
      for (std::size_t r = 0; r < p; ++r)
        for (std::size_t c = 0; c < p; ++c)
          for (std::size_t ch = 0; ch < 3; ++ch)
            *dst++ = img.at(pr * p + r, pc * p + c, ch);
    }
  }
  return Tensor(Shape{gh * gw, feat}, std::move(out));
}

VisionTransformer::VisionTransformer(const VitConfig& cfg, std::uint64_t seed) : cfg_(cfg) {
  cfg_.validate();
  Rng rng(seed);
  const std::size_t d = cfg_.embed_dim, dh = cfg_.head_dim();
  patch_proj_ = Linear(cfg_.patch_size * cfg_.patch_size * 3, d, rng);
  cls_token_ = normal_param({1, d}, 0.02, rng);
  dist_token_ = normal_param({1, d}, 0.02, rng);
  pos_embed_ = normal_param({cfg_.sequence_length(), d}, 0.02, rng);
  for (std::size_t l = 0; l < cfg_.num_layers; ++l) {
    Block b;
    b.ln1 = LayerNormAffine(d);
    b.ln2 = LayerNormAffine(d);
    for (std::size_t h = 0; h < cfg_.num_heads; ++h) {
      b.q.emplace_back(d, dh, rng);
      b.k.emplace_back(d, dh, rng);
      b.v.emplace_back(d, dh, rng);
    }
    b.proj = Linear(d, d, rng);
    b.fc1 = Linear(d, d * cfg_.mlp_ratio, rng);
    b.fc2 = Linear(d * cfg_.mlp_ratio, d, rng);
    blocks_.push_back(std::move(b));
  }
  final_norm_ = LayerNormAffine(d);
  cls_head_ = Linear(d, kNumClasses, rng);
  dist_head_ = Linear(d, kNumClasses, rng);
}

Tensor VisionTransformer::patch_embed(const ImageSample& img) const {
  if (img.height % cfg_.patch_size != 0 || img.width % cfg_.patch_size != 0) {
    throw ShapeError("image dimensions not divisible by patch size");
  }
  if (img.height != cfg_.image_size || img.width != cfg_.image_size) {
    throw ShapeError("image is " + std::to_string(img.height) + "x" + std::to_string(img.width) +
                     ", encoder expects " + std::to_string(cfg_.image_size) + "x" +
                     std::to_string(cfg_.image_size));
  }
  const Tensor tokens = patch_proj_(extract_patches(img, cfg_.patch_size));
  return add(concat({cls_token_, dist_token_, tokens}, 0), pos_embed_);
}

Tensor VisionTransformer::run_block(const Block& b, const Tensor& x) const {
  const Tensor h = b.ln1(x);
  const double inv_scale = 1.0 / std::sqrt(static_cast<double>(cfg_.head_dim()));
  std::vector<Tensor> heads;
  heads.reserve(cfg_.num_heads);
  for (std::size_t i = 0; i < cfg_.num_heads; ++i) {
    const Tensor q = b.q[i](h), k = b.k[i](h), v = b.v[i](h);
    const Tensor attn = softmax(scale(matmul_nt(q, k), inv_scale), -1);
    heads.push_back(matmul(attn, v));
  }
  const Tensor y = add(x, b.proj(concat(heads, 1)));
  return add(y, b.fc2(gelu(b.fc1(b.ln2(y)))));
}

VitOutput VisionTransformer::encode(const ImageSample& img, bool keep_block_states) const {
  Tensor x = patch_embed(img);
  const std::size_t seq = cfg_.sequence_length();
  VitOutput out;
  for (const auto& b : blocks_) {
    x = run_block(b, x);
    if (keep_block_states) out.block_patch_states.push_back(slice_rows(x, 2, seq));
  }
  x = final_norm_(x);
  out.class_embedding = row(x, 0);
  out.distill_embedding = row(x, 1);
  out.patch_states = slice_rows(x, 2, seq);
  return out;
}

Tensor VisionTransformer::class_logits(const VitOutput& out) const {
  return cls_head_(out.class_embedding);
}

Tensor VisionTransformer::distill_logits(const VitOutput& out) const {
  return dist_head_(out.distill_embedding);
}

Tensor VisionTransformer::logits(const VitOutput& out) const {
  return scale(add(class_logits(out), distill_logits(out)), 0.5);
}

EmbeddingVector VisionTransformer::embedding(const ImageSample& img) const {
  NoGradGuard ng;
  const auto out = encode(img);
  const Tensor e = scale(add(out.class_embedding, out.distill_embedding), 0.5);
  return {{e.values().begin(), e.values().end()}};
}

std::array<double, kNumClasses> VisionTransformer::probabilities(const ImageSample& img) const {
  NoGradGuard ng;
  const auto p = softmax_values(logits(encode(img)).values());
  return {p[0], p[1], p[2]};
}

ParameterSet VisionTransformer::parameters() const {
  ParameterSet ps;
  patch_proj_.register_into(ps, "patch_proj");
  ps.add("cls_token", cls_token_);
  ps.add("dist_token", dist_token_);
  ps.add("pos_embed", pos_embed_);
  for (std::size_t l = 0; l < blocks_.size(); ++l) {
    const auto& b = blocks_[l];
    const std::string p = "blocks." + std::to_string(l);
    b.ln1.register_into(ps, p + ".ln1");
    b.ln2.register_into(ps, p + ".ln2");
    for (std::size_t h = 0; h < b.q.size(); ++h) {
      const std::string hp = p + ".head" + std::to_string(h);
      b.q[h].register_into(ps, hp + ".q");
      b.k[h].register_into(ps, hp + ".k");
      b.v[h].register_into(ps, hp + ".v");
    }
    b.proj.register_into(ps, p + ".proj");
    b.fc1.register_into(ps, p + ".fc1");
    b.fc2.register_into(ps, p + ".fc2");
  }
  final_norm_.register_into(ps, "final_norm");
  cls_head_.register_into(ps, "cls_head");
  dist_head_.register_into(ps, "dist_head");
  return ps;
}

void VisionTransformer::zero_position_embeddings() {
  for (auto& v : pos_embed_.values_mut()) v = 0.0;
}

}  // namespace dmwat::vision
