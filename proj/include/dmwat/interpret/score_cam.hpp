#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <vector>

#include "dmwat/types.hpp"
#include "dmwat/vision/image.hpp"
#include "dmwat/vision/vit.hpp"

namespace dmwat::interpret {

using ImageScorer = std::function<std::array<double, kNumClasses>(const vision::ImageSample&)>;

/// Patch-state channels of one block, each reshaped to the patch grid.
struct ActivationMapSet {
  std::size_t layer = 0;
  std::size_t grid = 0;
  std::vector<std::vector<double>> maps;  // [channel][grid * grid]
};

ActivationMapSet activation_maps(const vision::VisionTransformer& model,
                                 const vision::ImageSample& img, std::size_t layer);

struct SaliencyMap {
  std::size_t height = 0;
  std::size_t width = 0;
  std::vector<double> values;  // row-major, in [0, 1]
  std::size_t target_class = 0;
  std::vector<std::size_t> channels;
  std::vector<double> channel_weights;

  double at(std::size_t r, std::size_t c) const { return values[r * width + c]; }
  double max() const;
};

struct ScoreCamConfig {
  std::size_t channel_subset = 64;  // 0 = every channel
};

/// Grid map upsampled to height x width (pixel-centre bilinear).
std::vector<double> upsample_bilinear(std::span<const double> grid_map, std::size_t grid,
                                      std::size_t height, std::size_t width);

/// Score-CAM on given activation maps. Each selected map is min-max scaled
/// to [0,1] and upsampled to a mask M; the masked input is
/// baseline + M * (img - baseline). Its weight is the target-class
/// probability gain over the baseline. Output: ReLU(sum_k w_k M_k), scaled
/// so its maximum is 1 (all zero if nothing is positive).
SaliencyMap score_cam(const vision::ImageSample& img, const ActivationMapSet& maps,
                      const ImageScorer& scorer, std::size_t target_class,
                      const vision::ImageSample& baseline, const ScoreCamConfig& cfg = {});

/// Convenience form on a trained ViT; `layer` indexes its blocks.
SaliencyMap score_cam(const vision::ImageSample& img, const vision::VisionTransformer& model,
                      std::size_t target_class, std::size_t layer,
                      const vision::ImageSample& baseline, const ScoreCamConfig& cfg = {});

/// Image of the same size filled with the per-channel mean of `img`; the
/// default Score-CAM baseline and deletion fill.
vision::ImageSample mean_color_image(const vision::ImageSample& img);

struct DeletionResult {
  double top_drop = 0.0;     // confidence lost masking the most salient pixels
  double random_drop = 0.0;  // same count of uniformly chosen pixels
  std::size_t pixels = 0;
};

/// Replaces round(fraction * H * W) pixels with `fill` and reports the
/// target-class probability drops. fraction must lie in (0, 1).
DeletionResult deletion_check(const vision::ImageSample& img, const SaliencyMap& map,
                              const ImageScorer& scorer, std::size_t target_class,
                              double fraction, const vision::ImageSample& fill,
                              std::uint64_t seed);

}  // namespace dmwat::interpret
