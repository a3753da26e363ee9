#pragma once

#include <array>
#include <cstdint>

#include "dmwat/core/params.hpp"
#include "dmwat/types.hpp"
#include "dmwat/vision/image.hpp"

namespace dmwat::vision {

/// Two-layer convolutional classifier used as the frozen distillation
/// teacher. conv1: 4x4 stride 4, conv2: 2x2 stride 2 over conv1's grid,
/// then global average pooling and a linear 3-way head.
class ConvTeacher {
 public:
  ConvTeacher(std::size_t image_size, std::uint64_t seed, std::size_t channels1 = 16,
              std::size_t channels2 = 32);

  Tensor logits(const ImageSample& img) const;
  std::array<double, kNumClasses> logits_values(const ImageSample& img) const;
  ParameterSet parameters() const;
  std::size_t image_size() const { return image_size_; }

 private:
  std::size_t image_size_;
  Linear conv1_;
  Linear conv2_;
  Linear head_;
  std::vector<std::size_t> conv2_index_;  // gather map from conv1 output to conv2 patches
  std::size_t conv2_positions_;
};

}  // namespace dmwat::vision
