#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "dmwat/core/optim.hpp"
#include "dmwat/vision/augment.hpp"
#include "dmwat/vision/teacher.hpp"
#include "dmwat/vision/vit.hpp"

namespace dmwat::vision {

struct LabeledImage {
  const ImageSample* image = nullptr;
  ReferralDecision label = ReferralDecision::continue_treatment;
};

struct VisionTrainConfig {
  std::size_t epochs = 8;
  std::size_t batch_size = 16;
  std::size_t max_steps = 0;  // 0 = no cap
  OptimizerKind optimizer = OptimizerKind::adam;
  double learning_rate = 1e-3;
  double grad_clip = 1.0;  // 0 disables
  // Per-sample probabilities of the DeiT-style regularizers.
  double mixup_prob = 0.0;
  double cutmix_prob = 0.0;
  double erase_prob = 0.0;
  std::uint64_t seed = 0;
};

TrainHistory train_teacher(ConvTeacher& teacher, std::span<const LabeledImage> data,
                           const VisionTrainConfig& cfg);

/// Trains the student with the distillation objective; the teacher is only
/// read.
TrainHistory train_vit(VisionTransformer& model, const ConvTeacher& teacher,
                       std::span<const LabeledImage> data, const VisionTrainConfig& cfg);

/// Mean distillation loss over `data` without updating anything.
double evaluate_vit_loss(const VisionTransformer& model, const ConvTeacher& teacher,
                         std::span<const LabeledImage> data);

}  // namespace dmwat::vision
