#pragma once

#include "dmwat/core/tensor.hpp"
#include "dmwat/types.hpp"
#include "dmwat/vision/vit.hpp"

namespace dmwat::vision {

struct LossBreakdown {
  double ce = 0.0;
  double kd = 0.0;
  double total = 0.0;
};

struct DistillationLoss {
  Tensor total;  // scalar, on the tape
  LossBreakdown parts;
};

/// L_total = alpha * L_CE + (1 - alpha) * L_KD.
///
/// L_CE is cross-entropy of `ce_logits` against `target` (a one-hot or
/// mixed soft label). L_KD compares `kd_logits` with the teacher: in hard
/// mode cross-entropy against the teacher's argmax, in soft mode
/// T^2 * KL(softmax(teacher/T) || softmax(student/T)).
DistillationLoss distillation_loss(const Tensor& ce_logits, const Tensor& kd_logits,
                                   const Tensor& teacher_logits, const SoftLabel& target,
                                   const VitConfig& cfg);

/// Single-head form: the same student logits feed both terms.
DistillationLoss distillation_loss(const Tensor& student_logits, const Tensor& teacher_logits,
                                   ReferralDecision label, const VitConfig& cfg);

}  // namespace dmwat::vision
