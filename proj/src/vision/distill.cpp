#include "dmwat/vision/distill.hpp"

#include <stdexcept>

#include "dmwat/core/ops.hpp"

namespace dmwat::vision {

DistillationLoss distillation_loss(const Tensor& ce_logits, const Tensor& kd_logits,
                                   const Tensor& teacher_logits, const SoftLabel& target,
                                   const VitConfig& cfg) {
  const double alpha = cfg.distillation_alpha;
  if (!(alpha >= 0.0 && alpha <= 1.0)) {
    throw std::invalid_argument("distillation alpha must lie in [0,1]");
  }
  if (ce_logits.numel() != kNumClasses || kd_logits.numel() != kNumClasses ||
      teacher_logits.numel() != kNumClasses) {
    throw ShapeError("distillation_loss expects 3-way logits");
  }
  const Tensor t(Shape{kNumClasses}, std::vector<double>(target.begin(), target.end()));
  const Tensor l_ce = cross_entropy(reshape(ce_logits, {kNumClasses}), t);

  Tensor l_kd;
  const auto tv = teacher_logits.values();
  if (cfg.distillation_mode == DistillMode::hard) {
    std::size_t best = 0;
    for (std::size_t c = 1; c < kNumClasses; ++c)
      if (tv[c] > tv[best]) best = c;
    l_kd = cross_entropy(reshape(kd_logits, {kNumClasses}),
                         Tensor(Shape{kNumClasses}, one_hot(best, kNumClasses)));
  } else {
    const double temp = cfg.soft_temperature;
    std::vector<double> scaled(tv.begin(), tv.end());
    for (auto& x : scaled) x /= temp;
    const Tensor p_teacher(Shape{kNumClasses}, softmax_values(scaled));
    l_kd = scale(kl_divergence(scale(reshape(kd_logits, {kNumClasses}), 1.0 / temp), p_teacher),
                 temp * temp);
  }

  DistillationLoss out;
  out.total = add(scale(l_ce, alpha), scale(l_kd, 1.0 - alpha));
  out.parts = {l_ce.item(), l_kd.item(), out.total.item()};
  return out;
}

DistillationLoss distillation_loss(const Tensor& student_logits, const Tensor& teacher_logits,
                                   ReferralDecision label, const VitConfig& cfg) {
  return distillation_loss(student_logits, student_logits, teacher_logits, one_hot_label(label),
                           cfg);
}

}  // namespace dmwat::vision
