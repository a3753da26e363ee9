#include "dmwat/vision/train.hpp"

#include <numeric>

#include "dmwat/vision/distill.hpp"

namespace dmwat::vision {

namespace {

OptimizerState make_optimizer(const VisionTrainConfig& cfg) {
  return cfg.optimizer == OptimizerKind::sgd ? make_sgd(cfg.learning_rate)
                                             : make_adam(cfg.learning_rate);
}

struct PreparedSample {
  ImageSample image;
  SoftLabel label;
};

// Applies the configured regularizers to one training sample.
PreparedSample regularize(std::span<const LabeledImage> data, std::size_t idx,
                          const VisionTrainConfig& cfg, Rng& rng) {
  const auto& s = data[idx];
  PreparedSample out{*s.image, one_hot_label(s.label)};
  if (data.size() > 1 && (cfg.mixup_prob > 0 || cfg.cutmix_prob > 0)) {
    const double u = rng.uniform();
    if (u < cfg.mixup_prob + cfg.cutmix_prob) {
      const auto& other = data[rng.below(data.size())];
      MixedSample m = u < cfg.mixup_prob
                          ? mixup(*s.image, s.label, *other.image, other.label, rng)
                          : cutmix(*s.image, s.label, *other.image, other.label, rng.next_u64());
      out.image = std::move(m.image);
      out.label = m.label;
    }
  }
  if (cfg.erase_prob > 0 && rng.bernoulli(cfg.erase_prob)) {
    out.image = random_erase(out.image, rng.uniform(0.02, 0.2), rng).image;
  }
  return out;
}

template <class LossFn>
TrainHistory run_training(ParameterSet params, std::span<const LabeledImage> data,
                          const VisionTrainConfig& cfg, const char* stream, LossFn loss_fn) {
  if (data.empty()) throw std::invalid_argument("training set is empty");
  if (cfg.batch_size == 0) throw std::invalid_argument("batch_size must be positive");
  OptimizerState opt = make_optimizer(cfg);
  Rng rng = Rng(cfg.seed).derive(stream);
  std::vector<std::size_t> order(data.size());
  std::iota(order.begin(), order.end(), 0);
  TrainHistory hist;
  std::size_t steps = 0;
  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    rng.shuffle(order.begin(), order.end());
    double epoch_sum = 0.0;
    std::size_t epoch_batches = 0;
    for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
      if (cfg.max_steps && steps >= cfg.max_steps) break;
      const std::size_t end = std::min(order.size(), start + cfg.batch_size);
      Tensor total;
      for (std::size_t i = start; i < end; ++i) {
        const PreparedSample ps = regularize(data, order[i], cfg, rng);
        const Tensor l = loss_fn(ps);
        total = total.defined() ? add(total, l) : l;
      }
      total = scale(total, 1.0 / static_cast<double>(end - start));
      total.backward();
      if (cfg.grad_clip > 0) clip_grad_norm(params, cfg.grad_clip);
      optimizer_step(opt, params);
      ++steps;
      hist.step_loss.push_back(total.item());
      epoch_sum += total.item();
      ++epoch_batches;
    }
    if (epoch_batches) hist.epoch_loss.push_back(epoch_sum / static_cast<double>(epoch_batches));
    if (cfg.max_steps && steps >= cfg.max_steps) break;
  }
  return hist;
}

}  // namespace

TrainHistory train_teacher(ConvTeacher& teacher, std::span<const LabeledImage> data,
                           const VisionTrainConfig& cfg) {
  return run_training(teacher.parameters(), data, cfg, "teacher", [&](const PreparedSample& s) {
    const Tensor t(Shape{kNumClasses}, std::vector<double>(s.label.begin(), s.label.end()));
    return cross_entropy(teacher.logits(s.image), t);
  });
}

TrainHistory train_vit(VisionTransformer& model, const ConvTeacher& teacher,
                       std::span<const LabeledImage> data, const VisionTrainConfig& cfg) {
  const VitConfig& vc = model.config();
  model.set_trained(true);
  return run_training(model.parameters(), data, cfg, "vit", [&](const PreparedSample& s) {
    Tensor teacher_logits;
    {
      NoGradGuard ng;
      teacher_logits = teacher.logits(s.image);
    }
    const VitOutput out = model.encode(s.image);
    return distillation_loss(model.class_logits(out), model.distill_logits(out), teacher_logits,
                             s.label, vc)
        .total;
  });
}

double evaluate_vit_loss(const VisionTransformer& model, const ConvTeacher& teacher,
                         std::span<const LabeledImage> data) {
  NoGradGuard ng;
  double sum = 0.0;
  for (const auto& s : data) {
    const VitOutput out = model.encode(*s.image);
    sum += distillation_loss(model.class_logits(out), model.distill_logits(out),
                             teacher.logits(*s.image), one_hot_label(s.label), model.config())
               .parts.total;
  }
  return sum / static_cast<double>(data.size());
}

}  // namespace dmwat::vision
