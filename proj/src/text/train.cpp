#include "dmwat/text/train.hpp"

#include <numeric>

#include "dmwat/core/ops.hpp"

namespace dmwat::text {

namespace {

OptimizerState make_optimizer(const TextTrainConfig& cfg) {
  return cfg.optimizer == OptimizerKind::sgd ? make_sgd(cfg.learning_rate)
                                             : make_adam(cfg.learning_rate);
}

// Shuffled mini-batch loop. `loss_fn(index, rng)` returns an undefined
// tensor for samples that contribute nothing.
template <class LossFn>
TrainHistory run_training(ParameterSet params, std::size_t count, const TextTrainConfig& cfg,
                          const char* stream, LossFn loss_fn) {
  if (cfg.batch_size == 0) throw std::invalid_argument("batch_size must be positive");
  OptimizerState opt = make_optimizer(cfg);
  Rng rng = Rng(cfg.seed).derive(stream);
  std::vector<std::size_t> order(count);
  std::iota(order.begin(), order.end(), 0);
  TrainHistory hist;
  std::size_t steps = 0;
  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    rng.shuffle(order.begin(), order.end());
    double epoch_sum = 0.0;
    std::size_t epoch_batches = 0;
    for (std::size_t start = 0; start < count; start += cfg.batch_size) {
      if (cfg.max_steps && steps >= cfg.max_steps) break;
      const std::size_t end = std::min(count, start + cfg.batch_size);
      Tensor total;
      std::size_t used = 0;
      for (std::size_t i = start; i < end; ++i) {
        const Tensor l = loss_fn(order[i], rng);
        if (!l.defined()) continue;
        total = total.defined() ? add(total, l) : l;
        ++used;
      }
      if (!used) continue;
      total = scale(total, 1.0 / static_cast<double>(used));
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

MaskedNote mask_tokens(std::span<const std::size_t> ids, std::size_t vocab_size, double rate,
                       Rng& rng) {
  if (!(rate >= 0.0 && rate <= 1.0)) throw std::invalid_argument("mask rate must lie in [0,1]");
  MaskedNote m;
  m.input.assign(ids.begin(), ids.end());
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (ids[i] < kNumReserved) continue;
    if (!rng.bernoulli(rate)) continue;
    m.positions.push_back(i);
    m.targets.push_back(ids[i]);
    const double u = rng.uniform();
    if (u < 0.8) {
      m.input[i] = kMaskId;
    } else if (u < 0.9 && vocab_size > kNumReserved) {
      m.input[i] = kNumReserved + rng.below(vocab_size - kNumReserved);
    }
  }
  return m;
}

Tensor mlm_loss(const TextEncoder& enc, const MaskedNote& m) {
  if (m.positions.empty()) throw NothingToPredictError("nothing to predict: no masked tokens");
  const Tensor h = enc.hidden(m.input);
  return cross_entropy(enc.mlm_logits(embed_lookup(h, m.positions)), m.targets);
}

TrainHistory mlm_pretrain(TextEncoder& enc, std::span<const ClinicalNote> corpus,
                          const TextTrainConfig& cfg) {
  if (corpus.empty()) throw std::invalid_argument("MLM corpus is empty");
  if (cfg.mask_rate <= 0.0) throw NothingToPredictError("nothing to predict: masking rate is 0");
  std::vector<std::vector<std::size_t>> ids;
  ids.reserve(corpus.size());
  for (const auto& n : corpus) ids.push_back(n.trimmed_ids());
  std::size_t targets = 0;
  enc.set_trained(true);
  auto hist = run_training(enc.parameters(), corpus.size(), cfg, "mlm",
                           [&](std::size_t i, Rng& rng) -> Tensor {
                             const MaskedNote m =
                                 mask_tokens(ids[i], enc.vocab_size(), cfg.mask_rate, rng);
                             if (m.positions.empty()) return {};
                             targets += m.positions.size();
                             return mlm_loss(enc, m);
                           });
  if (targets == 0 && cfg.epochs > 0) {
    throw NothingToPredictError("nothing to predict: corpus has no maskable tokens");
  }
  return hist;
}

TrainHistory train_text_classifier(TextEncoder& enc, std::span<const LabeledNote> data,
                                   const TextTrainConfig& cfg) {
  if (data.empty()) throw std::invalid_argument("training set is empty");
  std::vector<std::vector<std::size_t>> ids;
  ids.reserve(data.size());
  for (const auto& d : data) ids.push_back(d.note->trimmed_ids());
  enc.set_trained(true);
  return run_training(enc.parameters(), data.size(), cfg, "text-cls",
                      [&](std::size_t i, Rng&) -> Tensor {
                        const std::size_t label[1] = {class_index(data[i].label)};
                        return cross_entropy(reshape(enc.class_logits(enc.hidden(ids[i])),
                                                     {1, kNumClasses}),
                                             label);
                      });
}

}  // namespace dmwat::text
