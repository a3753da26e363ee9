#include "dmwat/fusion/mlp.hpp"

#include <numeric>
#include <stdexcept>

#include "dmwat/core/ops.hpp"
#include "dmwat/core/rng.hpp"

namespace dmwat::fusion {

MlpHead::MlpHead(MlpConfig cfg) : cfg_(cfg) {
  if (cfg_.hidden == 0) throw std::invalid_argument("MLP hidden width must be positive");
  if (cfg_.batch_size == 0) throw std::invalid_argument("MLP batch size must be positive");
}

void MlpHead::initialize(std::size_t input_dim) {
  if (input_dim == 0) throw std::invalid_argument("MLP input width must be positive");
  Rng rng = Rng(cfg_.seed).derive("mlp-init");
  dim_ = input_dim;
  l1_ = Linear(dim_, cfg_.hidden, rng);
  l2_ = Linear(cfg_.hidden, kNumClasses, rng);
  history_ = {};
}

Tensor MlpHead::forward(const Tensor& x) const { return l2_(relu(l1_(x))); }

void MlpHead::fit(const FeatureMatrix& x, std::span<const ReferralDecision> y) {
  check_training_set(x, y);
  initialize(x.cols);
  ParameterSet params = parameters();
  OptimizerState opt = cfg_.optimizer == OptimizerKind::sgd ? make_sgd(cfg_.learning_rate)
                                                            : make_adam(cfg_.learning_rate);
  Rng rng = Rng(cfg_.seed).derive("mlp-order");
  std::vector<std::size_t> order(x.rows);
  std::iota(order.begin(), order.end(), 0);
  for (std::size_t epoch = 0; epoch < cfg_.epochs; ++epoch) {
    rng.shuffle(order.begin(), order.end());
    double sum = 0.0;
    std::size_t batches = 0;
    for (std::size_t start = 0; start < x.rows; start += cfg_.batch_size) {
      const std::size_t end = std::min(x.rows, start + cfg_.batch_size);
      std::vector<double> xb;
      std::vector<std::size_t> yb;
      xb.reserve((end - start) * x.cols);
      for (std::size_t i = start; i < end; ++i) {
        const auto r = x.row(order[i]);
        xb.insert(xb.end(), r.begin(), r.end());
        yb.push_back(class_index(y[order[i]]));
      }
      const Tensor loss = cross_entropy(forward(Tensor(Shape{end - start, x.cols}, std::move(xb))), yb);
      loss.backward();
      optimizer_step(opt, params);
      history_.step_loss.push_back(loss.item());
      sum += loss.item();
      ++batches;
    }
    history_.epoch_loss.push_back(sum / static_cast<double>(batches));
  }
}

std::array<double, kNumClasses> MlpHead::probabilities(std::span<const double> x) const {
  if (!l1_.weight.defined()) throw std::logic_error("MLP is not initialized");
  if (x.size() != dim_) {
    throw ShapeError("MLP expects " + std::to_string(dim_) + " features, got " +
                     std::to_string(x.size()));
  }
  NoGradGuard ng;
  const Tensor logits = forward(Tensor(Shape{1, dim_}, std::vector<double>(x.begin(), x.end())));
  const auto p = softmax_values(logits.values());
  return {p[0], p[1], p[2]};
}

Prediction MlpHead::predict(std::span<const double> x) const {
  Prediction p;
  p.scores = probabilities(x);
  p.label = urgent_argmax(p.scores);
  return p;
}

ParameterSet MlpHead::parameters() const {
  ParameterSet ps;
  if (l1_.weight.defined()) {
    l1_.register_into(ps, "mlp.fc1");
    l2_.register_into(ps, "mlp.fc2");
  }
  return ps;
}

}  // namespace dmwat::fusion
