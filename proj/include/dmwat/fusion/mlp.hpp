#pragma once

#include <cstdint>

#include "dmwat/core/optim.hpp"
#include "dmwat/fusion/head.hpp"

namespace dmwat::fusion {

struct MlpConfig {
  std::size_t hidden = 64;
  std::size_t epochs = 200;
  std::size_t batch_size = 32;
  double learning_rate = 1e-2;
  OptimizerKind optimizer = OptimizerKind::adam;
  std::uint64_t seed = 0;
};

/// Linear -> ReLU -> Linear, softmax output. Biases start at zero.
class MlpHead : public ClassifierHead {
 public:
  explicit MlpHead(MlpConfig cfg = {});

  std::string name() const override { return "mlp"; }
  void fit(const FeatureMatrix& x, std::span<const ReferralDecision> y) override;
  Prediction predict(std::span<const double> x) const override;  // scores are probabilities
  std::size_t input_dim() const override { return dim_; }
  ParameterSet parameters() const override;

  /// Allocates freshly initialized layers for `input_dim` features.
  void initialize(std::size_t input_dim);
  std::array<double, kNumClasses> probabilities(std::span<const double> x) const;
  const MlpConfig& config() const { return cfg_; }
  const TrainHistory& history() const { return history_; }

 private:
  Tensor forward(const Tensor& x) const;

  MlpConfig cfg_;
  std::size_t dim_ = 0;
  Linear l1_, l2_;
  TrainHistory history_;
};

}  // namespace dmwat::fusion
