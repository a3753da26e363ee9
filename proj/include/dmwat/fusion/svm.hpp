#pragma once

#include <cstdint>
#include <vector>

#include "dmwat/fusion/head.hpp"

namespace dmwat::fusion {

struct SvmConfig {
  double c = 1.0;           // hinge weight
  std::size_t epochs = 300;
  double step_size = 1.0;   // initial step, decayed as step/sqrt(t+1)
  std::uint64_t seed = 0;
};

/// Linear one-vs-rest SVM, F_c(x) = W_c . x + b_c. Each class minimizes
///   1/2 |W_c|^2 + C sum_i max(0, 1 - s_i F_c(x_i))
/// by full-batch subgradient descent; the bias is not regularized. A step
/// that would raise the objective is halved until it does not.
class SvmModel : public ClassifierHead {
 public:
  explicit SvmModel(SvmConfig cfg = {});

  std::string name() const override { return "svm"; }
  void fit(const FeatureMatrix& x, std::span<const ReferralDecision> y) override;
  Prediction predict(std::span<const double> x) const override;
  std::size_t input_dim() const override { return dim_; }
  ParameterSet parameters() const override;

  /// Per-class decision values.
  std::array<double, kNumClasses> scores(std::span<const double> x) const;
  const SvmConfig& config() const { return cfg_; }
  std::span<const double> weights(std::size_t cls) const;
  double bias(std::size_t cls) const { return b_.values()[cls]; }
  /// Objective of each class after every epoch (index 0 = before training).
  const std::vector<std::array<double, kNumClasses>>& objective_history() const { return history_; }

  /// Direct construction, e.g. for tests or checkpoint loading.
  void set_parameters(std::vector<double> w, std::vector<double> b);

 private:
  SvmConfig cfg_;
  std::size_t dim_ = 0;
  Tensor w_;  // [3, dim]
  Tensor b_;  // [3]
  std::vector<std::array<double, kNumClasses>> history_;
};

namespace svm {

/// One-vs-rest targets for class `cls`: +1 for members, -1 otherwise.
std::vector<double> ovr_signs(std::span<const ReferralDecision> y, std::size_t cls);

double objective(std::span<const double> w, double b, const FeatureMatrix& x,
                 std::span<const double> signs, double c);

/// Subgradient of `objective`; at a kink the zero branch is taken.
void subgradient(std::span<const double> w, double b, const FeatureMatrix& x,
                 std::span<const double> signs, double c, std::span<double> gw, double& gb);

}  // namespace svm

}  // namespace dmwat::fusion
