#pragma once

#include <cstdint>
#include <vector>

#include "dmwat/core/params.hpp"

namespace dmwat {

enum class OptimizerKind { sgd, adam };

struct OptimizerState {
  OptimizerKind kind = OptimizerKind::adam;
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  double weight_decay = 0.0;
  std::uint64_t step_count = 0;
  std::vector<std::vector<double>> first_moment;
  std::vector<std::vector<double>> second_moment;
};

OptimizerState make_sgd(double learning_rate);
OptimizerState make_adam(double learning_rate);

/// Applies one update to every parameter that holds a gradient, then clears
/// all gradients. Parameters the loss never reached are left untouched.
/// Throws AutogradError when no parameter has a gradient at all.
void optimizer_step(OptimizerState& state, ParameterSet& params);

struct TrainHistory {
  std::vector<double> step_loss;   // mean loss of each optimizer step
  std::vector<double> epoch_loss;  // mean loss of each epoch
};

/// Scales gradients so their global L2 norm is at most `max_norm`.
double clip_grad_norm(ParameterSet& params, double max_norm);

}  // namespace dmwat
