#include "dmwat/core/optim.hpp"

#include <cmath>
#include <stdexcept>

namespace dmwat {

OptimizerState make_sgd(double learning_rate) {
  if (!(learning_rate >= 0.0)) throw std::invalid_argument("learning rate must be >= 0");
  OptimizerState s;
  s.kind = OptimizerKind::sgd;
  s.learning_rate = learning_rate;
  return s;
}

OptimizerState make_adam(double learning_rate) {
  if (!(learning_rate >= 0.0)) throw std::invalid_argument("learning rate must be >= 0");
  OptimizerState s;
  s.kind = OptimizerKind::adam;
  s.learning_rate = learning_rate;
  return s;
}

void optimizer_step(OptimizerState& state, ParameterSet& params) {
  auto& entries = params.entries();
  bool any = false;
  for (auto& [name, t] : entries) any = any || t.has_grad();
  if (!any) throw AutogradError("optimizer_step: no parameter has a gradient");

  if (state.kind == OptimizerKind::adam && state.first_moment.size() != entries.size()) {
    state.first_moment.assign(entries.size(), {});
    state.second_moment.assign(entries.size(), {});
    for (std::size_t i = 0; i < entries.size(); ++i) {
      state.first_moment[i].assign(entries[i].second.numel(), 0.0);
      state.second_moment[i].assign(entries[i].second.numel(), 0.0);
    }
  }

  ++state.step_count;
  const double lr = state.learning_rate;
  const double t = static_cast<double>(state.step_count);
  const double bc1 = 1.0 - std::pow(state.beta1, t);
  const double bc2 = 1.0 - std::pow(state.beta2, t);

  for (std::size_t i = 0; i < entries.size(); ++i) {
    Tensor& p = entries[i].second;
    if (!p.has_grad()) continue;
    auto w = p.values_mut();
    const auto g = p.grad();
    if (state.kind == OptimizerKind::sgd) {
      for (std::size_t j = 0; j < w.size(); ++j) {
        w[j] -= lr * (g[j] + state.weight_decay * w[j]);
      }
    } else {
      auto& m = state.first_moment[i];
      auto& v = state.second_moment[i];
      for (std::size_t j = 0; j < w.size(); ++j) {
        const double gj = g[j] + state.weight_decay * w[j];
        m[j] = state.beta1 * m[j] + (1.0 - state.beta1) * gj;
        v[j] = state.beta2 * v[j] + (1.0 - state.beta2) * gj * gj;
        const double mhat = m[j] / bc1;
        const double vhat = v[j] / bc2;
        w[j] -= lr * mhat / (std::sqrt(vhat) + state.epsilon);
      }
    }
  }
  params.zero_grad();
}

double clip_grad_norm(ParameterSet& params, double max_norm) {
  double sq = 0.0;
  for (auto& [name, t] : params.entries()) {
    if (!t.has_grad()) continue;
    for (double g : t.grad()) sq += g * g;
  }
  const double norm = std::sqrt(sq);
  if (norm > max_norm && norm > 0.0) {
    const double s = max_norm / norm;
    for (auto& [name, t] : params.entries()) {
      if (!t.has_grad()) continue;
      for (double& g : t.grad_mut()) g *= s;
    }
  }
  return norm;
}

}  // namespace dmwat
