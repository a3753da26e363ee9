#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

#include "dmwat/core/tensor.hpp"

namespace dmwat::testing {

struct GradCheck {
  double max_rel_error = 0.0;
  std::size_t entries = 0;
};

// Central differences on every entry of `params`, compared with the tape.
// Relative error is |a - n| / max(|a|, |n|, floor).
inline GradCheck gradcheck(std::vector<Tensor>& params, const std::function<Tensor()>& f,
                           double h = 1e-5, double floor = 1e-5) {
  for (auto& p : params) p.zero_grad();
  f().backward();
  std::vector<std::vector<double>> analytic;
  for (auto& p : params) {
    if (p.has_grad()) {
      analytic.emplace_back(p.grad().begin(), p.grad().end());
    } else {
      analytic.emplace_back(p.numel(), 0.0);
    }
  }
  GradCheck out;
  NoGradGuard guard;
  for (std::size_t k = 0; k < params.size(); ++k) {
    auto v = params[k].values_mut();
    for (std::size_t i = 0; i < v.size(); ++i) {
      const double orig = v[i];
      v[i] = orig + h;
      const double up = f().item();
      v[i] = orig - h;
      const double down = f().item();
      v[i] = orig;
      const double numeric = (up - down) / (2.0 * h);
      const double a = analytic[k][i];
      const double rel = std::abs(a - numeric) / std::max({std::abs(a), std::abs(numeric), floor});
      out.max_rel_error = std::max(out.max_rel_error, rel);
      ++out.entries;
    }
  }
  return out;
}

}  // namespace dmwat::testing
