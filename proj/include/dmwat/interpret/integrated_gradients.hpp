#pragma once

#include <functional>
#include <string>
#include <vector>

#include "dmwat/core/tensor.hpp"
#include "dmwat/text/encoder.hpp"
#include "dmwat/text/vocab.hpp"

namespace dmwat::interpret {

/// Differentiable scalar model output f(x) for x of shape [n, D].
using ScalarModel = std::function<Tensor(const Tensor& x)>;

struct PathIntegral {
  std::vector<double> row_scores;  // one attribution per row of x
  double f_input = 0.0;
  double f_baseline = 0.0;
  double total = 0.0;  // sum of row_scores
  double completeness_gap = 0.0;  // |total - (f_input - f_baseline)|
};

/// Left Riemann estimate with m steps of
///   (x - x') * integral_0^1 grad f(x' + a (x - x')) da,
/// summed over the columns of each row.
PathIntegral integrated_gradients(const Tensor& x, const Tensor& baseline, const ScalarModel& f,
                                  std::size_t m);

struct AttributionReport {
  std::vector<std::string> tokens;  // one per note position
  std::vector<double> scores;       // same length; PAD positions are 0
  std::size_t steps = 0;
  std::string baseline = "PAD content embedding at every position";
  std::size_t target_class = 0;
  double f_input = 0.0;
  double f_baseline = 0.0;
  double completeness_gap = 0.0;
};

/// Token attributions for the target-class probability of a trained text
/// classifier. Gradients are taken with respect to the content embeddings.
AttributionReport integrated_gradients(const text::ClinicalNote& note,
                                       const text::TextEncoder& model, std::size_t target_class,
                                       std::size_t m, const text::Vocabulary* vocab = nullptr);

}  // namespace dmwat::interpret
