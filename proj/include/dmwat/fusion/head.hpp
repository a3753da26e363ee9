#pragma once

#include <array>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "dmwat/core/params.hpp"
#include "dmwat/types.hpp"

namespace dmwat::fusion {

/// Row-major design matrix.
struct FeatureMatrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;

  std::span<const double> row(std::size_t r) const {
    return std::span<const double>(data).subspan(r * cols, cols);
  }
  void append(std::span<const double> x);
};

struct Prediction {
  ReferralDecision label = ReferralDecision::continue_treatment;
  std::array<double, kNumClasses> scores{};
};

/// Common interface of the classification heads.
class ClassifierHead {
 public:
  virtual ~ClassifierHead() = default;
  virtual std::string name() const = 0;
  virtual void fit(const FeatureMatrix& x, std::span<const ReferralDecision> y) = 0;
  virtual Prediction predict(std::span<const double> x) const = 0;
  virtual std::size_t input_dim() const = 0;
  /// Learned tensors, for checkpointing.
  virtual ParameterSet parameters() const = 0;

  std::vector<Prediction> predict_all(const FeatureMatrix& x) const;
};

/// Shared validation: matching sizes, finite features, at least two classes.
void check_training_set(const FeatureMatrix& x, std::span<const ReferralDecision> y);

}  // namespace dmwat::fusion
