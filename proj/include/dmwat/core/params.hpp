#pragma once

#include <string>
#include <utility>
#include <vector>

#include "dmwat/core/ops.hpp"
#include "dmwat/core/rng.hpp"
#include "dmwat/core/tensor.hpp"

namespace dmwat {

/// Ordered, named collection of trainable leaves. Handles share storage
/// with the owning module, so updating through the set updates the model.
class ParameterSet {
 public:
  void add(std::string name, Tensor t);
  void extend(const std::string& prefix, const ParameterSet& other);

  std::size_t size() const { return entries_.size(); }
  const std::vector<std::pair<std::string, Tensor>>& entries() const { return entries_; }
  std::vector<std::pair<std::string, Tensor>>& entries() { return entries_; }
  Tensor& at(const std::string& name);
  const Tensor& at(const std::string& name) const;
  bool contains(const std::string& name) const;

  void zero_grad();
  std::size_t scalar_count() const;
  /// Copies values from another set with identical names and shapes.
  void copy_values_from(const ParameterSet& other);

 private:
  std::vector<std::pair<std::string, Tensor>> entries_;
};

/// Fresh trainable leaf of the given shape, N(0, stddev^2) entries.
Tensor normal_param(Shape shape, double stddev, Rng& rng);
Tensor zeros_param(Shape shape);
Tensor ones_param(Shape shape);

/// y = x W + b with W: [in, out].
struct Linear {
  Tensor weight;
  Tensor bias;

  Linear() = default;
  Linear(std::size_t in, std::size_t out, Rng& rng);
  Tensor operator()(const Tensor& x) const;
  void register_into(ParameterSet& ps, const std::string& prefix) const;
  std::size_t in_features() const { return weight.dim(0); }
  std::size_t out_features() const { return weight.dim(1); }
};

struct LayerNormAffine {
  Tensor gamma;
  Tensor beta;

  LayerNormAffine() = default;
  explicit LayerNormAffine(std::size_t dim);
  Tensor operator()(const Tensor& x) const;
  void register_into(ParameterSet& ps, const std::string& prefix) const;
};

}  // namespace dmwat
