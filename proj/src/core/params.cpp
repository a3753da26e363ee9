#include "dmwat/core/params.hpp"

#include <algorithm>
#include <cmath>

namespace dmwat {

void ParameterSet::add(std::string name, Tensor t) {
  if (contains(name)) throw std::invalid_argument("duplicate parameter name: " + name);
  entries_.emplace_back(std::move(name), std::move(t));
}

void ParameterSet::extend(const std::string& prefix, const ParameterSet& other) {
  for (const auto& [name, t] : other.entries_) add(prefix + name, t);
}

Tensor& ParameterSet::at(const std::string& name) {
  for (auto& [n, t] : entries_)
    if (n == name) return t;
  throw std::out_of_range("no parameter named " + name);
}

const Tensor& ParameterSet::at(const std::string& name) const {
  for (const auto& [n, t] : entries_)
    if (n == name) return t;
  throw std::out_of_range("no parameter named " + name);
}

bool ParameterSet::contains(const std::string& name) const {
  return std::any_of(entries_.begin(), entries_.end(),
                     [&](const auto& e) { return e.first == name; });
}

void ParameterSet::zero_grad() {
  for (auto& [n, t] : entries_) t.zero_grad();
}

std::size_t ParameterSet::scalar_count() const {
  std::size_t n = 0;
  for (const auto& [name, t] : entries_) n += t.numel();
  return n;
}

void ParameterSet::copy_values_from(const ParameterSet& other) {
  if (other.size() != size()) throw std::invalid_argument("parameter set size mismatch");
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    auto& [name, t] = entries_[i];
    const auto& [oname, ot] = other.entries_[i];
    if (name != oname || t.shape() != ot.shape()) {
      throw std::invalid_argument("parameter layout mismatch at " + name);
    }
    auto dst = t.values_mut();
    std::copy(ot.values().begin(), ot.values().end(), dst.begin());
  }
}

Tensor normal_param(Shape shape, double stddev, Rng& rng) {
  std::vector<double> v(shape_numel(shape));
  for (auto& x : v) x = stddev * rng.normal();
  return Tensor(std::move(shape), std::move(v), true);
}

Tensor zeros_param(Shape shape) { return Tensor(std::move(shape), 0.0, true); }
Tensor ones_param(Shape shape) { return Tensor(std::move(shape), 1.0, true); }

Linear::Linear(std::size_t in, std::size_t out, Rng& rng)
    : weight(normal_param({in, out}, std::sqrt(1.0 / static_cast<double>(in)), rng)),
      bias(zeros_param({out})) {}

Tensor Linear::operator()(const Tensor& x) const { return add(matmul(x, weight), bias); }

void Linear::register_into(ParameterSet& ps, const std::string& prefix) const {
  ps.add(prefix + ".weight", weight);
  ps.add(prefix + ".bias", bias);
}

LayerNormAffine::LayerNormAffine(std::size_t dim)
    : gamma(ones_param({dim})), beta(zeros_param({dim})) {}

Tensor LayerNormAffine::operator()(const Tensor& x) const { return layer_norm(x, gamma, beta); }

void LayerNormAffine::register_into(ParameterSet& ps, const std::string& prefix) const {
  ps.add(prefix + ".gamma", gamma);
  ps.add(prefix + ".beta", beta);
}

}  // namespace dmwat
