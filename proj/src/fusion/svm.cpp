#include "dmwat/fusion/svm.hpp"

#include <cmath>
#include <stdexcept>

namespace dmwat::fusion {

void FeatureMatrix::append(std::span<const double> x) {
  if (rows == 0 && cols == 0) cols = x.size();
  if (x.size() != cols) throw ShapeError("feature row has the wrong width");
  data.insert(data.end(), x.begin(), x.end());
  ++rows;
}

std::vector<Prediction> ClassifierHead::predict_all(const FeatureMatrix& x) const {
  std::vector<Prediction> out;
  out.reserve(x.rows);
  for (std::size_t r = 0; r < x.rows; ++r) out.push_back(predict(x.row(r)));
  return out;
}

void check_training_set(const FeatureMatrix& x, std::span<const ReferralDecision> y) {
  if (x.rows == 0 || x.cols == 0) throw std::invalid_argument("training set is empty");
  if (x.rows != y.size()) throw ShapeError("feature rows and labels differ in count");
  for (double v : x.data)
    if (!std::isfinite(v)) throw NumericError("non-finite feature value");
  bool seen[kNumClasses] = {};
  for (auto l : y) seen[class_index(l)] = true;
  if (seen[0] + seen[1] + seen[2] < 2) {
    throw std::invalid_argument("training labels contain a single class");
  }
}

namespace svm {

std::vector<double> ovr_signs(std::span<const ReferralDecision> y, std::size_t cls) {
  std::vector<double> s(y.size());
  for (std::size_t i = 0; i < y.size(); ++i) s[i] = class_index(y[i]) == cls ? 1.0 : -1.0;
  return s;
}

namespace {
double decision(std::span<const double> w, double b, std::span<const double> x) {
  double s = b;
  for (std::size_t j = 0; j < w.size(); ++j) s += w[j] * x[j];
  return s;
}
}  // namespace

double objective(std::span<const double> w, double b, const FeatureMatrix& x,
                 std::span<const double> signs, double c) {
  double reg = 0.0;
  for (double v : w) reg += v * v;
  double hinge = 0.0;
  for (std::size_t i = 0; i < x.rows; ++i)
    hinge += std::max(0.0, 1.0 - signs[i] * decision(w, b, x.row(i)));
  return 0.5 * reg + c * hinge;
}

void subgradient(std::span<const double> w, double b, const FeatureMatrix& x,
                 std::span<const double> signs, double c, std::span<double> gw, double& gb) {
  for (std::size_t j = 0; j < w.size(); ++j) gw[j] = w[j];
  gb = 0.0;
  for (std::size_t i = 0; i < x.rows; ++i) {
    const auto xi = x.row(i);
    if (1.0 - signs[i] * decision(w, b, xi) <= 0.0) continue;
    for (std::size_t j = 0; j < w.size(); ++j) gw[j] -= c * signs[i] * xi[j];
    gb -= c * signs[i];
  }
}

}  // namespace svm

SvmModel::SvmModel(SvmConfig cfg) : cfg_(cfg) {
  if (!(cfg_.c >= 0.0) || !std::isfinite(cfg_.c)) throw std::invalid_argument("SVM C must be >= 0");
  if (!(cfg_.step_size > 0.0)) throw std::invalid_argument("SVM step size must be positive");
}

void SvmModel::fit(const FeatureMatrix& x, std::span<const ReferralDecision> y) {
  check_training_set(x, y);
  dim_ = x.cols;
  std::vector<double> w(kNumClasses * dim_, 0.0), b(kNumClasses, 0.0);
  history_.assign(cfg_.epochs + 1, {});
  std::vector<double> gw(dim_), trial_w(dim_);
  for (std::size_t c = 0; c < kNumClasses; ++c) {
    const auto signs = svm::ovr_signs(y, c);
    std::span<double> wc(w.data() + c * dim_, dim_);
    double obj = svm::objective(wc, b[c], x, signs, cfg_.c);
    history_[0][c] = obj;
    double last_step = cfg_.step_size;
    for (std::size_t t = 0; t < cfg_.epochs; ++t) {
      double gb = 0.0;
      svm::subgradient(wc, b[c], x, signs, cfg_.c, gw, gb);
      double step = std::min(cfg_.step_size / std::sqrt(static_cast<double>(t + 1)), 2.0 * last_step);
      for (int halvings = 0; halvings < 60; ++halvings, step *= 0.5) {
        for (std::size_t j = 0; j < dim_; ++j) trial_w[j] = wc[j] - step * gw[j];
        const double trial_b = b[c] - step * gb;
        const double trial_obj = svm::objective(trial_w, trial_b, x, signs, cfg_.c);
        if (trial_obj <= obj) {
          std::copy(trial_w.begin(), trial_w.end(), wc.begin());
          b[c] = trial_b;
          obj = trial_obj;
          last_step = step;
          break;
        }
      }
      history_[t + 1][c] = obj;
    }
  }
  set_parameters(std::move(w), std::move(b));
}

void SvmModel::set_parameters(std::vector<double> w, std::vector<double> b) {
  if (b.size() != kNumClasses || w.empty() || w.size() % kNumClasses != 0) {
    throw ShapeError("SVM parameters must be [3, d] and [3]");
  }
  dim_ = w.size() / kNumClasses;
  w_ = Tensor(Shape{kNumClasses, dim_}, std::move(w));
  b_ = Tensor(Shape{kNumClasses}, std::move(b));
}

std::span<const double> SvmModel::weights(std::size_t cls) const {
  return w_.values().subspan(cls * dim_, dim_);
}

std::array<double, kNumClasses> SvmModel::scores(std::span<const double> x) const {
  if (!w_.defined()) throw std::logic_error("SVM is not trained");
  if (x.size() != dim_) {
    throw ShapeError("SVM expects " + std::to_string(dim_) + " features, got " +
                     std::to_string(x.size()));
  }
  std::array<double, kNumClasses> s{};
  for (std::size_t c = 0; c < kNumClasses; ++c) {
    double acc = b_.values()[c];
    const auto wc = weights(c);
    for (std::size_t j = 0; j < dim_; ++j) acc += wc[j] * x[j];
    s[c] = acc;
  }
  return s;
}

Prediction SvmModel::predict(std::span<const double> x) const {
  Prediction p;
  p.scores = scores(x);
  p.label = urgent_argmax(p.scores);
  return p;
}

ParameterSet SvmModel::parameters() const {
  ParameterSet ps;
  if (w_.defined()) {
    ps.add("svm.weight", w_);
    ps.add("svm.bias", b_);
  }
  return ps;
}

}  // namespace dmwat::fusion
