#include "dmwat/interpret/integrated_gradients.hpp"

#include <cmath>
#include <stdexcept>

#include "dmwat/core/ops.hpp"

namespace dmwat::interpret {

PathIntegral integrated_gradients(const Tensor& x, const Tensor& baseline, const ScalarModel& f,
                                  std::size_t m) {
  if (m < 1) throw std::invalid_argument("integrated gradients needs at least one step");
  if (x.shape() != baseline.shape() || x.rank() != 2) {
    throw ShapeError("input and baseline must share a rank-2 shape");
  }
  const std::size_t rows = x.dim(0), cols = x.dim(1), n = x.numel();
  const auto xv = x.values(), bv = baseline.values();
  std::vector<double> diff(n), acc(n, 0.0), z(n);
  for (std::size_t i = 0; i < n; ++i) diff[i] = xv[i] - bv[i];

  for (std::size_t s = 0; s < m; ++s) {
    const double a = static_cast<double>(s) / static_cast<double>(m);
    for (std::size_t i = 0; i < n; ++i) z[i] = bv[i] + a * diff[i];
    Tensor leaf(x.shape(), z, true);
    const Tensor y = f(leaf);
    if (y.numel() != 1) throw ShapeError("model output must be a scalar");
    y.backward();
    if (leaf.has_grad()) {
      const auto g = leaf.grad();
      for (std::size_t i = 0; i < n; ++i) acc[i] += g[i];
    }
  }

  PathIntegral out;
  out.row_scores.assign(rows, 0.0);
  for (std::size_t r = 0; r < rows; ++r) {
    double s = 0.0;
    for (std::size_t c = 0; c < cols; ++c) s += diff[r * cols + c] * (acc[r * cols + c] / static_cast<double>(m));
    out.row_scores[r] = s;
    out.total += s;
  }
  {
    NoGradGuard ng;
    out.f_input = f(x.detach()).item();
    out.f_baseline = f(baseline.detach()).item();
  }
  out.completeness_gap = std::abs(out.total - (out.f_input - out.f_baseline));
  return out;
}

AttributionReport integrated_gradients(const text::ClinicalNote& note,
                                       const text::TextEncoder& model, std::size_t target_class,
                                       std::size_t m, const text::Vocabulary* vocab) {
  if (!model.trained()) throw std::logic_error("integrated gradients needs a trained model");
  if (target_class >= kNumClasses) throw std::out_of_range("target class out of range");
  // Trailing PADs are invisible and share the baseline row, so they are
  // dropped from the computation and reported as 0.
  const auto ids = note.trimmed_ids();
  Tensor x, baseline;
  {
    NoGradGuard ng;
    x = model.content_embeddings(ids).detach();
    const std::vector<std::size_t> pads(ids.size(), text::kPadId);
    baseline = model.content_embeddings(pads).detach();
  }
  // Parameters are frozen for the duration so backward only reaches the
  // input rows and the model's gradient buffers stay untouched.
  struct Freeze {
    ParameterSet ps;
    std::vector<bool> was;
    explicit Freeze(ParameterSet p) : ps(std::move(p)) {
      for (auto& [name, t] : ps.entries()) {
        was.push_back(t.requires_grad());
        t.set_requires_grad(false);
      }
    }
    ~Freeze() {
      for (std::size_t i = 0; i < was.size(); ++i) ps.entries()[i].second.set_requires_grad(was[i]);
    }
  } freeze(model.parameters());
  const ScalarModel f = [&](const Tensor& z) {
    const Tensor logits = model.class_logits(model.forward_content(z, ids).hidden);
    return gather(softmax(reshape(logits, {1, kNumClasses}), -1), {target_class}, {1});
  };
  const PathIntegral pi = integrated_gradients(x, baseline, f, m);

  AttributionReport rep;
  rep.steps = m;
  rep.target_class = target_class;
  rep.f_input = pi.f_input;
  rep.f_baseline = pi.f_baseline;
  rep.completeness_gap = pi.completeness_gap;
  rep.scores.assign(note.token_ids.size(), 0.0);
  for (std::size_t i = 0; i < ids.size(); ++i) rep.scores[i] = pi.row_scores[i];
  for (auto id : note.token_ids) {
    rep.tokens.push_back(vocab ? vocab->token(id) : std::to_string(id));
  }
  return rep;
}

}  // namespace dmwat::interpret
