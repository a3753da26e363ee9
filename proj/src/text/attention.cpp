#include "dmwat/text/attention.hpp"

#include <algorithm>
#include <cmath>

#include "dmwat/core/ops.hpp"

namespace dmwat::text {

std::size_t relative_bucket(std::size_t i, std::size_t j, std::size_t k) {
  const auto d = static_cast<long long>(i) - static_cast<long long>(j);
  const auto kk = static_cast<long long>(k);
  return static_cast<std::size_t>(std::clamp(d, -kk, kk) + kk);
}

namespace {

void check_2d(const Tensor& t, std::size_t rows, std::size_t cols, const char* what) {
  if (t.rank() != 2 || t.dim(0) != rows || t.dim(1) != cols) {
    throw ShapeError(std::string("attention: ") + what + " has shape " + shape_str(t.shape()) +
                     ", expected [" + std::to_string(rows) + "," + std::to_string(cols) + "]");
  }
}

Tensor finish(const Tensor& scores, const Tensor& v, std::size_t dh, std::span<const bool> key_mask,
              AttentionResult& out) {
  const std::size_t n = scores.dim(0);
  Tensor s = scale(scores, 1.0 / std::sqrt(static_cast<double>(dh)));
  if (!key_mask.empty()) {
    if (key_mask.size() != n) throw ShapeError("attention: key mask length mismatch");
    std::vector<double> m(n * n, 0.0);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j)
        if (key_mask[j]) m[i * n + j] = kMaskedScore;
    s = add(s, Tensor(Shape{n, n}, std::move(m)));
  }
  out.weights = softmax(s, -1);
  out.output = matmul(out.weights, v);
  return out.output;
}

}  // namespace

AttentionResult disentangled_attention(const Tensor& qc, const Tensor& kc, const Tensor& v,
                                       const Tensor& qr, const Tensor& kr, std::size_t k,
                                       std::span<const bool> key_mask) {
  if (qc.rank() != 2) throw ShapeError("attention: Qc must be rank 2");
  const std::size_t n = qc.dim(0), dh = qc.dim(1), nb = 2 * k + 1;
  check_2d(kc, n, dh, "Kc");
  check_2d(v, n, dh, "V");
  check_2d(qr, nb, dh, "Qr");
  check_2d(kr, nb, dh, "Kr");

  // Expand (Qc_i + Qr_a)(Kc_j + Kr_b) into four products, then gather the
  // relative terms for each (i, j).
  const Tensor c2c = matmul_nt(qc, kc);  // [n, n]
  const Tensor c2p = matmul_nt(qc, kr);  // [n, nb]  Qc_i . Kr_b
  const Tensor p2c = matmul_nt(kc, qr);  // [n, nb]  Kc_j . Qr_a
  const Tensor p2p = matmul_nt(qr, kr);  // [nb, nb] Qr_a . Kr_b
  std::vector<std::size_t> i_c2p(n * n), i_p2c(n * n), i_p2p(n * n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      const std::size_t a = relative_bucket(j, i, k), b = relative_bucket(i, j, k);
      i_c2p[i * n + j] = i * nb + b;
      i_p2c[i * n + j] = j * nb + a;
      i_p2p[i * n + j] = a * nb + b;
    }
  }
  const Shape nn{n, n};
  const Tensor scores = add(add(c2c, gather(c2p, std::move(i_c2p), nn)),
                            add(gather(p2c, std::move(i_p2c), nn), gather(p2p, std::move(i_p2p), nn)));
  AttentionResult out;
  finish(scores, v, dh, key_mask, out);
  return out;
}

AttentionResult scaled_dot_attention(const Tensor& qc, const Tensor& kc, const Tensor& v,
                                     std::span<const bool> key_mask) {
  if (qc.rank() != 2) throw ShapeError("attention: Q must be rank 2");
  check_2d(kc, qc.dim(0), qc.dim(1), "K");
  check_2d(v, qc.dim(0), qc.dim(1), "V");
  AttentionResult out;
  finish(matmul_nt(qc, kc), v, qc.dim(1), key_mask, out);
  return out;
}

namespace reference {

Result disentangled_attention(std::size_t n, std::size_t dh, std::span<const double> qc,
                              std::span<const double> kc, std::span<const double> v,
                              std::span<const double> qr, std::span<const double> kr,
                              std::size_t k, std::span<const bool> key_mask) {
  const std::size_t nb = 2 * k + 1;
  if (qc.size() != n * dh || kc.size() != n * dh || v.size() != n * dh || qr.size() != nb * dh ||
      kr.size() != nb * dh || (!key_mask.empty() && key_mask.size() != n)) {
    throw ShapeError("reference attention: buffer size mismatch");
  }
  Result r{std::vector<double>(n * dh, 0.0), std::vector<double>(n * n, 0.0)};
  const double inv = 1.0 / std::sqrt(static_cast<double>(dh));
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<double> s(n);
    for (std::size_t j = 0; j < n; ++j) {
      const std::size_t a = relative_bucket(j, i, k), b = relative_bucket(i, j, k);
      double dot = 0.0;
      for (std::size_t d = 0; d < dh; ++d)
        dot += (qc[i * dh + d] + qr[a * dh + d]) * (kc[j * dh + d] + kr[b * dh + d]);
      s[j] = dot * inv;
    }
    double mx = -INFINITY;
    for (std::size_t j = 0; j < n; ++j)
      if (key_mask.empty() || !key_mask[j]) mx = std::max(mx, s[j]);
    double z = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      const double e = (!key_mask.empty() && key_mask[j]) ? 0.0 : std::exp(s[j] - mx);
      r.weights[i * n + j] = e;
      z += e;
    }
    for (std::size_t j = 0; j < n; ++j) {
      r.weights[i * n + j] /= z;
      for (std::size_t d = 0; d < dh; ++d) r.output[i * dh + d] += r.weights[i * n + j] * v[j * dh + d];
    }
  }
  return r;
}

}  // namespace reference

}  // namespace dmwat::text
