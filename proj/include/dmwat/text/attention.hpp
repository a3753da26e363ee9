#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "dmwat/core/tensor.hpp"

namespace dmwat::text {

/// Additive score for masked keys. Large enough that exp() underflows to
/// exactly zero while keeping every intermediate finite.
inline constexpr double kMaskedScore = -1e30;

/// Bucketed relative distance between query i and key j: clamp(i - j, -k, k),
/// shifted to [0, 2k].
std::size_t relative_bucket(std::size_t i, std::size_t j, std::size_t k);

struct AttentionResult {
  Tensor output;   // [n, dh]
  Tensor weights;  // [n, n], rows sum to 1
};

/// Single-head attention with content and relative-position terms:
///   s_ij = (Qc_i + Qr[b(j,i)]) . (Kc_j + Kr[b(i,j)]) / sqrt(d_k)
///   out  = softmax(s + mask) V
/// Qc, Kc, V: [n, dh]. Qr, Kr: [2k+1, dh] projected relative-position rows.
/// key_mask (optional, size n): true marks a key that must get zero weight.
AttentionResult disentangled_attention(const Tensor& qc, const Tensor& kc, const Tensor& v,
                                       const Tensor& qr, const Tensor& kr, std::size_t k,
                                       std::span<const bool> key_mask = {});

/// Plain scaled dot-product attention, softmax(QKᵀ/sqrt(d_k) + mask) V.
AttentionResult scaled_dot_attention(const Tensor& qc, const Tensor& kc, const Tensor& v,
                                     std::span<const bool> key_mask = {});

namespace reference {

/// Direct pairwise evaluation of disentangled_attention on row-major
/// buffers, for testing. Returns {output [n*dh], weights [n*n]}.
struct Result {
  std::vector<double> output;
  std::vector<double> weights;
};
Result disentangled_attention(std::size_t n, std::size_t dh, std::span<const double> qc,
                              std::span<const double> kc, std::span<const double> v,
                              std::span<const double> qr, std::span<const double> kr,
                              std::size_t k, std::span<const bool> key_mask = {});

}  // namespace reference

}  // namespace dmwat::text
