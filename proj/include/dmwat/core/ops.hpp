#pragma once

// Differentiable primitives. Shapes are rank 1 ([n]) or rank 2 ([rows, cols]);
// "row broadcast" means a [cols] or [1, cols] operand applied to every row.

#include <cstddef>
#include <span>
#include <vector>

#include "dmwat/core/tensor.hpp"

namespace dmwat {

Tensor matmul(const Tensor& a, const Tensor& b);     // [m,k] x [k,n]
Tensor matmul_nt(const Tensor& a, const Tensor& b);  // [m,k] x [n,k]^T
Tensor transpose(const Tensor& a);
Tensor reshape(const Tensor& a, Shape shape);

Tensor add(const Tensor& a, const Tensor& b);  // same shape or row broadcast of b
Tensor sub(const Tensor& a, const Tensor& b);  // same shape or row broadcast of b
Tensor mul(const Tensor& a, const Tensor& b);  // same shape or row broadcast of b
Tensor scale(const Tensor& a, double s);
Tensor add_scalar(const Tensor& a, double s);

Tensor relu(const Tensor& a);
Tensor gelu(const Tensor& a);  // exact erf form

/// Softmax along `axis` (0 = down columns, last = across each row).
Tensor softmax(const Tensor& a, int axis = -1);
Tensor log_softmax(const Tensor& a);  // along last axis

/// Per-row normalization to zero mean / unit variance, no affine part.
Tensor layernorm(const Tensor& a, double eps = 1e-9);
/// layernorm followed by gamma * x + beta (row broadcast).
Tensor layer_norm(const Tensor& a, const Tensor& gamma, const Tensor& beta, double eps = 1e-9);

/// Rows of `table` selected by `ids`: [ids.size(), table.cols()].
Tensor embed_lookup(const Tensor& table, std::span<const std::size_t> ids);
/// Arbitrary differentiable gather: out[i] = a.flat[index[i]].
Tensor gather(const Tensor& a, std::vector<std::size_t> index, Shape out_shape);
Tensor slice_rows(const Tensor& a, std::size_t begin, std::size_t end);
Tensor row(const Tensor& a, std::size_t r);  // rank-1 result
Tensor concat(const std::vector<Tensor>& parts, int axis);

Tensor sum(const Tensor& a);
Tensor mean(const Tensor& a);
Tensor mean_rows(const Tensor& a);  // [r,c] -> [c]

/// Mean over rows of -sum(target * log_softmax(logits)). Targets are
/// probability rows with the logits' shape.
Tensor cross_entropy(const Tensor& logits, const Tensor& target_probs);
Tensor cross_entropy(const Tensor& logits, std::span<const std::size_t> labels);
/// Mean over rows of KL(target || softmax(logits)).
Tensor kl_divergence(const Tensor& logits, const Tensor& target_probs);

// Plain helpers on values (no tape).
std::vector<double> softmax_values(std::span<const double> logits);
std::vector<double> one_hot(std::size_t index, std::size_t n);

}  // namespace dmwat
