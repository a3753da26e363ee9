#include "dmwat/core/ops.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "dmwat/core/kernels.hpp"

namespace dmwat {

using detail::Node;

namespace {

Node& parent(Node& self, std::size_t i) { return *self.parents[i]; }

bool same_shape(const Tensor& a, const Tensor& b) { return a.shape() == b.shape(); }

bool row_broadcastable(const Tensor& a, const Tensor& b) {
  if (b.numel() != a.cols()) return false;
  return b.rank() == 1 || (b.rank() == 2 && b.dim(0) == 1);
}

void require(bool cond, const std::string& msg) {
  if (!cond) throw ShapeError(msg);
}

std::vector<double> copy_values(const Tensor& t) {
  return {t.values().begin(), t.values().end()};
}

// Iterates softmax groups: `groups` groups of `len` elements spaced `stride`.
struct AxisLayout {
  std::size_t groups, len, stride, group_step_outer, group_step_inner, inner;
  std::size_t base(std::size_t g) const {
    return (g / inner) * group_step_outer + (g % inner) * group_step_inner;
  }
};

AxisLayout layout_for(const Tensor& a, int axis) {
  const auto r = a.rank();
  if (r == 1) return {1, a.numel(), 1, 0, 0, 1};
  require(r == 2, "softmax supports rank 1 or 2");
  const std::size_t rows = a.dim(0), cols = a.dim(1);
  if (axis == -1 || axis == 1) return {rows, cols, 1, cols, 0, 1};
  require(axis == 0, "softmax axis must be 0, 1 or -1");
  return {cols, rows, cols, 0, 1, cols};
}

}  // namespace

Tensor matmul(const Tensor& a, const Tensor& b) {
  require(b.rank() == 2, "matmul rhs must be rank 2, got " + shape_str(b.shape()));
  const bool vec = a.rank() == 1;
  require(vec || a.rank() == 2, "matmul lhs must be rank 1 or 2");
  const std::size_t m = vec ? 1 : a.dim(0);
  const std::size_t k = vec ? a.dim(0) : a.dim(1);
  const std::size_t n = b.dim(1);
  require(b.dim(0) == k, "matmul shape mismatch " + shape_str(a.shape()) + " x " +
                             shape_str(b.shape()));
  std::vector<double> out(m * n);
  kernels::gemm_nn(m, n, k, a.values(), b.values(), out, false);
  Shape s = vec ? Shape{n} : Shape{m, n};
  return Tensor::make_result(std::move(s), std::move(out), "matmul", {a, b},
                             [m, n, k](Node& self) {
                               Node& pa = parent(self, 0);
                               Node& pb = parent(self, 1);
                               if (pa.requires_grad) {
                                 kernels::gemm_nt(m, k, n, self.grad, pb.value, pa.grad, true);
                               }
                               if (pb.requires_grad) {
                                 kernels::gemm_tn(k, n, m, pa.value, self.grad, pb.grad, true);
                               }
                             });
}

Tensor matmul_nt(const Tensor& a, const Tensor& b) {
  require(a.rank() == 2 && b.rank() == 2, "matmul_nt requires rank 2 operands");
  const std::size_t m = a.dim(0), k = a.dim(1), n = b.dim(0);
  require(b.dim(1) == k, "matmul_nt shape mismatch " + shape_str(a.shape()) + " x " +
                             shape_str(b.shape()) + "^T");
  std::vector<double> out(m * n);
  kernels::gemm_nt(m, n, k, a.values(), b.values(), out, false);
  return Tensor::make_result(Shape{m, n}, std::move(out), "matmul_nt", {a, b},
                             [m, n, k](Node& self) {
                               Node& pa = parent(self, 0);
                               Node& pb = parent(self, 1);
                               if (pa.requires_grad) {
                                 kernels::gemm_nn(m, k, n, self.grad, pb.value, pa.grad, true);
                               }
                               if (pb.requires_grad) {
                                 kernels::gemm_tn(n, k, m, self.grad, pa.value, pb.grad, true);
                               }
                             });
}

Tensor transpose(const Tensor& a) {
  require(a.rank() == 2, "transpose requires rank 2");
  const std::size_t r = a.dim(0), c = a.dim(1);
  std::vector<double> out(r * c);
  const auto v = a.values();
  for (std::size_t i = 0; i < r; ++i)
    for (std::size_t j = 0; j < c; ++j) out[j * r + i] = v[i * c + j];
  return Tensor::make_result(Shape{c, r}, std::move(out), "transpose", {a}, [r, c](Node& self) {
    auto& g = parent(self, 0).grad;
    for (std::size_t i = 0; i < r; ++i)
      for (std::size_t j = 0; j < c; ++j) g[i * c + j] += self.grad[j * r + i];
  });
}

Tensor reshape(const Tensor& a, Shape shape) {
  require(shape_numel(shape) == a.numel(),
          "cannot reshape " + shape_str(a.shape()) + " to " + shape_str(shape));
  return Tensor::make_result(std::move(shape), copy_values(a), "reshape", {a}, [](Node& self) {
    auto& g = parent(self, 0).grad;
    for (std::size_t i = 0; i < g.size(); ++i) g[i] += self.grad[i];
  });
}

namespace {

template <class Fwd>
Tensor binary_elementwise(const Tensor& a, const Tensor& b, const char* name, Fwd fwd,
                          int kind) {
  const bool same = same_shape(a, b);
  require(same || row_broadcastable(a, b), std::string(name) + " shape mismatch " +
                                               shape_str(a.shape()) + " vs " +
                                               shape_str(b.shape()));
  const std::size_t n = a.numel(), cols = b.numel();
  std::vector<double> out(n);
  const auto av = a.values(), bv = b.values();
  for (std::size_t i = 0; i < n; ++i) out[i] = fwd(av[i], bv[same ? i : i % cols]);
  return Tensor::make_result(a.shape(), std::move(out), name, {a, b},
                             [same, n, cols, kind](Node& self) {
                               Node& pa = parent(self, 0);
                               Node& pb = parent(self, 1);
                               const auto& g = self.grad;
                               for (std::size_t i = 0; i < n; ++i) {
                                 const std::size_t j = same ? i : i % cols;
                                 switch (kind) {
                                   case 0:  // add
                                     if (pa.requires_grad) pa.grad[i] += g[i];
                                     if (pb.requires_grad) pb.grad[j] += g[i];
                                     break;
                                   case 1:  // sub
                                     if (pa.requires_grad) pa.grad[i] += g[i];
                                     if (pb.requires_grad) pb.grad[j] -= g[i];
                                     break;
                                   default:  // mul
                                     if (pa.requires_grad) pa.grad[i] += g[i] * pb.value[j];
                                     if (pb.requires_grad) pb.grad[j] += g[i] * pa.value[i];
                                 }
                               }
                             });
}

}  // namespace

Tensor add(const Tensor& a, const Tensor& b) {
  return binary_elementwise(a, b, "add", [](double x, double y) { return x + y; }, 0);
}

Tensor sub(const Tensor& a, const Tensor& b) {
  return binary_elementwise(a, b, "sub", [](double x, double y) { return x - y; }, 1);
}

Tensor mul(const Tensor& a, const Tensor& b) {
  return binary_elementwise(a, b, "mul", [](double x, double y) { return x * y; }, 2);
}

Tensor scale(const Tensor& a, double s) {
  std::vector<double> out = copy_values(a);
  for (auto& x : out) x *= s;
  return Tensor::make_result(a.shape(), std::move(out), "scale", {a}, [s](Node& self) {
    auto& g = parent(self, 0).grad;
    for (std::size_t i = 0; i < g.size(); ++i) g[i] += s * self.grad[i];
  });
}

Tensor add_scalar(const Tensor& a, double s) {
  std::vector<double> out = copy_values(a);
  for (auto& x : out) x += s;
  return Tensor::make_result(a.shape(), std::move(out), "add_scalar", {a}, [](Node& self) {
    auto& g = parent(self, 0).grad;
    for (std::size_t i = 0; i < g.size(); ++i) g[i] += self.grad[i];
  });
}

Tensor relu(const Tensor& a) {
  std::vector<double> out = copy_values(a);
  for (auto& x : out) x = x > 0.0 ? x : 0.0;
  return Tensor::make_result(a.shape(), std::move(out), "relu", {a}, [](Node& self) {
    Node& p = parent(self, 0);
    for (std::size_t i = 0; i < p.grad.size(); ++i) {
      if (p.value[i] > 0.0) p.grad[i] += self.grad[i];
    }
  });
}

Tensor gelu(const Tensor& a) {
  std::vector<double> out = copy_values(a);
  for (auto& x : out) x = 0.5 * x * (1.0 + std::erf(x * std::numbers::sqrt2 / 2.0));
  return Tensor::make_result(a.shape(), std::move(out), "gelu", {a}, [](Node& self) {
    Node& p = parent(self, 0);
    const double inv_sqrt_2pi = 1.0 / std::sqrt(2.0 * std::numbers::pi);
    for (std::size_t i = 0; i < p.grad.size(); ++i) {
      const double x = p.value[i];
      const double cdf = 0.5 * (1.0 + std::erf(x * std::numbers::sqrt2 / 2.0));
      const double pdf = inv_sqrt_2pi * std::exp(-0.5 * x * x);
      p.grad[i] += self.grad[i] * (cdf + x * pdf);
    }
  });
}

Tensor softmax(const Tensor& a, int axis) {
  const AxisLayout L = layout_for(a, axis);
  const auto v = a.values();
  std::vector<double> out(v.size());
  for (std::size_t g = 0; g < L.groups; ++g) {
    const std::size_t base = L.base(g);
    double mx = -INFINITY;
    for (std::size_t i = 0; i < L.len; ++i) mx = std::max(mx, v[base + i * L.stride]);
    double z = 0.0;
    for (std::size_t i = 0; i < L.len; ++i) {
      const double e = std::exp(v[base + i * L.stride] - mx);
      out[base + i * L.stride] = e;
      z += e;
    }
    for (std::size_t i = 0; i < L.len; ++i) out[base + i * L.stride] /= z;
  }
  return Tensor::make_result(a.shape(), std::move(out), "softmax", {a}, [L](Node& self) {
    auto& g = parent(self, 0).grad;
    for (std::size_t grp = 0; grp < L.groups; ++grp) {
      const std::size_t base = L.base(grp);
      double dot = 0.0;
      for (std::size_t i = 0; i < L.len; ++i) {
        const std::size_t k = base + i * L.stride;
        dot += self.grad[k] * self.value[k];
      }
      for (std::size_t i = 0; i < L.len; ++i) {
        const std::size_t k = base + i * L.stride;
        g[k] += self.value[k] * (self.grad[k] - dot);
      }
    }
  });
}

Tensor log_softmax(const Tensor& a) {
  const std::size_t rows = a.rows(), cols = a.cols();
  const auto v = a.values();
  std::vector<double> out(v.size());
  for (std::size_t r = 0; r < rows; ++r) {
    const double* x = v.data() + r * cols;
    const double mx = *std::max_element(x, x + cols);
    double z = 0.0;
    for (std::size_t j = 0; j < cols; ++j) z += std::exp(x[j] - mx);
    const double lse = mx + std::log(z);
    for (std::size_t j = 0; j < cols; ++j) out[r * cols + j] = x[j] - lse;
  }
  return Tensor::make_result(a.shape(), std::move(out), "log_softmax", {a},
                             [rows, cols](Node& self) {
                               auto& g = parent(self, 0).grad;
                               for (std::size_t r = 0; r < rows; ++r) {
                                 double gs = 0.0;
                                 for (std::size_t j = 0; j < cols; ++j) gs += self.grad[r * cols + j];
                                 for (std::size_t j = 0; j < cols; ++j) {
                                   const std::size_t k = r * cols + j;
                                   g[k] += self.grad[k] - std::exp(self.value[k]) * gs;
                                 }
                               }
                             });
}

Tensor layernorm(const Tensor& a, double eps) {
  const std::size_t rows = a.rows(), cols = a.cols();
  const auto v = a.values();
  std::vector<double> out(v.size());
  std::vector<double> inv_std(rows);
  for (std::size_t r = 0; r < rows; ++r) {
    const double* x = v.data() + r * cols;
    double mu = 0.0;
    for (std::size_t j = 0; j < cols; ++j) mu += x[j];
    mu /= static_cast<double>(cols);
    double var = 0.0;
    for (std::size_t j = 0; j < cols; ++j) var += (x[j] - mu) * (x[j] - mu);
    var /= static_cast<double>(cols);
    inv_std[r] = 1.0 / std::sqrt(var + eps);
    for (std::size_t j = 0; j < cols; ++j) out[r * cols + j] = (x[j] - mu) * inv_std[r];
  }
  return Tensor::make_result(
      a.shape(), std::move(out), "layernorm", {a},
      [rows, cols, inv_std = std::move(inv_std)](Node& self) {
        auto& g = parent(self, 0).grad;
        const double n = static_cast<double>(cols);
        for (std::size_t r = 0; r < rows; ++r) {
          const double* gy = self.grad.data() + r * cols;
          const double* y = self.value.data() + r * cols;
          double mg = 0.0, mgy = 0.0;
          for (std::size_t j = 0; j < cols; ++j) {
            mg += gy[j];
            mgy += gy[j] * y[j];
          }
          mg /= n;
          mgy /= n;
          for (std::size_t j = 0; j < cols; ++j) {
            g[r * cols + j] += inv_std[r] * (gy[j] - mg - y[j] * mgy);
          }
        }
      });
}

Tensor layer_norm(const Tensor& a, const Tensor& gamma, const Tensor& beta, double eps) {
  return add(mul(layernorm(a, eps), gamma), beta);
}

Tensor embed_lookup(const Tensor& table, std::span<const std::size_t> ids) {
  require(table.rank() == 2, "embedding table must be rank 2");
  require(!ids.empty(), "embed_lookup with no ids");
  const std::size_t vocab = table.dim(0), d = table.dim(1);
  std::vector<std::size_t> idx(ids.begin(), ids.end());
  std::vector<double> out(idx.size() * d);
  const auto tv = table.values();
  for (std::size_t i = 0; i < idx.size(); ++i) {
    if (idx[i] >= vocab) throw ShapeError("embedding id out of range");
    std::copy_n(tv.data() + idx[i] * d, d, out.data() + i * d);
  }
  Shape shape{idx.size(), d};
  return Tensor::make_result(std::move(shape), std::move(out), "embed_lookup", {table},
                             [idx = std::move(idx), d](Node& self) {
                               auto& g = parent(self, 0).grad;
                               for (std::size_t i = 0; i < idx.size(); ++i)
                                 for (std::size_t j = 0; j < d; ++j)
                                   g[idx[i] * d + j] += self.grad[i * d + j];
                             });
}

Tensor gather(const Tensor& a, std::vector<std::size_t> index, Shape out_shape) {
  require(shape_numel(out_shape) == index.size(), "gather index count does not match shape");
  const auto v = a.values();
  std::vector<double> out(index.size());
  for (std::size_t i = 0; i < index.size(); ++i) {
    if (index[i] >= v.size()) throw ShapeError("gather index out of range");
    out[i] = v[index[i]];
  }
  return Tensor::make_result(std::move(out_shape), std::move(out), "gather", {a},
                             [index = std::move(index)](Node& self) {
                               auto& g = parent(self, 0).grad;
                               for (std::size_t i = 0; i < index.size(); ++i)
                                 g[index[i]] += self.grad[i];
                             });
}

Tensor slice_rows(const Tensor& a, std::size_t begin, std::size_t end) {
  require(a.rank() == 2, "slice_rows requires rank 2");
  require(begin < end && end <= a.dim(0), "slice_rows range out of bounds");
  const std::size_t c = a.dim(1);
  const auto v = a.values();
  std::vector<double> out(v.begin() + begin * c, v.begin() + end * c);
  return Tensor::make_result(Shape{end - begin, c}, std::move(out), "slice_rows", {a},
                             [begin, c](Node& self) {
                               auto& g = parent(self, 0).grad;
                               for (std::size_t i = 0; i < self.grad.size(); ++i)
                                 g[begin * c + i] += self.grad[i];
                             });
}

Tensor row(const Tensor& a, std::size_t r) {
  return reshape(slice_rows(a, r, r + 1), Shape{a.cols()});
}

Tensor concat(const std::vector<Tensor>& parts, int axis) {
  require(!parts.empty(), "concat of nothing");
  const std::size_t rank = parts[0].rank();
  for (const auto& p : parts) require(p.rank() == rank, "concat rank mismatch");
  if (rank == 1) require(axis == 0 || axis == -1, "rank-1 concat must use axis 0");
  const bool along_cols = rank == 2 && (axis == 1 || axis == -1);
  const bool flat = rank == 1 || !along_cols;

  if (flat) {
    // Row stacking (or vector join) is plain concatenation of storage.
    std::size_t total = 0;
    std::size_t cols = rank == 2 ? parts[0].dim(1) : 0;
    std::size_t rows = 0;
    for (const auto& p : parts) {
      if (rank == 2) {
        require(p.dim(1) == cols, "concat axis 0 column mismatch");
        rows += p.dim(0);
      }
      total += p.numel();
    }
    std::vector<double> out;
    out.reserve(total);
    std::vector<std::size_t> offsets;
    for (const auto& p : parts) {
      offsets.push_back(out.size());
      out.insert(out.end(), p.values().begin(), p.values().end());
    }
    Shape s = rank == 1 ? Shape{total} : Shape{rows, cols};
    return Tensor::make_result(std::move(s), std::move(out), "concat", parts,
                               [offsets = std::move(offsets)](Node& self) {
                                 for (std::size_t k = 0; k < self.parents.size(); ++k) {
                                   Node& p = *self.parents[k];
                                   if (!p.requires_grad) continue;
                                   for (std::size_t i = 0; i < p.grad.size(); ++i)
                                     p.grad[i] += self.grad[offsets[k] + i];
                                 }
                               });
  }

  const std::size_t rows = parts[0].dim(0);
  std::size_t cols = 0;
  std::vector<std::size_t> col_off;
  for (const auto& p : parts) {
    require(p.dim(0) == rows, "concat axis 1 row mismatch");
    col_off.push_back(cols);
    cols += p.dim(1);
  }
  std::vector<double> out(rows * cols);
  for (std::size_t k = 0; k < parts.size(); ++k) {
    const auto v = parts[k].values();
    const std::size_t pc = parts[k].dim(1);
    for (std::size_t r = 0; r < rows; ++r)
      std::copy_n(v.data() + r * pc, pc, out.data() + r * cols + col_off[k]);
  }
  return Tensor::make_result(Shape{rows, cols}, std::move(out), "concat", parts,
                             [rows, cols, col_off = std::move(col_off)](Node& self) {
                               for (std::size_t k = 0; k < self.parents.size(); ++k) {
                                 Node& p = *self.parents[k];
                                 if (!p.requires_grad) continue;
                                 const std::size_t pc = p.shape[1];
                                 for (std::size_t r = 0; r < rows; ++r)
                                   for (std::size_t j = 0; j < pc; ++j)
                                     p.grad[r * pc + j] += self.grad[r * cols + col_off[k] + j];
                               }
                             });
}

Tensor sum(const Tensor& a) {
  double s = 0.0;
  for (double x : a.values()) s += x;
  return Tensor::make_result(Shape{1}, {s}, "sum", {a}, [](Node& self) {
    auto& g = parent(self, 0).grad;
    for (auto& x : g) x += self.grad[0];
  });
}

Tensor mean(const Tensor& a) {
  const double n = static_cast<double>(a.numel());
  double s = 0.0;
  for (double x : a.values()) s += x;
  return Tensor::make_result(Shape{1}, {s / n}, "mean", {a}, [n](Node& self) {
    auto& g = parent(self, 0).grad;
    for (auto& x : g) x += self.grad[0] / n;
  });
}

Tensor mean_rows(const Tensor& a) {
  const std::size_t rows = a.rows(), cols = a.cols();
  const auto v = a.values();
  std::vector<double> out(cols, 0.0);
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t j = 0; j < cols; ++j) out[j] += v[r * cols + j];
  for (auto& x : out) x /= static_cast<double>(rows);
  return Tensor::make_result(Shape{cols}, std::move(out), "mean_rows", {a},
                             [rows, cols](Node& self) {
                               auto& g = parent(self, 0).grad;
                               const double inv = 1.0 / static_cast<double>(rows);
                               for (std::size_t r = 0; r < rows; ++r)
                                 for (std::size_t j = 0; j < cols; ++j)
                                   g[r * cols + j] += self.grad[j] * inv;
                             });
}

namespace {

// Shared forward/backward for CE and KL: both have gradient p*sum(t) - t.
Tensor divergence(const Tensor& logits, const Tensor& target, bool kl, const char* name) {
  require(same_shape(logits, target), std::string(name) + " shape mismatch " +
                                          shape_str(logits.shape()) + " vs " +
                                          shape_str(target.shape()));
  const std::size_t rows = logits.rows(), cols = logits.cols();
  const auto z = logits.values();
  const auto t = target.values();
  std::vector<double> probs(z.size());
  double loss = 0.0;
  for (std::size_t r = 0; r < rows; ++r) {
    const double* zr = z.data() + r * cols;
    const double mx = *std::max_element(zr, zr + cols);
    double s = 0.0;
    for (std::size_t j = 0; j < cols; ++j) s += std::exp(zr[j] - mx);
    const double lse = mx + std::log(s);
    for (std::size_t j = 0; j < cols; ++j) {
      const std::size_t k = r * cols + j;
      const double logp = zr[j] - lse;
      probs[k] = std::exp(logp);
      if (t[k] != 0.0) loss += t[k] * ((kl ? std::log(t[k]) : 0.0) - logp);
    }
  }
  loss /= static_cast<double>(rows);
  std::vector<double> tv(t.begin(), t.end());
  return Tensor::make_result(
      Shape{1}, {loss}, name, {logits, target},
      [rows, cols, probs = std::move(probs), tv = std::move(tv)](Node& self) {
        Node& pl = parent(self, 0);
        if (!pl.requires_grad) return;
        const double g = self.grad[0] / static_cast<double>(rows);
        for (std::size_t r = 0; r < rows; ++r) {
          double ts = 0.0;
          for (std::size_t j = 0; j < cols; ++j) ts += tv[r * cols + j];
          for (std::size_t j = 0; j < cols; ++j) {
            const std::size_t k = r * cols + j;
            pl.grad[k] += g * (probs[k] * ts - tv[k]);
          }
        }
      });
}

}  // namespace

Tensor cross_entropy(const Tensor& logits, const Tensor& target_probs) {
  return divergence(logits, target_probs, false, "cross_entropy");
}

Tensor cross_entropy(const Tensor& logits, std::span<const std::size_t> labels) {
  require(labels.size() == logits.rows(), "cross_entropy label count mismatch");
  const std::size_t cols = logits.cols();
  std::vector<double> t(logits.numel(), 0.0);
  for (std::size_t r = 0; r < labels.size(); ++r) {
    require(labels[r] < cols, "cross_entropy label out of range");
    t[r * cols + labels[r]] = 1.0;
  }
  return divergence(logits, Tensor(logits.shape(), std::move(t)), false, "cross_entropy");
}

Tensor kl_divergence(const Tensor& logits, const Tensor& target_probs) {
  return divergence(logits, target_probs, true, "kl_divergence");
}

std::vector<double> softmax_values(std::span<const double> logits) {
  std::vector<double> out(logits.begin(), logits.end());
  const double mx = *std::max_element(out.begin(), out.end());
  double z = 0.0;
  for (auto& x : out) {
    x = std::exp(x - mx);
    z += x;
  }
  for (auto& x : out) x /= z;
  return out;
}

std::vector<double> one_hot(std::size_t index, std::size_t n) {
  if (index >= n) throw ShapeError("one_hot index out of range");
  std::vector<double> v(n, 0.0);
  v[index] = 1.0;
  return v;
}

}  // namespace dmwat
