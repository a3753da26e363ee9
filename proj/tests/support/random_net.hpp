#pragma once

// Small random networks that route through every differentiable primitive.

#include <vector>

#include "dmwat/core/ops.hpp"
#include "dmwat/core/params.hpp"
#include "dmwat/core/rng.hpp"

namespace dmwat::testing {

struct RandomNet {
  std::vector<Tensor> params;  // x, w1, b1, gamma, beta, table, w2
  std::vector<std::size_t> ids;
  std::vector<std::size_t> gather_index;
  std::vector<std::size_t> labels;
  Tensor target;  // [rows, 3] probabilities, constant
  std::size_t rows = 0, hidden = 0;

  Tensor loss() const {
    const Tensor& x = params[0];
    const Tensor& w1 = params[1];
    const Tensor& b1 = params[2];
    const Tensor& gamma = params[3];
    const Tensor& beta = params[4];
    const Tensor& table = params[5];
    const Tensor& w2 = params[6];

    const Tensor h1 = add(matmul(x, w1), b1);
    const Tensor h2 = mul(gelu(h1), relu(add_scalar(h1, 0.25)));
    const Tensor h3 = sub(h2, scale(h1, 0.5));
    const Tensor ln = layer_norm(h3, gamma, beta);
    const Tensor plain = layernorm(h3);
    const Tensor sim = matmul_nt(ln, plain);  // [r, r]
    const Tensor attn = mul(softmax(sim, -1), softmax(sim, 0));
    const Tensor e = embed_lookup(table, ids);  // [r, h]
    const Tensor g = reshape(gather(e, gather_index, {rows * hidden}), {rows, hidden});
    const Tensor mixed = matmul(attn, add(ln, g));
    const Tensor wide = concat({mixed, transpose(transpose(plain))}, 1);  // [r, 2h]
    const Tensor logits = matmul(wide, w2);                           // [r, 3]
    const Tensor stacked = concat({slice_rows(logits, 0, 1), logits}, 0);
    Tensor total = add(cross_entropy(logits, labels), cross_entropy(logits, target));
    total = add(total, kl_divergence(logits, target));
    total = add(total, scale(mean(log_softmax(logits)), 0.1));
    total = add(total, scale(sum(mean_rows(stacked)), 0.05));
    total = add(total, scale(sum(row(wide, rows - 1)), 0.02));
    return total;
  }
};

inline RandomNet make_random_net(std::uint64_t seed) {
  Rng rng(seed);
  RandomNet net;
  net.rows = 2 + rng.below(3);
  const std::size_t in = 2 + rng.below(3);
  net.hidden = 2 + rng.below(3);
  const std::size_t vocab = 5;
  auto param = [&](Shape s, double stddev) {
    Tensor t = normal_param(std::move(s), stddev, rng);
    return t;
  };
  net.params = {param({net.rows, in}, 1.0),       param({in, net.hidden}, 0.7),
                param({net.hidden}, 0.3),          param({net.hidden}, 0.5),
                param({net.hidden}, 0.3),          param({vocab, net.hidden}, 0.5),
                param({2 * net.hidden, 3}, 0.7)};
  auto g = net.params[3].values_mut();
  for (auto& v : g) v += 1.0;
  for (std::size_t i = 0; i < net.rows; ++i) net.ids.push_back(rng.below(vocab));
  const std::size_t n = net.rows * net.hidden;
  for (std::size_t i = 0; i < n; ++i) net.gather_index.push_back(rng.below(n));
  std::vector<double> t(net.rows * 3);
  for (std::size_t r = 0; r < net.rows; ++r) {
    net.labels.push_back(rng.below(3));
    double z = 0.0;
    for (std::size_t c = 0; c < 3; ++c) z += t[r * 3 + c] = 0.1 + rng.uniform();
    for (std::size_t c = 0; c < 3; ++c) t[r * 3 + c] /= z;
  }
  net.target = Tensor({net.rows, 3}, std::move(t));
  return net;
}

}  // namespace dmwat::testing
