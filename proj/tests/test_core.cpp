#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "dmwat/core/checkpoint.hpp"
#include "dmwat/core/kernels.hpp"
#include "dmwat/core/ops.hpp"
#include "dmwat/core/optim.hpp"
#include "dmwat/core/params.hpp"
#include "dmwat/core/rng.hpp"
#include "support/gradcheck.hpp"
#include "support/oracle.hpp"
#include "support/random_net.hpp"

using namespace dmwat;
using dmwat::testing::gradcheck;

TEST_SUITE("core") {

TEST_CASE("softmax of 1,2,3 matches the high-precision oracle") {
  const auto& want = dmwat::testing::oracle()["softmax_123"];
  const Tensor s = softmax(Tensor::vector({1, 2, 3}));
  for (std::size_t i = 0; i < 3; ++i) CHECK(s[i] == doctest::Approx(want[i].get<double>()).epsilon(1e-14));
  const auto v = softmax_values(std::vector<double>{1, 2, 3});
  CHECK(v[2] == doctest::Approx(0.66524096).epsilon(1e-8));
}

TEST_CASE("softmax is shift invariant and survives large logits") {
  const Tensor a = softmax(Tensor::vector({1000, 1001, 1002}));
  const Tensor b = softmax(Tensor::vector({0, 1, 2}));
  for (std::size_t i = 0; i < 3; ++i) CHECK(a[i] == doctest::Approx(b[i]).epsilon(1e-15));
}

TEST_CASE("matmul shape mismatch throws") {
  CHECK_THROWS_AS(matmul(Tensor({2, 3}), Tensor({2, 3})), ShapeError);
}

TEST_CASE("non-finite results raise NumericError") {
  Tensor big({1}, std::vector<double>{1e300});
  CHECK_THROWS_AS(mul(big, big), NumericError);
}

TEST_CASE("backward rules") {
  Tensor x({2}, std::vector<double>{1.0, 2.0}, true);
  SUBCASE("non-scalar root") { CHECK_THROWS_AS(scale(x, 2.0).backward(), AutogradError); }
  SUBCASE("twice on one result") {
    const Tensor y = sum(mul(x, x));
    y.backward();
    CHECK(x.grad()[0] == doctest::Approx(2.0));
    CHECK(x.grad()[1] == doctest::Approx(4.0));
    CHECK_THROWS_AS(y.backward(), AutogradError);
  }
  SUBCASE("no grad mode records nothing") {
    NoGradGuard g;
    CHECK_FALSE(sum(x).requires_grad());
  }
  SUBCASE("gradients accumulate across two losses") {
    sum(x).backward();
    sum(scale(x, 3.0)).backward();
    CHECK(x.grad()[0] == doctest::Approx(4.0));
  }
}

TEST_CASE("every primitive passes a finite-difference check") {
  for (std::uint64_t seed = 100; seed < 105; ++seed) {
    auto net = dmwat::testing::make_random_net(seed);
    const auto r = gradcheck(net.params, [&] { return net.loss(); });
    CAPTURE(seed);
    CHECK(r.max_rel_error < 1e-4);
    CHECK(r.entries > 20);
  }
}

TEST_CASE("serial and OpenMP GEMM agree bit for bit") {
  Rng rng(3);
  const std::size_t m = 37, n = 29, k = 41;
  std::vector<double> a(m * k), b(k * n), bt(n * k), at(k * m);
  for (auto& v : a) v = rng.normal();
  for (auto& v : b) v = rng.normal();
  for (auto& v : bt) v = rng.normal();
  for (auto& v : at) v = rng.normal();
  std::vector<double> c1(m * n, 1.0), c2(m * n, 1.0);
  kernels::serial::gemm_nn(m, n, k, a, b, c1, true);
  kernels::omp::gemm_nn(m, n, k, a, b, c2, true);
  CHECK(c1 == c2);
  kernels::serial::gemm_nt(m, n, k, a, bt, c1, false);
  kernels::omp::gemm_nt(m, n, k, a, bt, c2, false);
  CHECK(c1 == c2);
  kernels::serial::gemm_tn(m, n, k, at, b, c1, false);
  kernels::omp::gemm_tn(m, n, k, at, b, c2, false);
  CHECK(c1 == c2);
  // Spot check against a direct triple loop.
  double ref = 0.0;
  for (std::size_t p = 0; p < k; ++p) ref += at[p * m + 5] * b[p * n + 7];
  CHECK(c1[5 * n + 7] == doctest::Approx(ref).epsilon(1e-12));
}

TEST_CASE("rng streams are reproducible and independent") {
  Rng a(42), b(42);
  for (int i = 0; i < 10; ++i) CHECK(a.next_u64() == b.next_u64());
  const Rng root(42);
  CHECK(root.derive("x").next_u64() == root.derive("x").next_u64());
  CHECK(root.derive("x").next_u64() != root.derive("y").next_u64());
  CHECK(root.derive("x", 1).next_u64() != root.derive("x", 2).next_u64());
}

TEST_CASE("optimizer step") {
  ParameterSet ps;
  Tensor w({2}, std::vector<double>{1.0, -1.0}, true);
  Tensor unused({1}, std::vector<double>{5.0}, true);
  ps.add("w", w);
  ps.add("unused", unused);
  auto opt = make_sgd(0.1);
  CHECK_THROWS_AS(optimizer_step(opt, ps), AutogradError);
  sum(mul(w, w)).backward();
  optimizer_step(opt, ps);
  CHECK(w[0] == doctest::Approx(0.8));
  CHECK(w[1] == doctest::Approx(-0.8));
  CHECK(unused[0] == 5.0);
  CHECK_FALSE(w.has_grad());
}

TEST_CASE("adam decreases a quadratic") {
  ParameterSet ps;
  Tensor w({3}, std::vector<double>{2.0, -3.0, 1.0}, true);
  ps.add("w", w);
  auto opt = make_adam(0.1);
  double first = 0.0, last = 0.0;
  for (int t = 0; t < 100; ++t) {
    const Tensor l = sum(mul(w, w));
    if (t == 0) first = l.item();
    last = l.item();
    l.backward();
    optimizer_step(opt, ps);
  }
  CHECK(last < 0.05 * first);
}

TEST_CASE("checkpoint round trip and corruption") {
  const auto dir = std::filesystem::temp_directory_path() / "dmwat_test_ckpt";
  std::filesystem::create_directories(dir);
  ParameterSet ps;
  Rng rng(1);
  ps.add("a", normal_param({2, 3}, 1.0, rng));
  ps.add("b", normal_param({4}, 1.0, rng));
  save_checkpoint(dir / "m.ckpt", ps, {{"note", "x"}});
  const auto back = read_checkpoint(dir / "m.ckpt");
  CHECK(back.config["note"] == "x");
  CHECK(back.tensors.at("a").values()[4] == ps.at("a").values()[4]);

  ParameterSet other;
  other.add("a", Tensor({2, 3}, 0.0, true));
  other.add("b", Tensor({4}, 0.0, true));
  load_checkpoint_into(dir / "m.ckpt", other);
  CHECK(other.at("b").values()[3] == ps.at("b").values()[3]);

  ParameterSet wrong;
  wrong.add("a", Tensor({3, 2}, 0.0, true));
  CHECK_THROWS_AS(load_checkpoint_into(dir / "m.ckpt", wrong), CheckpointError);

  {
    std::ofstream os(dir / "bad.ckpt", std::ios::binary);
    os << "NOTACKPT";
  }
  CHECK_THROWS_AS(read_checkpoint(dir / "bad.ckpt"), CheckpointError);
  CHECK_THROWS_AS(read_checkpoint(dir / "missing.ckpt"), CheckpointError);
  std::filesystem::remove_all(dir);
}

}  // TEST_SUITE
