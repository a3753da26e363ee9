#include <doctest.h>

#include <cmath>
#include <numbers>

#include "dmwat/core/rng.hpp"
#include "dmwat/fusion/fuse.hpp"
#include "dmwat/fusion/mlp.hpp"
#include "dmwat/fusion/svm.hpp"
#include "support/oracle.hpp"

using namespace dmwat;
using namespace dmwat::fusion;

namespace {

// Three Gaussian blobs in d dimensions, well separated along the first axes.
void blobs(std::size_t n, std::size_t d, double spread, Rng& rng, FeatureMatrix& x,
           std::vector<ReferralDecision>& y) {
  x = FeatureMatrix{};
  y.clear();
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t c = i % 3;
    std::vector<double> row(d);
    for (auto& v : row) v = spread * rng.normal();
    row[c] += 3.0;
    x.append(row);
    y.push_back(decision_from_index(c));
  }
}

double train_accuracy(const ClassifierHead& h, const FeatureMatrix& x, std::span<const ReferralDecision> y) {
  std::size_t ok = 0;
  for (std::size_t i = 0; i < x.rows; ++i) ok += h.predict(x.row(i)).label == y[i];
  return static_cast<double>(ok) / static_cast<double>(x.rows);
}

}  // namespace

TEST_SUITE("fusion") {

TEST_CASE("fuse concatenates image first") {
  const EmbeddingVector img{{3.0, 4.0}};
  const EmbeddingVector txt{{1.0, 0.0, 0.0}};
  const auto f = fuse(img, txt, false, "c1");
  CHECK(f.vector.size() == 5);
  CHECK(f.image_block()[1] == 4.0);
  CHECK(f.text_block()[0] == 1.0);
  CHECK(f.source_id == "c1");
  const auto n = fuse(img, txt, true);
  CHECK(n.vector.values[0] == doctest::Approx(0.6));
  CHECK_THROWS_AS(fuse(EmbeddingVector{}, txt), MissingModalityError);
  CHECK_THROWS_AS(fuse(img, EmbeddingVector{}), MissingModalityError);
}

TEST_CASE("two separable points give the perpendicular bisector") {
  const auto& o = dmwat::testing::oracle()["svm_two_points"];
  FeatureMatrix x;
  x.append(std::vector<double>{0.0, 0.0});
  x.append(std::vector<double>{4.0, 4.0});
  const std::vector<ReferralDecision> y{ReferralDecision::continue_treatment, ReferralDecision::change_urgent};
  SvmModel svm(SvmConfig{10.0, 500, 0.5, 0});
  svm.fit(x, y);
  CHECK(train_accuracy(svm, x, y) == 1.0);
  const auto wa = svm.weights(0), wb = svm.weights(2);
  const double dx = wb[0] - wa[0], dy = wb[1] - wa[1];
  const double nx = o["normal"][0].get<double>(), ny = o["normal"][1].get<double>();
  const double cosang = (dx * nx + dy * ny) / std::hypot(dx, dy);
  CHECK(std::acos(std::min(1.0, cosang)) * 180.0 / std::numbers::pi < 15.0);
  // The midpoint sits on the A/B boundary.
  const auto s = svm.scores(std::vector<double>{2.0, 2.0});
  CHECK(std::abs(s[2] - s[0]) < 0.2 * std::abs(svm.scores(std::vector<double>{0.0, 0.0})[0] -
                                               svm.scores(std::vector<double>{0.0, 0.0})[2]));
}

TEST_CASE("svm objective never increases") {
  Rng rng(1);
  FeatureMatrix x;
  std::vector<ReferralDecision> y;
  blobs(90, 6, 1.5, rng, x, y);
  SvmModel svm(SvmConfig{1.0, 150, 1.0, 0});
  svm.fit(x, y);
  const auto& h = svm.objective_history();
  REQUIRE(h.size() == 151);
  for (std::size_t t = 1; t < h.size(); ++t)
    for (std::size_t c = 0; c < 3; ++c) CHECK(h[t][c] <= h[t - 1][c] + 1e-6);
}

TEST_CASE("hinge subgradient matches finite differences away from kinks") {
  Rng rng(2);
  FeatureMatrix x;
  std::vector<ReferralDecision> y;
  blobs(30, 4, 1.0, rng, x, y);
  const auto signs = svm::ovr_signs(y, 1);
  std::vector<double> w(4);
  for (auto& v : w) v = 0.3 * rng.normal();
  const double b = 0.1;
  std::vector<double> gw(4);
  double gb = 0.0;
  svm::subgradient(w, b, x, signs, 2.0, gw, gb);
  const double h = 1e-6;
  for (std::size_t j = 0; j < 4; ++j) {
    auto wp = w, wm = w;
    wp[j] += h;
    wm[j] -= h;
    const double fd = (svm::objective(wp, b, x, signs, 2.0) - svm::objective(wm, b, x, signs, 2.0)) / (2 * h);
    CHECK(std::abs(fd - gw[j]) / std::max(1.0, std::abs(fd)) < 1e-4);
  }
  const double fdb = (svm::objective(w, b + h, x, signs, 2.0) - svm::objective(w, b - h, x, signs, 2.0)) / (2 * h);
  CHECK(std::abs(fdb - gb) / std::max(1.0, std::abs(fdb)) < 1e-4);
}

TEST_CASE("heads fit separable fusions") {
  Rng rng(3);
  FeatureMatrix x;
  std::vector<ReferralDecision> y;
  blobs(150, 8, 0.4, rng, x, y);
  SvmModel svm;
  svm.fit(x, y);
  CHECK(train_accuracy(svm, x, y) >= 0.95);
  MlpHead mlp;
  mlp.fit(x, y);
  CHECK(train_accuracy(mlp, x, y) >= 0.95);
  CHECK(mlp.history().epoch_loss.size() <= 200);
  const auto p = mlp.probabilities(x.row(0));
  CHECK(p[0] + p[1] + p[2] == doctest::Approx(1.0));
}

TEST_CASE("training set validation") {
  FeatureMatrix x;
  x.append(std::vector<double>{1.0});
  x.append(std::vector<double>{2.0});
  const std::vector<ReferralDecision> one{ReferralDecision::change_urgent, ReferralDecision::change_urgent};
  SvmModel svm;
  CHECK_THROWS(svm.fit(x, one));
  CHECK_THROWS(svm.fit(x, std::vector<ReferralDecision>{ReferralDecision::change_urgent}));
  CHECK_THROWS(svm.predict(std::vector<double>{1.0}));
  MlpHead mlp;
  CHECK_THROWS(mlp.fit(FeatureMatrix{}, {}));
}

TEST_CASE("urgent tie break") {
  const std::array<double, 3> tie{0.5, 0.5, 0.0};
  CHECK(urgent_argmax(tie) == ReferralDecision::change_non_urgent);
  const std::array<double, 3> all{1.0, 1.0, 1.0};
  CHECK(urgent_argmax(all) == ReferralDecision::change_urgent);
}

}  // TEST_SUITE
