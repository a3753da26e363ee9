#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "dmwat/core/ops.hpp"
#include "dmwat/core/rng.hpp"
#include "dmwat/interpret/export.hpp"
#include "dmwat/interpret/integrated_gradients.hpp"
#include "dmwat/interpret/score_cam.hpp"

using namespace dmwat;
using namespace dmwat::interpret;

namespace {

Tensor random_matrix(std::size_t r, std::size_t c, Rng& rng) {
  std::vector<double> v(r * c);
  for (auto& x : v) x = rng.normal();
  return Tensor({r, c}, std::move(v));
}

// Softmax over (mean red, mean green, mean blue) scaled up, so the scorer
// prefers whichever channel dominates the bright region.
std::array<double, 3> channel_scorer(const vision::ImageSample& img) {
  std::array<double, 3> m{};
  for (std::size_t p = 0; p < img.area(); ++p)
    for (std::size_t c = 0; c < 3; ++c) m[c] += img.pixels[p * 3 + c];
  for (auto& v : m) v = 20.0 * v / static_cast<double>(img.area());
  const auto s = softmax_values(std::vector<double>(m.begin(), m.end()));
  return {s[0], s[1], s[2]};
}

// Gray 16x16 image with a red square in the top-left quadrant.
vision::ImageSample red_corner() {
  vision::ImageSample img(16, 16, 0.3);
  for (std::size_t r = 0; r < 8; ++r)
    for (std::size_t c = 0; c < 8; ++c) {
      img.pixels[(r * 16 + c) * 3 + 0] = 1.0;
      img.pixels[(r * 16 + c) * 3 + 1] = 0.0;
      img.pixels[(r * 16 + c) * 3 + 2] = 0.0;
    }
  return img;
}

ActivationMapSet quadrant_maps() {
  ActivationMapSet s;
  s.grid = 2;
  for (std::size_t q = 0; q < 4; ++q) {
    std::vector<double> m(4, 0.0);
    m[q] = 1.0;
    s.maps.push_back(m);
  }
  return s;
}

}  // namespace

TEST_SUITE("interpret") {

TEST_CASE("attribution is exactly zero when input equals baseline") {
  Rng rng(1);
  const auto x = random_matrix(5, 4, rng);
  const auto w = random_matrix(4, 1, rng);
  const ScalarModel f = [&](const Tensor& t) { return sum(gelu(matmul(t, w))); };
  const auto r = integrated_gradients(x, x, f, 64);
  for (double s : r.row_scores) CHECK(s == 0.0);
  CHECK(r.total == 0.0);
}

TEST_CASE("linear model attribution has the closed form") {
  Rng rng(2);
  const auto x = random_matrix(6, 3, rng);
  const auto xb = random_matrix(6, 3, rng);
  const auto w = random_matrix(6, 3, rng);
  const ScalarModel f = [&](const Tensor& t) { return add_scalar(sum(mul(t, w)), 0.7); };
  const auto r = integrated_gradients(x, xb, f, 7);
  for (std::size_t i = 0; i < 6; ++i) {
    double want = 0.0;
    for (std::size_t j = 0; j < 3; ++j) want += (x.at(i, j) - xb.at(i, j)) * w.at(i, j);
    CHECK(std::abs(r.row_scores[i] - want) <= 1e-9);
  }
  CHECK(r.completeness_gap <= 1e-9);
}

TEST_CASE("completeness gap shrinks with more steps") {
  Rng rng(3);
  const auto x = random_matrix(4, 4, rng);
  const Tensor xb({4, 4});
  const auto w = random_matrix(4, 2, rng);
  const ScalarModel f = [&](const Tensor& t) { return sum(mul(relu(matmul(t, w)), matmul(t, w))); };
  const auto coarse = integrated_gradients(x, xb, f, 8);
  const auto fine = integrated_gradients(x, xb, f, 512);
  CHECK(fine.completeness_gap < coarse.completeness_gap);
  CHECK(fine.completeness_gap < 0.01 * std::abs(fine.f_input - fine.f_baseline) + 1e-9);
  CHECK_THROWS(integrated_gradients(x, xb, f, 0));
  CHECK_THROWS(integrated_gradients(x, Tensor({3, 4}), f, 4));
}

TEST_CASE("token attribution needs a trained encoder and zeroes PAD") {
  const auto v = text::Vocabulary::build({"deep wound with slough", "clean wound"});
  text::TextEncoderConfig cfg;
  cfg.embed_dim = 16;
  cfg.num_layers = 1;
  cfg.num_heads = 2;
  text::TextEncoder enc(cfg, v.size(), 4);
  const auto fresh = text::tokenize("clean wound", v, 12);
  CHECK_THROWS_AS(integrated_gradients(fresh, enc, 2, 8, &v), std::logic_error);
  enc.set_trained(true);
  const auto note = text::tokenize("deep wound with slough", v, 12);
  const auto rep = integrated_gradients(note, enc, 2, 64, &v);
  REQUIRE(rep.tokens.size() == rep.scores.size());
  CHECK(rep.tokens[1] == "deep");
  for (std::size_t i = note.content_length(); i < rep.scores.size(); ++i) CHECK(rep.scores[i] == 0.0);
  double total = 0.0;
  for (double s : rep.scores) total += s;
  CHECK(std::abs(total - (rep.f_input - rep.f_baseline)) == doctest::Approx(rep.completeness_gap));
}

TEST_CASE("bilinear upsampling") {
  const std::vector<double> flat(9, 0.25);
  for (double v : upsample_bilinear(flat, 3, 12, 12)) CHECK(v == doctest::Approx(0.25));
  const std::vector<double> ramp{0.0, 1.0, 0.0, 1.0};
  const auto up = upsample_bilinear(ramp, 2, 4, 4);
  CHECK(up[0] == 0.0);
  CHECK(up[3] == 1.0);
  CHECK(up[1] == doctest::Approx(0.25));
  CHECK(up[2] == doctest::Approx(0.75));
}

TEST_CASE("score-cam is non-negative, peaks at one and finds the red square") {
  const auto img = red_corner();
  const auto baseline = mean_color_image(img);
  const auto map = score_cam(img, quadrant_maps(), channel_scorer, 0, baseline);
  REQUIRE(map.values.size() == 256);
  for (double v : map.values) CHECK(v >= 0.0);
  CHECK(map.max() == doctest::Approx(1.0));
  CHECK(map.at(2, 2) > map.at(13, 13));
  CHECK(map.channel_weights.size() == 4);
  ScoreCamConfig two;
  two.channel_subset = 2;
  CHECK(score_cam(img, quadrant_maps(), channel_scorer, 0, baseline, two).channels.size() == 2);
}

TEST_CASE("score-cam with no positive weight is all zero") {
  const vision::ImageSample flat(16, 16, 0.4);
  const auto map = score_cam(flat, quadrant_maps(), channel_scorer, 1, mean_color_image(flat));
  for (double v : map.values) CHECK(v == 0.0);
}

TEST_CASE("deletion check") {
  const auto img = red_corner();
  const auto baseline = mean_color_image(img);
  const auto map = score_cam(img, quadrant_maps(), channel_scorer, 0, baseline);
  const auto r = deletion_check(img, map, channel_scorer, 0, 0.2, baseline, 5);
  CHECK(r.pixels == 51);
  CHECK(r.top_drop > r.random_drop);
  const auto tiny = deletion_check(img, map, channel_scorer, 0, 1e-3, baseline, 5);
  CHECK(tiny.pixels == 0);
  CHECK(tiny.top_drop == 0.0);
  CHECK(tiny.random_drop == 0.0);
  CHECK_THROWS(deletion_check(img, map, channel_scorer, 0, 0.0, baseline, 5));
  CHECK_THROWS(deletion_check(img, map, channel_scorer, 0, 1.0, baseline, 5));
}

TEST_CASE("exports") {
  const auto dir = std::filesystem::temp_directory_path() / "dmwat_test_export";
  std::filesystem::create_directories(dir);
  const auto img = red_corner();
  const auto map = score_cam(img, quadrant_maps(), channel_scorer, 0, mean_color_image(img));
  write_saliency_ppm(dir / "s.ppm", map);
  write_saliency_overlay_png(dir / "o.png", img, map);
  const auto back = vision::read_image(dir / "s.ppm");
  CHECK(back.height == 16);
  CHECK(back.pixels[0] == doctest::Approx(map.values[0]).epsilon(1.0 / 255));
  CHECK(std::filesystem::file_size(dir / "o.png") > 0);

  AttributionReport rep;
  rep.tokens = {"[CLS]", "deep", "<b>", "[PAD]"};
  rep.scores = {0.1, 0.5, -0.3, 0.0};
  const auto html = attribution_html(rep, "note");
  CHECK(html.find("&lt;b&gt;") != std::string::npos);
  CHECK(html.find("<b>") == std::string::npos);
  const auto j = to_json(rep);
  CHECK(j["tokens"].size() == 4);
  CHECK(j["tokens"][2]["score"] == -0.3);
  std::filesystem::remove_all(dir);
}

}  // TEST_SUITE
