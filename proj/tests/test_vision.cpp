#include <doctest.h>

#include <cmath>
#include <filesystem>

#include "dmwat/core/ops.hpp"
#include "dmwat/core/rng.hpp"
#include "dmwat/vision/augment.hpp"
#include "dmwat/vision/distill.hpp"
#include "dmwat/vision/image.hpp"
#include "dmwat/vision/teacher.hpp"
#include "dmwat/vision/train.hpp"
#include "dmwat/vision/vit.hpp"
#include "support/oracle.hpp"

using namespace dmwat;
using namespace dmwat::vision;

namespace {

ImageSample random_image(std::size_t h, std::size_t w, Rng& rng) {
  ImageSample img(h, w);
  for (auto& p : img.pixels) p = rng.uniform();
  return img;
}

std::size_t differing_pixels(const ImageSample& a, const ImageSample& b) {
  std::size_t n = 0;
  for (std::size_t i = 0; i < a.area(); ++i) {
    bool diff = false;
    for (std::size_t ch = 0; ch < 3; ++ch) diff |= a.pixels[i * 3 + ch] != b.pixels[i * 3 + ch];
    n += diff;
  }
  return n;
}

}  // namespace

TEST_SUITE("vision") {

TEST_CASE("vit forward on a random image") {
  Rng rng(1);
  VisionTransformer vit(VitConfig{}, 5);
  const auto img = random_image(32, 32, rng);
  const auto out = vit.encode(img);
  double norm = 0.0;
  for (double v : out.class_embedding.values()) norm += v * v;
  CHECK(std::isfinite(norm));
  CHECK(norm > 0.0);
  CHECK(vit.patch_embed(img).dim(0) == 18);
  const auto p = vit.probabilities(img);
  CHECK(p[0] + p[1] + p[2] == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(vit.embedding(img).size() == 64);
}

TEST_CASE("vit rejects bad geometry") {
  VitConfig cfg;
  cfg.patch_size = 7;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  VisionTransformer vit(VitConfig{}, 5);
  CHECK_THROWS(vit.encode(ImageSample(16, 16)));
}

TEST_CASE("distillation loss endpoints") {
  Rng rng(2);
  VitConfig cfg;
  const Tensor s = Tensor::vector({0.3, -1.2, 0.8});
  const Tensor t = Tensor::vector({1.0, 0.1, -0.4});
  cfg.distillation_alpha = 1.0;
  auto l1 = distillation_loss(s, t, ReferralDecision::change_urgent, cfg);
  CHECK(l1.parts.total == l1.parts.ce);
  cfg.distillation_alpha = 0.0;
  auto l0 = distillation_loss(s, t, ReferralDecision::change_urgent, cfg);
  CHECK(l0.parts.total == l0.parts.kd);
  cfg.distillation_mode = DistillMode::soft;
  auto ls = distillation_loss(s, s, ReferralDecision::change_urgent, cfg);
  CHECK(std::abs(ls.parts.kd) < 1e-12);
}

TEST_CASE("flips are involutions and quarter turns compose") {
  Rng rng(3);
  for (int i = 0; i < 20; ++i) {
    const auto img = random_image(8, 8, rng);
    CHECK(flip_horizontal(flip_horizontal(img)) == img);
    CHECK(flip_vertical(flip_vertical(img)) == img);
    CHECK(rotate_quarter(img, 4) == img);
    CHECK(rotate_quarter(rotate_quarter(img, 1), 3) == img);
    CHECK(rotate_quarter(img, 2) == flip_horizontal(flip_vertical(img)));
  }
  ImageSample tall(4, 6);
  CHECK_THROWS(rotate_quarter(tall, 1));
}

TEST_CASE("random erase at 10% touches 102 or 103 pixels") {
  const auto& band = dmwat::testing::oracle()["random_erase_10pct_area_32"];
  Rng rng(4);
  ImageSample img(32, 32, 0.5);
  for (int i = 0; i < 50; ++i) {
    const auto r = random_erase(img, 0.1, rng);
    const auto area = r.box.area();
    CHECK(area >= band[0].get<std::size_t>());
    CHECK(area <= band[1].get<std::size_t>());
    CHECK(differing_pixels(img, r.image) <= area);
  }
}

TEST_CASE("mixup and cutmix labels") {
  Rng rng(5);
  const auto a = random_image(32, 32, rng);
  const auto b = random_image(32, 32, rng);
  const auto m = mixup(a, ReferralDecision::continue_treatment, b, ReferralDecision::change_urgent, 0.25);
  CHECK(m.label[0] == 0.25);
  CHECK(m.label[2] == 0.75);
  CHECK(m.image.pixels[10] == doctest::Approx(0.25 * a.pixels[10] + 0.75 * b.pixels[10]));
}

TEST_CASE("cutmix weight equals pasted area") {
  Rng rng(6);
  const auto a = random_image(32, 32, rng);
  const auto b = random_image(32, 32, rng);
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const auto m = cutmix(a, ReferralDecision::continue_treatment, b, ReferralDecision::change_non_urgent, seed);
    CHECK(m.label[0] + m.label[1] + m.label[2] == 1.0);
    CHECK(m.b_weight == static_cast<double>(differing_pixels(a, m.image)) / 1024.0);
  }
}

TEST_CASE("image io round trip") {
  const auto dir = std::filesystem::temp_directory_path() / "dmwat_test_img";
  std::filesystem::create_directories(dir);
  Rng rng(7);
  auto img = random_image(9, 11, rng);
  quantize_8bit(img);
  write_image(dir / "a.ppm", img);
  write_image(dir / "a.png", img);
  CHECK(read_image(dir / "a.ppm") == img);
  CHECK(read_image(dir / "a.png") == img);
  CHECK_THROWS_AS(read_image(dir / "missing.ppm"), ImageError);
  std::filesystem::remove_all(dir);
}

TEST_CASE("teacher and student training reduce their losses") {
  Rng rng(8);
  std::vector<ImageSample> imgs;
  std::vector<LabeledImage> data;
  for (int i = 0; i < 24; ++i) {
    ImageSample img(32, 32, 0.2);
    const int cls = i % 3;
    for (std::size_t p = 0; p < img.area(); ++p) img.pixels[p * 3 + cls] = 0.8 + 0.1 * rng.uniform();
    imgs.push_back(img);
  }
  for (int i = 0; i < 24; ++i) data.push_back({&imgs[i], decision_from_index(i % 3)});
  ConvTeacher teacher(32, 1);
  VisionTrainConfig cfg;
  cfg.epochs = 6;
  cfg.batch_size = 8;
  const auto th = train_teacher(teacher, data, cfg);
  CHECK(th.epoch_loss.back() < th.epoch_loss.front());
  VisionTransformer vit(VitConfig{}, 2);
  const double before = evaluate_vit_loss(vit, teacher, data);
  const auto vh = train_vit(vit, teacher, data, cfg);
  CHECK(vit.trained());
  CHECK(evaluate_vit_loss(vit, teacher, data) < before);
  CHECK(vh.epoch_loss.size() == 6);
}

}  // TEST_SUITE
