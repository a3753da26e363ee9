#include "dmwat/vision/augment.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace dmwat::vision {

namespace {

void require_range(bool ok, const std::string& what) {
  if (!ok) throw std::invalid_argument("augmentation parameter out of range: " + what);
}

// Bilinear sample with zero outside the image.
double sample_zero(const ImageSample& img, double y, double x, std::size_t ch) {
  const double fy = std::floor(y), fx = std::floor(x);
  const long y0 = static_cast<long>(fy), x0 = static_cast<long>(fx);
  const double dy = y - fy, dx = x - fx;
  auto px = [&](long r, long c) -> double {
    if (r < 0 || c < 0 || r >= static_cast<long>(img.height) || c >= static_cast<long>(img.width)) {
      return 0.0;
    }
    return img.at(static_cast<std::size_t>(r), static_cast<std::size_t>(c), ch);
  };
  return (1 - dy) * ((1 - dx) * px(y0, x0) + dx * px(y0, x0 + 1)) +
         dy * ((1 - dx) * px(y0 + 1, x0) + dx * px(y0 + 1, x0 + 1));
}

// Bilinear sample with edge clamping.
double sample_clamp(const ImageSample& img, double y, double x, std::size_t ch) {
  y = std::clamp(y, 0.0, static_cast<double>(img.height - 1));
  x = std::clamp(x, 0.0, static_cast<double>(img.width - 1));
  const std::size_t y0 = static_cast<std::size_t>(std::floor(y));
  const std::size_t x0 = static_cast<std::size_t>(std::floor(x));
  const std::size_t y1 = std::min(y0 + 1, img.height - 1);
  const std::size_t x1 = std::min(x0 + 1, img.width - 1);
  const double dy = y - static_cast<double>(y0), dx = x - static_cast<double>(x0);
  return (1 - dy) * ((1 - dx) * img.at(y0, x0, ch) + dx * img.at(y0, x1, ch)) +
         dy * ((1 - dx) * img.at(y1, x0, ch) + dx * img.at(y1, x1, ch));
}

void clamp_unit(ImageSample& img) {
  for (auto& v : img.pixels) v = std::clamp(v, 0.0, 1.0);
}

}  // namespace

std::string to_string(AugmentKind k) {
  switch (k) {
    case AugmentKind::rotate: return "rotate";
    case AugmentKind::flip_h: return "flip_h";
    case AugmentKind::flip_v: return "flip_v";
    case AugmentKind::crop_resize: return "crop_resize";
    case AugmentKind::brightness: return "brightness";
    case AugmentKind::random_erase: return "random_erase";
  }
  return "unknown";
}

AugmentKind augment_kind_from_string(const std::string& s) {
  for (auto k : {AugmentKind::rotate, AugmentKind::flip_h, AugmentKind::flip_v,
                 AugmentKind::crop_resize, AugmentKind::brightness, AugmentKind::random_erase}) {
    if (to_string(k) == s) return k;
  }
  throw std::invalid_argument("unknown augmentation kind: " + s);
}

ImageSample rotate_quarter(const ImageSample& img, int quarter_turns) {
  const int q = ((quarter_turns % 4) + 4) % 4;
  if (q % 2 == 1 && img.height != img.width) {
    throw std::invalid_argument("quarter-turn rotation needs a square image");
  }
  ImageSample out = img;
  const std::size_t h = img.height, w = img.width;
  for (std::size_t r = 0; r < h; ++r) {
    for (std::size_t c = 0; c < w; ++c) {
      std::size_t nr = r, nc = c;
      switch (q) {
        case 1: nr = c; nc = h - 1 - r; break;
        case 2: nr = h - 1 - r; nc = w - 1 - c; break;
        case 3: nr = w - 1 - c; nc = r; break;
        default: break;
      }
      for (std::size_t ch = 0; ch < 3; ++ch) out.at(nr, nc, ch) = img.at(r, c, ch);
    }
  }
  return out;
}

ImageSample rotate_small(const ImageSample& img, double degrees, const AugmentRanges& ranges) {
  require_range(std::abs(degrees) <= ranges.max_small_angle_deg, "small rotation angle");
  const double th = degrees * std::numbers::pi / 180.0;
  const double cs = std::cos(th), sn = std::sin(th);
  const double cy = (static_cast<double>(img.height) - 1.0) / 2.0;
  const double cx = (static_cast<double>(img.width) - 1.0) / 2.0;
  ImageSample out(img.height, img.width);
  for (std::size_t r = 0; r < img.height; ++r) {
    for (std::size_t c = 0; c < img.width; ++c) {
      const double y = static_cast<double>(r) - cy, x = static_cast<double>(c) - cx;
      // Inverse map: rotate the output coordinate back by -theta.
      const double sy = cs * y - sn * x + cy;
      const double sx = sn * y + cs * x + cx;
      for (std::size_t ch = 0; ch < 3; ++ch) out.at(r, c, ch) = sample_zero(img, sy, sx, ch);
    }
  }
  clamp_unit(out);
  return out;
}

ImageSample flip_horizontal(const ImageSample& img) {
  ImageSample out = img;
  for (std::size_t r = 0; r < img.height; ++r)
    for (std::size_t c = 0; c < img.width; ++c)
      for (std::size_t ch = 0; ch < 3; ++ch) out.at(r, img.width - 1 - c, ch) = img.at(r, c, ch);
  return out;
}

ImageSample flip_vertical(const ImageSample& img) {
  ImageSample out = img;
  for (std::size_t r = 0; r < img.height; ++r)
    for (std::size_t c = 0; c < img.width; ++c)
      for (std::size_t ch = 0; ch < 3; ++ch) out.at(img.height - 1 - r, c, ch) = img.at(r, c, ch);
  return out;
}

ImageSample crop_resize(const ImageSample& img, const Rect& box, const AugmentRanges& ranges) {
  require_range(box.height > 0 && box.width > 0 && box.row + box.height <= img.height &&
                    box.col + box.width <= img.width,
                "crop box outside image");
  require_range(static_cast<double>(box.area()) >=
                    ranges.min_crop_area * static_cast<double>(img.area()) - 1e-9,
                "crop keeps less than the minimum area");
  ImageSample out(img.height, img.width);
  const double sy = static_cast<double>(box.height) / static_cast<double>(img.height);
  const double sx = static_cast<double>(box.width) / static_cast<double>(img.width);
  for (std::size_t r = 0; r < img.height; ++r) {
    for (std::size_t c = 0; c < img.width; ++c) {
      const double y = static_cast<double>(box.row) + (static_cast<double>(r) + 0.5) * sy - 0.5;
      const double x = static_cast<double>(box.col) + (static_cast<double>(c) + 0.5) * sx - 0.5;
      for (std::size_t ch = 0; ch < 3; ++ch) out.at(r, c, ch) = sample_clamp(img, y, x, ch);
    }
  }
  clamp_unit(out);
  return out;
}

ImageSample adjust_brightness(const ImageSample& img, double factor, const AugmentRanges& ranges) {
  require_range(factor >= ranges.min_brightness && factor <= ranges.max_brightness,
                "brightness factor");
  ImageSample out = img;
  for (auto& v : out.pixels) v = std::clamp(v * factor, 0.0, 1.0);
  return out;
}

Rect erase_rect_for_area(std::size_t height, std::size_t width, double target_area,
                         double aspect) {
  Rect best;
  double best_err = INFINITY, best_aspect_err = INFINITY;
  for (std::size_t h = 1; h <= height; ++h) {
    const double ideal_w = target_area / static_cast<double>(h);
    for (double wc : {std::floor(ideal_w), std::ceil(ideal_w)}) {
      if (wc < 1.0 || wc > static_cast<double>(width)) continue;
      const auto w = static_cast<std::size_t>(wc);
      const double err = std::abs(static_cast<double>(h * w) - target_area);
      const double aerr =
          std::abs(std::log((static_cast<double>(h) / static_cast<double>(w)) / aspect));
      if (err < best_err - 1e-12 || (std::abs(err - best_err) <= 1e-12 && aerr < best_aspect_err)) {
        best = {0, 0, h, w};
        best_err = err;
        best_aspect_err = aerr;
      }
    }
  }
  return best;
}

EraseResult random_erase(const ImageSample& img, double area_fraction, Rng& rng,
                         const AugmentRanges& ranges) {
  require_range(area_fraction >= ranges.min_erase_area - 1e-12 &&
                    area_fraction <= ranges.max_erase_area + 1e-12,
                "erase area fraction");
  const double aspect = std::exp(rng.uniform(std::log(0.3), std::log(1.0 / 0.3)));
  Rect box = erase_rect_for_area(img.height, img.width,
                                 area_fraction * static_cast<double>(img.area()), aspect);
  box.row = rng.below(img.height - box.height + 1);
  box.col = rng.below(img.width - box.width + 1);
  EraseResult res{img, box};
  for (std::size_t r = box.row; r < box.row + box.height; ++r)
    for (std::size_t c = box.col; c < box.col + box.width; ++c)
      for (std::size_t ch = 0; ch < 3; ++ch) res.image.at(r, c, ch) = rng.uniform();
  return res;
}

ImageSample augment_image(const ImageSample& img, AugmentKind kind, std::uint64_t seed,
                          const AugmentRanges& ranges) {
  img.validate();
  Rng rng(seed);
  switch (kind) {
    case AugmentKind::rotate: {
      const auto pick = rng.below(4);
      if (pick < 3) return rotate_quarter(img, static_cast<int>(pick) + 1);
      return rotate_small(img, rng.uniform(-ranges.max_small_angle_deg, ranges.max_small_angle_deg),
                          ranges);
    }
    case AugmentKind::flip_h: return flip_horizontal(img);
    case AugmentKind::flip_v: return flip_vertical(img);
    case AugmentKind::crop_resize: {
      const double keep = rng.uniform(ranges.min_crop_area, 1.0);
      const double side = std::sqrt(keep);
      auto h = static_cast<std::size_t>(std::ceil(side * static_cast<double>(img.height)));
      auto w = static_cast<std::size_t>(std::ceil(side * static_cast<double>(img.width)));
      h = std::min(h, img.height);
      w = std::min(w, img.width);
      Rect box{rng.below(img.height - h + 1), rng.below(img.width - w + 1), h, w};
      return crop_resize(img, box, ranges);
    }
    case AugmentKind::brightness:
      return adjust_brightness(img, rng.uniform(ranges.min_brightness, ranges.max_brightness),
                               ranges);
    case AugmentKind::random_erase:
      return random_erase(img, rng.uniform(ranges.min_erase_area, ranges.max_erase_area), rng,
                          ranges)
          .image;
  }
  throw std::invalid_argument("unknown augmentation kind");
}

ImageSample label_preserving_view(const ImageSample& img, Rng& rng, const AugmentRanges& ranges) {
  ImageSample out = img;
  if (rng.bernoulli(0.5)) out = flip_horizontal(out);
  if (rng.bernoulli(0.5)) out = flip_vertical(out);
  if (rng.bernoulli(0.5)) {
    const double lim = std::min(8.0, ranges.max_small_angle_deg);
    out = rotate_small(out, rng.uniform(-lim, lim), ranges);
  }
  if (rng.bernoulli(0.5)) {
    out = adjust_brightness(out, rng.uniform(std::max(0.9, ranges.min_brightness),
                                             std::min(1.1, ranges.max_brightness)),
                            ranges);
  }
  return out;
}

namespace {
void require_same_dims(const ImageSample& a, const ImageSample& b) {
  if (a.height != b.height || a.width != b.width) {
    throw std::invalid_argument("mixing images of different dimensions");
  }
}
}  // namespace

MixedSample mixup(const ImageSample& a, ReferralDecision la, const ImageSample& b,
                  ReferralDecision lb, double lambda) {
  require_same_dims(a, b);
  require_range(lambda >= 0.0 && lambda <= 1.0, "mixup lambda");
  const double mu = 1.0 - lambda;
  MixedSample out{ImageSample(a.height, a.width), {}, mu, std::nullopt};
  for (std::size_t i = 0; i < a.pixels.size(); ++i) {
    out.image.pixels[i] = std::clamp(lambda * a.pixels[i] + mu * b.pixels[i], 0.0, 1.0);
  }
  out.label[class_index(la)] += lambda;
  out.label[class_index(lb)] += mu;
  return out;
}

MixedSample mixup(const ImageSample& a, ReferralDecision la, const ImageSample& b,
                  ReferralDecision lb, Rng& rng) {
  return mixup(a, la, b, lb, rng.beta(0.8, 0.8));
}

MixedSample cutmix_box(const ImageSample& a, ReferralDecision la, const ImageSample& b,
                       ReferralDecision lb, const Rect& box) {
  require_same_dims(a, b);
  require_range(box.row + box.height <= a.height && box.col + box.width <= a.width,
                "cutmix box outside image");
  MixedSample out{a, {}, 0.0, box};
  for (std::size_t r = box.row; r < box.row + box.height; ++r)
    for (std::size_t c = box.col; c < box.col + box.width; ++c)
      for (std::size_t ch = 0; ch < 3; ++ch) out.image.at(r, c, ch) = b.at(r, c, ch);
  const double w = static_cast<double>(box.area()) / static_cast<double>(a.area());
  out.b_weight = w;
  out.label[class_index(la)] += 1.0 - w;
  out.label[class_index(lb)] += w;
  return out;
}

MixedSample cutmix(const ImageSample& a, ReferralDecision la, const ImageSample& b,
                   ReferralDecision lb, std::uint64_t seed) {
  require_same_dims(a, b);
  Rng rng(seed);
  const double lambda = rng.uniform();
  const double side = std::sqrt(1.0 - lambda);
  const auto h = static_cast<std::size_t>(std::lround(side * static_cast<double>(a.height)));
  const auto w = static_cast<std::size_t>(std::lround(side * static_cast<double>(a.width)));
  Rect box{rng.below(a.height - h + 1), rng.below(a.width - w + 1), h, w};
  return cutmix_box(a, la, b, lb, box);
}

}  // namespace dmwat::vision
