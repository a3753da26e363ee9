#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "dmwat/core/rng.hpp"
#include "dmwat/types.hpp"
#include "dmwat/vision/image.hpp"

namespace dmwat::vision {

enum class AugmentKind { rotate, flip_h, flip_v, crop_resize, brightness, random_erase };

std::string to_string(AugmentKind k);
AugmentKind augment_kind_from_string(const std::string& s);

/// Axis-aligned pixel rectangle [row, row+height) x [col, col+width).
struct Rect {
  std::size_t row = 0, col = 0, height = 0, width = 0;
  std::size_t area() const { return height * width; }
  bool contains(std::size_t r, std::size_t c) const {
    return r >= row && r < row + height && c >= col && c < col + width;
  }
  bool operator==(const Rect&) const = default;
};

struct AugmentRanges {
  double max_small_angle_deg = 15.0;
  double min_crop_area = 0.6;
  double min_brightness = 0.7;
  double max_brightness = 1.3;
  double min_erase_area = 0.02;
  double max_erase_area = 0.2;
};

// Deterministic primitives.
/// Clockwise quarter turns; (r, c) -> (c, H-1-r) for one turn. Square only
/// for odd turn counts.
ImageSample rotate_quarter(const ImageSample& img, int quarter_turns);
/// Rotation about the centre by `degrees` (|degrees| <= 15) with bilinear
/// resampling; uncovered pixels are zero.
ImageSample rotate_small(const ImageSample& img, double degrees,
                         const AugmentRanges& ranges = {});
ImageSample flip_horizontal(const ImageSample& img);
ImageSample flip_vertical(const ImageSample& img);
/// Crops `box` (area >= min_crop_area of the image) and resamples back to H x W.
ImageSample crop_resize(const ImageSample& img, const Rect& box, const AugmentRanges& ranges = {});
ImageSample adjust_brightness(const ImageSample& img, double factor,
                              const AugmentRanges& ranges = {});

/// Integer rectangle whose area is closest to `target_area` (ties resolved
/// toward `aspect` = height/width), fitting inside the image.
Rect erase_rect_for_area(std::size_t height, std::size_t width, double target_area, double aspect);

struct EraseResult {
  ImageSample image;
  Rect box;
};
/// Fills a rectangle covering `area_fraction` of the image with per-pixel
/// uniform noise.
EraseResult random_erase(const ImageSample& img, double area_fraction, Rng& rng,
                         const AugmentRanges& ranges = {});

/// Applies one augmentation with parameters drawn from `ranges` using a
/// generator seeded by `seed`.
ImageSample augment_image(const ImageSample& img, AugmentKind kind, std::uint64_t seed,
                          const AugmentRanges& ranges = {});

/// Augmentations that never change what the wound looks like clinically;
/// used for test-time voting.
ImageSample label_preserving_view(const ImageSample& img, Rng& rng,
                                  const AugmentRanges& ranges = {});

struct MixedSample {
  ImageSample image;
  SoftLabel label;
  double b_weight = 0.0;  // share of sample b in the label
  std::optional<Rect> box;
};

/// pixels = lambda * a + (1 - lambda) * b, label likewise.
MixedSample mixup(const ImageSample& a, ReferralDecision la, const ImageSample& b,
                  ReferralDecision lb, double lambda);
/// lambda ~ Beta(0.8, 0.8).
MixedSample mixup(const ImageSample& a, ReferralDecision la, const ImageSample& b,
                  ReferralDecision lb, Rng& rng);
/// Pastes `box` of b into a; b's label weight = box area / image area.
MixedSample cutmix_box(const ImageSample& a, ReferralDecision la, const ImageSample& b,
                       ReferralDecision lb, const Rect& box);
MixedSample cutmix(const ImageSample& a, ReferralDecision la, const ImageSample& b,
                   ReferralDecision lb, std::uint64_t seed);

}  // namespace dmwat::vision
