#pragma once

#include <cstddef>
#include <filesystem>
#include <stdexcept>
#include <vector>

namespace dmwat::vision {

class ImageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// H x W x 3 image, row-major, interleaved channels, values in [0, 1].
struct ImageSample {
  std::size_t height = 0;
  std::size_t width = 0;
  std::vector<double> pixels;

  ImageSample() = default;
  ImageSample(std::size_t h, std::size_t w, double fill = 0.0)
      : height(h), width(w), pixels(h * w * 3, fill) {}

  double& at(std::size_t r, std::size_t c, std::size_t ch) { return pixels[(r * width + c) * 3 + ch]; }
  double at(std::size_t r, std::size_t c, std::size_t ch) const {
    return pixels[(r * width + c) * 3 + ch];
  }
  std::size_t area() const { return height * width; }

  /// Throws ImageError if the buffer size is wrong or a value leaves [0, 1].
  void validate() const;
  bool operator==(const ImageSample&) const = default;
};

/// Rounds every value to the nearest k/255, matching an 8-bit round trip.
void quantize_8bit(ImageSample& img);

ImageSample read_ppm(const std::filesystem::path& path);
void write_ppm(const std::filesystem::path& path, const ImageSample& img);
ImageSample read_png(const std::filesystem::path& path);
void write_png(const std::filesystem::path& path, const ImageSample& img);
/// Dispatches on extension (.ppm or .png).
ImageSample read_image(const std::filesystem::path& path);
void write_image(const std::filesystem::path& path, const ImageSample& img);

/// Per-channel mean over a set of images, as a constant image.
ImageSample mean_image(const std::vector<const ImageSample*>& images);

}  // namespace dmwat::vision
