#include "dmwat/vision/image.hpp"

#include <png.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <string>

namespace dmwat::vision {

void ImageSample::validate() const {
  if (height == 0 || width == 0) throw ImageError("image has zero size");
  if (pixels.size() != height * width * 3) throw ImageError("pixel buffer size mismatch");
  for (double v : pixels) {
    if (!(v >= 0.0 && v <= 1.0)) throw ImageError("pixel value outside [0,1]");
  }
}

void quantize_8bit(ImageSample& img) {
  for (auto& v : img.pixels) v = std::round(std::clamp(v, 0.0, 1.0) * 255.0) / 255.0;
}

namespace {

std::vector<unsigned char> to_bytes(const ImageSample& img) {
  img.validate();
  std::vector<unsigned char> out(img.pixels.size());
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = static_cast<unsigned char>(std::lround(img.pixels[i] * 255.0));
  }
  return out;
}

ImageSample from_bytes(std::size_t h, std::size_t w, const unsigned char* data) {
  ImageSample img(h, w);
  for (std::size_t i = 0; i < img.pixels.size(); ++i) img.pixels[i] = data[i] / 255.0;
  return img;
}

// Next whitespace-delimited header token, skipping '#' comments.
std::string ppm_token(std::istream& is) {
  std::string tok;
  int ch;
  while ((ch = is.get()) != EOF) {
    if (ch == '#') {
      while ((ch = is.get()) != EOF && ch != '\n') {
      }
      continue;
    }
    if (std::isspace(ch)) {
      if (!tok.empty()) break;
      continue;
    }
    tok.push_back(static_cast<char>(ch));
  }
  return tok;
}

}  // namespace

ImageSample read_ppm(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw ImageError("cannot open image: " + path.string());
  if (ppm_token(is) != "P6") throw ImageError("not a binary PPM (P6): " + path.string());
  std::size_t w = 0, h = 0, maxval = 0;
  try {
    w = std::stoul(ppm_token(is));
    h = std::stoul(ppm_token(is));
    maxval = std::stoul(ppm_token(is));
  } catch (const std::exception&) {
    throw ImageError("malformed PPM header: " + path.string());
  }
  if (maxval != 255) throw ImageError("only 8-bit PPM is supported: " + path.string());
  if (w == 0 || h == 0) throw ImageError("empty PPM: " + path.string());
  std::vector<unsigned char> buf(w * h * 3);
  if (!is.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(buf.size()))) {
    throw ImageError("truncated PPM data: " + path.string());
  }
  return from_bytes(h, w, buf.data());
}

void write_ppm(const std::filesystem::path& path, const ImageSample& img) {
  const auto bytes = to_bytes(img);
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw ImageError("cannot write image: " + path.string());
  os << "P6\n" << img.width << ' ' << img.height << "\n255\n";
  os.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!os) throw ImageError("write failed: " + path.string());
}

ImageSample read_png(const std::filesystem::path& path) {
  png_image image{};
  image.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_file(&image, path.c_str())) {
    throw ImageError("cannot read PNG " + path.string() + ": " + image.message);
  }
  image.format = PNG_FORMAT_RGB;
  std::vector<unsigned char> buf(PNG_IMAGE_SIZE(image));
  if (!png_image_finish_read(&image, nullptr, buf.data(), 0, nullptr)) {
    png_image_free(&image);
    throw ImageError("cannot decode PNG " + path.string() + ": " + image.message);
  }
  return from_bytes(image.height, image.width, buf.data());
}

void write_png(const std::filesystem::path& path, const ImageSample& img) {
  const auto bytes = to_bytes(img);
  png_image image{};
  image.version = PNG_IMAGE_VERSION;
  image.width = static_cast<png_uint_32>(img.width);
  image.height = static_cast<png_uint_32>(img.height);
  image.format = PNG_FORMAT_RGB;
  if (!png_image_write_to_file(&image, path.c_str(), 0, bytes.data(), 0, nullptr)) {
    throw ImageError("cannot write PNG " + path.string() + ": " + image.message);
  }
}

ImageSample read_image(const std::filesystem::path& path) {
  const auto ext = path.extension().string();
  if (ext == ".png" || ext == ".PNG") return read_png(path);
  return read_ppm(path);
}

void write_image(const std::filesystem::path& path, const ImageSample& img) {
  const auto ext = path.extension().string();
  if (ext == ".png" || ext == ".PNG") {
    write_png(path, img);
  } else {
    write_ppm(path, img);
  }
}

ImageSample mean_image(const std::vector<const ImageSample*>& images) {
  if (images.empty()) throw ImageError("mean_image of empty set");
  double sum[3] = {0, 0, 0};
  std::size_t count = 0;
  for (const auto* img : images) {
    for (std::size_t i = 0; i < img->pixels.size(); ++i) sum[i % 3] += img->pixels[i];
    count += img->area();
  }
  ImageSample out(images[0]->height, images[0]->width);
  for (std::size_t i = 0; i < out.pixels.size(); ++i) {
    out.pixels[i] = sum[i % 3] / static_cast<double>(count);
  }
  return out;
}

}  // namespace dmwat::vision
