#include "dmwat/vision/teacher.hpp"

#include "dmwat/vision/vit.hpp"

namespace dmwat::vision {

ConvTeacher::ConvTeacher(std::size_t image_size, std::uint64_t seed, std::size_t channels1,
                         std::size_t channels2)
    : image_size_(image_size) {
  if (image_size % 8 != 0) throw std::invalid_argument("teacher image size must be divisible by 8");
  Rng rng(seed);
  conv1_ = Linear(4 * 4 * 3, channels1, rng);
  conv2_ = Linear(2 * 2 * channels1, channels2, rng);
  head_ = Linear(channels2, kNumClasses, rng);

  // conv1 output is a g1 x g1 grid of channels1-vectors, row-major.
  const std::size_t g1 = image_size / 4, g2 = g1 / 2;
  conv2_positions_ = g2 * g2;
  for (std::size_t pr = 0; pr < g2; ++pr)
    for (std::size_t pc = 0; pc < g2; ++pc)
      for (std::size_t r = 0; r < 2; ++r)
        for (std::size_t c = 0; c < 2; ++c)
          for (std::size_t ch = 0; ch < channels1; ++ch)
            conv2_index_.push_back(((pr * 2 + r) * g1 + (pc * 2 + c)) * channels1 + ch);
}

Tensor ConvTeacher::logits(const ImageSample& img) const {
  if (img.height != image_size_ || img.width != image_size_) {
    throw ShapeError("teacher input has wrong dimensions");
  }
  const Tensor a1 = relu(conv1_(extract_patches(img, 4)));
  const Tensor patches2 =
      gather(a1, conv2_index_, Shape{conv2_positions_, conv2_.in_features()});
  const Tensor a2 = relu(conv2_(patches2));
  return head_(mean_rows(a2));
}

std::array<double, kNumClasses> ConvTeacher::logits_values(const ImageSample& img) const {
  NoGradGuard ng;
  const Tensor z = logits(img);
  return {z[0], z[1], z[2]};
}

ParameterSet ConvTeacher::parameters() const {
  ParameterSet ps;
  conv1_.register_into(ps, "conv1");
  conv2_.register_into(ps, "conv2");
  head_.register_into(ps, "head");
  return ps;
}

}  // namespace dmwat::vision
