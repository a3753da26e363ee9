#include "dmwat/interpret/score_cam.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "dmwat/core/rng.hpp"

namespace dmwat::interpret {

using vision::ImageSample;

double SaliencyMap::max() const {
  return values.empty() ? 0.0 : *std::max_element(values.begin(), values.end());
}

ActivationMapSet activation_maps(const vision::VisionTransformer& model, const ImageSample& img,
                                 std::size_t layer) {
  const auto& cfg = model.config();
  if (layer >= cfg.num_layers) {
    throw std::out_of_range("layer " + std::to_string(layer) + " outside 0.." +
                            std::to_string(cfg.num_layers - 1));
  }
  NoGradGuard ng;
  const auto out = model.encode(img, true);
  const Tensor& states = out.block_patch_states[layer];  // [patches, D]
  ActivationMapSet set;
  set.layer = layer;
  set.grid = cfg.grid();
  const std::size_t p = states.dim(0), d = states.dim(1);
  set.maps.assign(d, std::vector<double>(p));
  const auto v = states.values();
  for (std::size_t i = 0; i < p; ++i)
    for (std::size_t k = 0; k < d; ++k) set.maps[k][i] = v[i * d + k];
  return set;
}

std::vector<double> upsample_bilinear(std::span<const double> grid_map, std::size_t grid,
                                      std::size_t height, std::size_t width) {
  if (grid == 0 || grid_map.size() != grid * grid) throw ShapeError("grid map size mismatch");
  std::vector<double> out(height * width);
  const double sy = static_cast<double>(grid) / static_cast<double>(height);
  const double sx = static_cast<double>(grid) / static_cast<double>(width);
  const double last = static_cast<double>(grid - 1);
  for (std::size_t r = 0; r < height; ++r) {
    const double fy = std::clamp((static_cast<double>(r) + 0.5) * sy - 0.5, 0.0, last);
    const auto y0 = static_cast<std::size_t>(fy);
    const std::size_t y1 = std::min(y0 + 1, grid - 1);
    const double ty = fy - static_cast<double>(y0);
    for (std::size_t c = 0; c < width; ++c) {
      const double fx = std::clamp((static_cast<double>(c) + 0.5) * sx - 0.5, 0.0, last);
      const auto x0 = static_cast<std::size_t>(fx);
      const std::size_t x1 = std::min(x0 + 1, grid - 1);
      const double tx = fx - static_cast<double>(x0);
      out[r * width + c] = (1 - ty) * ((1 - tx) * grid_map[y0 * grid + x0] + tx * grid_map[y0 * grid + x1]) +
                           ty * ((1 - tx) * grid_map[y1 * grid + x0] + tx * grid_map[y1 * grid + x1]);
    }
  }
  return out;
}

namespace {

std::vector<std::size_t> select_channels(const ActivationMapSet& maps, std::size_t subset) {
  std::vector<double> var(maps.maps.size());
  for (std::size_t k = 0; k < maps.maps.size(); ++k) {
    const auto& m = maps.maps[k];
    const double mean = std::accumulate(m.begin(), m.end(), 0.0) / static_cast<double>(m.size());
    double s = 0.0;
    for (double x : m) s += (x - mean) * (x - mean);
    var[k] = s / static_cast<double>(m.size());
  }
  std::vector<std::size_t> idx(maps.maps.size());
  std::iota(idx.begin(), idx.end(), 0);
  if (subset == 0 || subset >= idx.size()) return idx;
  std::stable_sort(idx.begin(), idx.end(), [&](auto a, auto b) { return var[a] > var[b]; });
  idx.resize(subset);
  std::sort(idx.begin(), idx.end());
  return idx;
}

void check_same_geometry(const ImageSample& a, const ImageSample& b, const char* what) {
  if (a.height != b.height || a.width != b.width) {
    throw ShapeError(std::string(what) + " must match the input image size");
  }
}

}  // namespace

SaliencyMap score_cam(const ImageSample& img, const ActivationMapSet& maps,
                      const ImageScorer& scorer, std::size_t target_class,
                      const ImageSample& baseline, const ScoreCamConfig& cfg) {
  if (target_class >= kNumClasses) throw std::out_of_range("target class out of range");
  check_same_geometry(img, baseline, "baseline");
  const std::size_t h = img.height, w = img.width;
  SaliencyMap out;
  out.height = h;
  out.width = w;
  out.target_class = target_class;
  out.values.assign(h * w, 0.0);
  out.channels = select_channels(maps, cfg.channel_subset);

  const double p_base = scorer(baseline)[target_class];
  std::vector<double> combined(h * w, 0.0);
  ImageSample masked(h, w);
  for (std::size_t k : out.channels) {
    const auto& a = maps.maps[k];
    const auto [lo, hi] = std::minmax_element(a.begin(), a.end());
    double weight = 0.0;
    std::vector<double> mask;
    if (*hi > *lo) {
      std::vector<double> norm(a.size());
      for (std::size_t i = 0; i < a.size(); ++i) norm[i] = (a[i] - *lo) / (*hi - *lo);
      mask = upsample_bilinear(norm, maps.grid, h, w);
      for (std::size_t px = 0; px < h * w; ++px)
        for (std::size_t ch = 0; ch < 3; ++ch) {
          const std::size_t i = px * 3 + ch;
          masked.pixels[i] = baseline.pixels[i] + mask[px] * (img.pixels[i] - baseline.pixels[i]);
        }
      weight = scorer(masked)[target_class] - p_base;
      for (std::size_t px = 0; px < h * w; ++px) combined[px] += weight * mask[px];
    }
    out.channel_weights.push_back(weight);
  }
  double mx = 0.0;
  for (double& v : combined) {
    v = std::max(0.0, v);
    mx = std::max(mx, v);
  }
  if (mx > 0.0)
    for (std::size_t i = 0; i < combined.size(); ++i) out.values[i] = combined[i] / mx;
  return out;
}

SaliencyMap score_cam(const ImageSample& img, const vision::VisionTransformer& model,
                      std::size_t target_class, std::size_t layer, const ImageSample& baseline,
                      const ScoreCamConfig& cfg) {
  if (!model.trained()) throw std::logic_error("Score-CAM needs a trained model");
  const auto maps = activation_maps(model, img, layer);
  const ImageScorer scorer = [&](const ImageSample& x) { return model.probabilities(x); };
  return score_cam(img, maps, scorer, target_class, baseline, cfg);
}

DeletionResult deletion_check(const ImageSample& img, const SaliencyMap& map,
                              const ImageScorer& scorer, std::size_t target_class,
                              double fraction, const ImageSample& fill, std::uint64_t seed) {
  if (!(fraction > 0.0 && fraction < 1.0)) throw std::invalid_argument("fraction must lie in (0,1)");
  if (target_class >= kNumClasses) throw std::out_of_range("target class out of range");
  check_same_geometry(img, fill, "fill image");
  if (map.height != img.height || map.width != img.width) throw ShapeError("saliency map size mismatch");
  const std::size_t n = img.area();
  const auto k = static_cast<std::size_t>(std::llround(fraction * static_cast<double>(n)));

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](auto a, auto b) { return map.values[a] > map.values[b]; });
  std::vector<std::size_t> random_order(n);
  std::iota(random_order.begin(), random_order.end(), 0);
  Rng rng = Rng(seed).derive("deletion");
  rng.shuffle(random_order.begin(), random_order.end());

  auto masked_with = [&](const std::vector<std::size_t>& px) {
    ImageSample m = img;
    for (std::size_t i = 0; i < k; ++i)
      for (std::size_t ch = 0; ch < 3; ++ch) m.pixels[px[i] * 3 + ch] = fill.pixels[px[i] * 3 + ch];
    return m;
  };
  DeletionResult res;
  res.pixels = k;
  if (k == 0) return res;
  const double p0 = scorer(img)[target_class];
  res.top_drop = p0 - scorer(masked_with(order))[target_class];
  res.random_drop = p0 - scorer(masked_with(random_order))[target_class];
  return res;
}

ImageSample mean_color_image(const ImageSample& img) {
  img.validate();
  std::array<double, 3> mean{};
  for (std::size_t i = 0; i < img.pixels.size(); ++i) mean[i % 3] += img.pixels[i];
  ImageSample out(img.height, img.width);
  for (std::size_t i = 0; i < out.pixels.size(); ++i) out.pixels[i] = mean[i % 3] / static_cast<double>(img.area());
  return out;
}

}  // namespace dmwat::interpret
