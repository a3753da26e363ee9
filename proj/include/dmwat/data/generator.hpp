#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "dmwat/core/rng.hpp"
#include "dmwat/data/case.hpp"
#include "dmwat/vision/image.hpp"

namespace dmwat::data {

/// Synthetic wound dataset. Each case carries an image grade and a text
/// grade in 1..3; its label is the larger of the two, so neither modality
/// alone determines it. Given label y > 1, the grades agree with
/// probability `concordance`; otherwise one modality shows y and the other
/// a lower grade. Reading either grade alone is right with probability
/// (2 + concordance) / 3 for concordance in [0, 1] (0.7 at the default).
struct GeneratorSpec {
  std::uint64_t seed = 7;
  std::array<std::size_t, kNumClasses> counts{200, 200, 200};
  std::size_t image_size = 32;
  double concordance = 0.1;
  double disagreement_rate = 0.2;  // share of y > 1 cases with split experts
  double pixel_noise = 0.03;

  void validate() const;
  std::size_t total() const { return counts[0] + counts[1] + counts[2]; }
  /// Splits `n` cases evenly, remainder to the lower classes.
  static GeneratorSpec with_total(std::size_t n, std::uint64_t seed);
};

struct GeneratedCase {
  WoundCase record;
  vision::ImageSample image;
};

/// (image grade, text grade) for a case with label y.
std::pair<int, int> sample_grades(ReferralDecision y, double concordance, Rng& rng);
/// Expert pair whose max is y; split with probability `rate` when y > 1.
std::pair<ReferralDecision, ReferralDecision> sample_experts(ReferralDecision y, double rate,
                                                             Rng& rng);
/// Draws the lesion for an image grade and renders it on skin.
vision::ImageSample render_wound(int grade, std::size_t size, double noise, Rng& rng,
                                 LesionEllipse& lesion);
std::string render_note(int grade, Rng& rng);

/// Class-bearing words used by the note templates of `grade`.
const std::vector<std::string>& grade_keywords(int grade);

/// Pixel-colour histogram (pink, red, yellow, dark fractions): a compact
/// image-only summary for probing how much the picture reveals.
std::array<double, 4> image_summary_features(const vision::ImageSample& img);

/// Cases in id order. Case i draws from a stream derived from (seed, i), so
/// the parallel and serial paths give identical output.
std::vector<GeneratedCase> generate_cases(const GeneratorSpec& spec, bool parallel = true);

/// Writes `dir/dataset.jsonl` and `dir/images/<case_id>.ppm`.
void write_dataset(const std::filesystem::path& dir, const std::vector<GeneratedCase>& cases);

inline constexpr const char* kDatasetFileName = "dataset.jsonl";

}  // namespace dmwat::data
