#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "dmwat/types.hpp"

namespace dmwat::data {

enum class Provenance { original, image_aug, text_aug, generator };

const char* to_string(Provenance p);
Provenance provenance_from_string(const std::string& s);

/// Eq. 1 style reconciliation: the more urgent of two expert decisions.
ReferralDecision reconcile_labels(ReferralDecision d1, ReferralDecision d2);
/// Integer form; throws std::out_of_range for ordinals outside 1..3.
int reconcile_labels(int d1, int d2);

/// Lesion geometry recorded by the generator, in pixel units.
struct LesionEllipse {
  double cx = 0, cy = 0;  // centre (column, row)
  double rx = 0, ry = 0;  // semi-axes before border irregularity
  double angle = 0;       // radians
  double irregularity = 0;

  bool contains(double col, double row) const;
};

struct GeneratorInfo {
  int image_grade = 1;
  int text_grade = 1;
  LesionEllipse lesion;
};

/// How an image_aug descendant is derived from its parent image.
struct ImageRecipe {
  std::string kind;
  std::uint64_t seed = 0;
};

struct WoundCase {
  std::string case_id;
  std::string image_path;  // relative to the dataset file
  std::string note;
  std::optional<ReferralDecision> dec_exp1;
  std::optional<ReferralDecision> dec_exp2;
  ReferralDecision dec_final = ReferralDecision::continue_treatment;
  bool is_synthetic_augment = false;
  Provenance provenance = Provenance::original;
  std::string parent_id;  // set on augmented cases
  std::optional<ImageRecipe> image_recipe;
  std::optional<GeneratorInfo> generator;

  /// Throws std::invalid_argument when an invariant is violated.
  void validate() const;
  /// Id of the original case this one descends from (itself if original).
  const std::string& root_id() const { return is_synthetic_augment ? parent_id : case_id; }
};

nlohmann::json to_json(const WoundCase& c);
WoundCase case_from_json(const nlohmann::json& j);

class DatasetError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::vector<WoundCase> read_jsonl(const std::filesystem::path& path);
void write_jsonl(const std::filesystem::path& path, const std::vector<WoundCase>& cases);

std::array<std::size_t, kNumClasses> class_counts(const std::vector<WoundCase>& cases);

}  // namespace dmwat::data
