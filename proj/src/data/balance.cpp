#include "dmwat/data/balance.hpp"

#include <cstdio>
#include <stdexcept>

#include "dmwat/vision/augment.hpp"

namespace dmwat::data {

CaseAugmentor image_recipe_augmentor() {
  return [](const WoundCase& parent, std::size_t, Rng& rng) {
    static constexpr vision::AugmentKind kinds[] = {
        vision::AugmentKind::rotate, vision::AugmentKind::flip_h,
        vision::AugmentKind::flip_v, vision::AugmentKind::crop_resize,
        vision::AugmentKind::brightness};
    WoundCase c = parent;
    c.image_recipe = ImageRecipe{vision::to_string(kinds[rng.below(std::size(kinds))]), rng.next_u64()};
    c.provenance = Provenance::image_aug;
    return c;
  };
}

std::vector<WoundCase> balance_upsample(const std::vector<WoundCase>& cases,
                                        const std::array<std::size_t, kNumClasses>& targets,
                                        const CaseAugmentor& augmentor, std::uint64_t seed) {
  std::array<std::vector<const WoundCase*>, kNumClasses> originals;
  const auto counts = class_counts(cases);
  for (const auto& c : cases)
    if (!c.is_synthetic_augment) originals[class_index(c.dec_final)].push_back(&c);
  for (std::size_t k = 0; k < kNumClasses; ++k) {
    if (targets[k] < counts[k]) {
      throw std::invalid_argument("class " + std::to_string(k + 1) + " target " +
                                  std::to_string(targets[k]) + " is below its current count " +
                                  std::to_string(counts[k]));
    }
    if (targets[k] > counts[k] && originals[k].empty()) {
      throw std::invalid_argument("class " + std::to_string(k + 1) + " has no originals to augment");
    }
  }
  std::vector<WoundCase> out = cases;
  Rng root = Rng(seed).derive("balance");
  std::size_t serial = 0;
  for (std::size_t k = 0; k < kNumClasses; ++k) {
    const auto& src = originals[k];
    for (std::size_t j = 0; counts[k] + j < targets[k]; ++j, ++serial) {
      const WoundCase& parent = *src[j % src.size()];
      Rng rng = root.derive(parent.case_id, j);
      WoundCase aug = augmentor(parent, serial, rng);
      char suffix[32];
      std::snprintf(suffix, sizeof suffix, "-aug%05zu", j);
      aug.case_id = parent.case_id + suffix;
      aug.parent_id = parent.case_id;
      aug.is_synthetic_augment = true;
      if (aug.provenance == Provenance::original || aug.provenance == Provenance::generator) {
        aug.provenance = Provenance::image_aug;
      }
      aug.dec_exp1 = parent.dec_exp1;
      aug.dec_exp2 = parent.dec_exp2;
      aug.dec_final = parent.dec_final;
      out.push_back(std::move(aug));
    }
  }
  return out;
}

}  // namespace dmwat::data
