#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <vector>

#include "dmwat/core/rng.hpp"
#include "dmwat/data/case.hpp"

namespace dmwat::data {

/// Builds one augmented descendant of `parent`. `serial` numbers the
/// augments of the whole call; the returned case is completed by
/// balance_upsample (id, parent, flags, label).
using CaseAugmentor = std::function<WoundCase(const WoundCase& parent, std::size_t serial, Rng& rng)>;

/// Augmentor recording a random image-augmentation recipe, no pixels touched.
CaseAugmentor image_recipe_augmentor();

/// Appends augmented cases until each class count equals its target. The
/// j-th new case of a class derives from that class's originals[j mod n],
/// in input order. Inputs are returned unchanged at the front.
std::vector<WoundCase> balance_upsample(const std::vector<WoundCase>& cases,
                                        const std::array<std::size_t, kNumClasses>& targets,
                                        const CaseAugmentor& augmentor, std::uint64_t seed);

}  // namespace dmwat::data
