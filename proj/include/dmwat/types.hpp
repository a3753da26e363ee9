#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace dmwat {

inline constexpr std::size_t kNumClasses = 3;

/// Ordinal triage label. Higher is more urgent.
enum class ReferralDecision : int {
  continue_treatment = 1,
  change_non_urgent = 2,
  change_urgent = 3,
};

inline ReferralDecision decision_from_int(int v) {
  if (v < 1 || v > 3) {
    throw std::out_of_range("referral decision must be 1, 2 or 3, got " + std::to_string(v));
  }
  return static_cast<ReferralDecision>(v);
}

inline int to_int(ReferralDecision d) { return static_cast<int>(d); }
/// Zero-based class index (1 -> 0, 2 -> 1, 3 -> 2).
inline std::size_t class_index(ReferralDecision d) { return static_cast<std::size_t>(to_int(d) - 1); }
inline ReferralDecision decision_from_index(std::size_t i) {
  return decision_from_int(static_cast<int>(i) + 1);
}

/// Argmax over per-class scores; exact ties go to the more urgent class.
inline ReferralDecision urgent_argmax(std::span<const double> scores) {
  if (scores.size() != kNumClasses) throw std::invalid_argument("expected 3 class scores");
  std::size_t best = 0;
  for (std::size_t c = 1; c < scores.size(); ++c) {
    if (scores[c] >= scores[best]) best = c;
  }
  return decision_from_index(best);
}

/// Fixed-width real vector emitted by an encoder.
struct EmbeddingVector {
  std::vector<double> values;

  std::size_t size() const { return values.size(); }
  bool operator==(const EmbeddingVector&) const = default;
};

using SoftLabel = std::array<double, kNumClasses>;

inline SoftLabel one_hot_label(ReferralDecision d) {
  SoftLabel l{};
  l[class_index(d)] = 1.0;
  return l;
}

}  // namespace dmwat
