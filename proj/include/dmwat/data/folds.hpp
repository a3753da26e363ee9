#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "dmwat/data/case.hpp"

namespace dmwat::data {

class LeakageError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

struct FoldAssignment {
  std::size_t k = 0;
  std::map<std::string, std::size_t> fold_of;  // original case_id -> fold
  std::vector<std::array<std::size_t, kNumClasses>> histograms;

  /// Fold of a case; augmented cases resolve through their parent.
  std::size_t fold(const WoundCase& c) const;
};

/// Per class, members are shuffled and dealt round-robin to the folds, each
/// class starting where the previous one stopped. Augmented cases are
/// ignored. Throws when a class has fewer than k members.
FoldAssignment stratified_kfold(const std::vector<WoundCase>& cases, std::size_t k,
                                std::uint64_t seed);

/// Throws LeakageError if any augmented case in `train` descends from a case
/// in `test_fold`, or if a test case is itself augmented.
void assert_no_leakage(const FoldAssignment& folds, std::size_t test_fold,
                       const std::vector<WoundCase>& train, const std::vector<WoundCase>& test);

}  // namespace dmwat::data
