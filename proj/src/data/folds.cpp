#include "dmwat/data/folds.hpp"

#include "dmwat/core/rng.hpp"

namespace dmwat::data {

std::size_t FoldAssignment::fold(const WoundCase& c) const {
  const auto it = fold_of.find(c.root_id());
  if (it == fold_of.end()) throw LeakageError("case " + c.case_id + " has no fold");
  return it->second;
}

FoldAssignment stratified_kfold(const std::vector<WoundCase>& cases, std::size_t k,
                                std::uint64_t seed) {
  if (k < 2) throw std::invalid_argument("fold count must be at least 2");
  std::array<std::vector<std::size_t>, kNumClasses> members;
  for (std::size_t i = 0; i < cases.size(); ++i) {
    if (cases[i].is_synthetic_augment) continue;
    members[class_index(cases[i].dec_final)].push_back(i);
  }
  for (std::size_t c = 0; c < kNumClasses; ++c) {
    if (!members[c].empty() && members[c].size() < k) {
      throw std::invalid_argument("class " + std::to_string(c + 1) + " has " +
                                  std::to_string(members[c].size()) + " cases, fewer than k=" +
                                  std::to_string(k));
    }
  }
  FoldAssignment fa;
  fa.k = k;
  fa.histograms.assign(k, {});
  Rng rng = Rng(seed).derive("fold");
  std::size_t next = 0;
  for (std::size_t c = 0; c < kNumClasses; ++c) {
    rng.shuffle(members[c].begin(), members[c].end());
    for (std::size_t idx : members[c]) {
      if (!fa.fold_of.emplace(cases[idx].case_id, next).second) {
        throw std::invalid_argument("duplicate case_id " + cases[idx].case_id);
      }
      ++fa.histograms[next][c];
      next = (next + 1) % k;
    }
  }
  return fa;
}

void assert_no_leakage(const FoldAssignment& folds, std::size_t test_fold,
                       const std::vector<WoundCase>& train, const std::vector<WoundCase>& test) {
  for (const auto& t : test) {
    if (t.is_synthetic_augment) throw LeakageError("test split contains augmented case " + t.case_id);
    if (folds.fold(t) != test_fold) throw LeakageError("test case " + t.case_id + " is from another fold");
  }
  for (const auto& c : train) {
    if (folds.fold(c) == test_fold) {
      throw LeakageError("training case " + c.case_id + " descends from held-out " + c.root_id());
    }
  }
}

}  // namespace dmwat::data
