#pragma once

#include <array>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "dmwat/types.hpp"

namespace dmwat::eval {

enum class Averaging { macro, weighted };

const char* to_string(Averaging a);
Averaging averaging_from_string(const std::string& s);

struct ConfusionCounts {
  std::array<std::array<std::size_t, kNumClasses>, kNumClasses> matrix{};  // [label][pred]
  std::array<std::size_t, kNumClasses> tp{}, fp{}, fn{}, tn{};
  std::size_t total = 0;
};

ConfusionCounts confusion_counts(std::span<const ReferralDecision> preds,
                                 std::span<const ReferralDecision> labels);

struct MetricsReport {
  double accuracy = 0.0;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  std::array<double, kNumClasses> class_precision{}, class_recall{}, class_f1{};
  Averaging averaging = Averaging::macro;
  ConfusionCounts counts;
};

/// Accuracy is correct/total. Precision, recall and F1 are computed per
/// class (0 for a zero denominator) and then averaged, unweighted (macro)
/// or by class support (weighted).
MetricsReport compute_metrics(std::span<const ReferralDecision> preds,
                              std::span<const ReferralDecision> labels,
                              Averaging averaging = Averaging::macro);

nlohmann::json to_json(const MetricsReport& m);

struct MeanStd {
  double mean = 0.0;
  double std = 0.0;  // population standard deviation
};

MeanStd mean_std(std::span<const double> values);

/// "77±3" style rendering of a [0,1] quantity in percent.
std::string percent_pm(const MeanStd& s);

}  // namespace dmwat::eval
