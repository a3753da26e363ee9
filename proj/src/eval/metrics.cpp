#include "dmwat/eval/metrics.hpp"

#include <cmath>
#include <cstdio>
#include <stdexcept>

namespace dmwat::eval {

const char* to_string(Averaging a) { return a == Averaging::macro ? "macro" : "weighted"; }

Averaging averaging_from_string(const std::string& s) {
  if (s == "macro") return Averaging::macro;
  if (s == "weighted") return Averaging::weighted;
  throw std::invalid_argument("averaging must be 'macro' or 'weighted', got '" + s + "'");
}

ConfusionCounts confusion_counts(std::span<const ReferralDecision> preds,
                                 std::span<const ReferralDecision> labels) {
  if (preds.size() != labels.size()) throw std::invalid_argument("predictions and labels differ in length");
  if (preds.empty()) throw std::invalid_argument("no predictions to score");
  ConfusionCounts cc;
  cc.total = preds.size();
  for (std::size_t i = 0; i < preds.size(); ++i) ++cc.matrix[class_index(labels[i])][class_index(preds[i])];
  for (std::size_t c = 0; c < kNumClasses; ++c) {
    cc.tp[c] = cc.matrix[c][c];
    for (std::size_t o = 0; o < kNumClasses; ++o) {
      if (o == c) continue;
      cc.fn[c] += cc.matrix[c][o];
      cc.fp[c] += cc.matrix[o][c];
    }
    cc.tn[c] = cc.total - cc.tp[c] - cc.fp[c] - cc.fn[c];
  }
  return cc;
}

MetricsReport compute_metrics(std::span<const ReferralDecision> preds,
                              std::span<const ReferralDecision> labels, Averaging averaging) {
  MetricsReport m;
  m.averaging = averaging;
  m.counts = confusion_counts(preds, labels);
  const auto& cc = m.counts;
  auto ratio = [](std::size_t num, std::size_t den) {
    return den == 0 ? 0.0 : static_cast<double>(num) / static_cast<double>(den);
  };
  std::size_t correct = 0;
  for (std::size_t c = 0; c < kNumClasses; ++c) correct += cc.tp[c];
  m.accuracy = ratio(correct, cc.total);
  for (std::size_t c = 0; c < kNumClasses; ++c) {
    const double p = ratio(cc.tp[c], cc.tp[c] + cc.fp[c]);
    const double r = ratio(cc.tp[c], cc.tp[c] + cc.fn[c]);
    m.class_precision[c] = p;
    m.class_recall[c] = r;
    m.class_f1[c] = p + r == 0.0 ? 0.0 : 2.0 * p * r / (p + r);
    const double w = averaging == Averaging::macro
                         ? 1.0 / static_cast<double>(kNumClasses)
                         : ratio(cc.tp[c] + cc.fn[c], cc.total);
    m.precision += w * p;
    m.recall += w * r;
    m.f1 += w * m.class_f1[c];
  }
  return m;
}

nlohmann::json to_json(const MetricsReport& m) {
  nlohmann::json matrix = nlohmann::json::array();
  for (const auto& row : m.counts.matrix) matrix.push_back(row);
  return {{"accuracy", m.accuracy},
          {"precision", m.precision},
          {"recall", m.recall},
          {"f1", m.f1},
          {"averaging", to_string(m.averaging)},
          {"class_precision", m.class_precision},
          {"class_recall", m.class_recall},
          {"class_f1", m.class_f1},
          {"confusion", matrix}};
}

MeanStd mean_std(std::span<const double> values) {
  if (values.empty()) throw std::invalid_argument("mean_std of an empty set");
  MeanStd s;
  for (double v : values) s.mean += v;
  s.mean /= static_cast<double>(values.size());
  double var = 0.0;
  for (double v : values) var += (v - s.mean) * (v - s.mean);
  s.std = std::sqrt(var / static_cast<double>(values.size()));
  return s;
}

std::string percent_pm(const MeanStd& s) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.0f±%.0f", 100.0 * s.mean, 100.0 * s.std);
  return buf;
}

}  // namespace dmwat::eval
