#pragma once

#include <filesystem>
#include <string>

#include <nlohmann/json.hpp>

#include "dmwat/eval/pipeline.hpp"

namespace dmwat::eval {

/// Deterministic summary: config, per-variant fold metrics and mean/std,
/// and per-case predictions sorted by id. Keys are emitted in sorted order.
nlohmann::json report_json(const CvReport& r);

/// Fixed-width table with one row per model variant:
///   Model | Accuracy | Precision | Recall | F1
/// each cell rendered as "77±3".
std::string results_table(const CvReport& r);

/// Writes metrics.json and results.txt into `dir`.
void write_report(const std::filesystem::path& dir, const CvReport& r);

}  // namespace dmwat::eval
