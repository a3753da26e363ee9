#include "dmwat/eval/report.hpp"

#include <cstdio>
#include <fstream>

namespace dmwat::eval {

namespace {

nlohmann::json stat(const MeanStd& s) { return {{"mean", s.mean}, {"std", s.std}}; }

nlohmann::json variant_json(const VariantResult& v) {
  nlohmann::json folds = nlohmann::json::array();
  for (const auto& m : v.folds) folds.push_back(to_json(m));
  return {{"modality", to_string(v.modality)},
          {"head", to_string(v.head)},
          {"views", v.views},
          {"accuracy", stat(v.accuracy)},
          {"precision", stat(v.precision)},
          {"recall", stat(v.recall)},
          {"f1", stat(v.f1)},
          {"folds", folds}};
}

std::string model_name(const VariantResult& v) {
  std::string name = std::string(to_string(v.modality)) + " + " + to_string(v.head);
  if (v.views > 1) name += " (vote x" + std::to_string(v.views) + ")";
  return name;
}

}  // namespace

nlohmann::json report_json(const CvReport& r) {
  nlohmann::json variants = nlohmann::json::array();
  for (const auto& v : r.variants) variants.push_back(variant_json(v));
  nlohmann::json voting = nlohmann::json::array();
  for (const auto& v : r.voting) voting.push_back(variant_json(v));
  nlohmann::json cases = nlohmann::json::array();
  for (const auto& c : r.cases) {
    nlohmann::json p = nlohmann::json::object();
    for (const auto& [k, d] : c.predictions) p[k] = to_int(d);
    cases.push_back({{"case_id", c.case_id}, {"fold", c.fold}, {"label", to_int(c.label)}, {"predictions", p}});
  }
  return {{"config", r.config}, {"folds", r.folds}, {"variants", variants}, {"voting", voting}, {"cases", cases}};
}

std::string results_table(const CvReport& r) {
  std::string out;
  char line[160];
  std::snprintf(line, sizeof line, "%-24s | %-9s | %-9s | %-9s | %-9s\n", "Model", "Accuracy", "Precision",
                "Recall", "F1");
  out += line;
  out += std::string(24, '-') + "-+-" + std::string(9, '-') + "-+-" + std::string(9, '-') + "-+-" +
         std::string(9, '-') + "-+-" + std::string(9, '-') + "\n";
  auto row = [&](const VariantResult& v) {
    // "±" is two bytes in UTF-8; pad by hand so columns line up on screen.
    auto cell = [](const MeanStd& s) {
      std::string t = percent_pm(s);
      const std::size_t shown = t.size() - 1;
      if (shown < 9) t += std::string(9 - shown, ' ');
      return t;
    };
    char name[32];
    std::snprintf(name, sizeof name, "%-24s", model_name(v).c_str());
    out += std::string(name) + " | " + cell(v.accuracy) + " | " + cell(v.precision) + " | " +
           cell(v.recall) + " | " + cell(v.f1) + "\n";
  };
  for (const auto& v : r.variants) row(v);
  for (const auto& v : r.voting) row(v);
  return out;
}

void write_report(const std::filesystem::path& dir, const CvReport& r) {
  std::filesystem::create_directories(dir);
  {
    std::ofstream os(dir / "metrics.json");
    os << report_json(r).dump(2) << "\n";
    if (!os) throw std::runtime_error("failed writing " + (dir / "metrics.json").string());
  }
  std::ofstream os(dir / "results.txt");
  os << results_table(r);
  if (!os) throw std::runtime_error("failed writing " + (dir / "results.txt").string());
}

}  // namespace dmwat::eval
