#include "dmwat/data/case.hpp"

#include <cmath>
#include <fstream>
#include <stdexcept>

namespace dmwat::data {

const char* to_string(Provenance p) {
  switch (p) {
    case Provenance::original: return "original";
    case Provenance::image_aug: return "image_aug";
    case Provenance::text_aug: return "text_aug";
    case Provenance::generator: return "generator";
  }
  return "?";
}

Provenance provenance_from_string(const std::string& s) {
  for (auto p : {Provenance::original, Provenance::image_aug, Provenance::text_aug,
                 Provenance::generator})
    if (s == to_string(p)) return p;
  throw std::invalid_argument("unknown provenance '" + s + "'");
}

ReferralDecision reconcile_labels(ReferralDecision d1, ReferralDecision d2) {
  return to_int(d1) >= to_int(d2) ? d1 : d2;
}

int reconcile_labels(int d1, int d2) {
  return to_int(reconcile_labels(decision_from_int(d1), decision_from_int(d2)));
}

bool LesionEllipse::contains(double col, double row) const {
  const double dx = col - cx, dy = row - cy;
  const double c = std::cos(angle), s = std::sin(angle);
  const double u = (c * dx + s * dy) / rx, v = (-s * dx + c * dy) / ry;
  const double theta = std::atan2(v, u);
  const double r = 1.0 + irregularity * (0.6 * std::sin(3 * theta + 0.5) + 0.4 * std::sin(5 * theta));
  return u * u + v * v <= r * r;
}

void WoundCase::validate() const {
  if (case_id.empty()) throw std::invalid_argument("case_id is empty");
  if (dec_exp1 && dec_exp2 && dec_final != reconcile_labels(*dec_exp1, *dec_exp2)) {
    throw std::invalid_argument("case " + case_id + ": dec_final is not the max of the experts");
  }
  if (is_synthetic_augment && parent_id.empty()) {
    throw std::invalid_argument("case " + case_id + ": augmented case lacks a parent id");
  }
  if (is_synthetic_augment && parent_id == case_id) {
    throw std::invalid_argument("case " + case_id + " is its own parent");
  }
}

nlohmann::json to_json(const WoundCase& c) {
  nlohmann::json j = {{"case_id", c.case_id},
                      {"image_path", c.image_path},
                      {"note", c.note},
                      {"dec_final", to_int(c.dec_final)},
                      {"is_synthetic_augment", c.is_synthetic_augment},
                      {"provenance", to_string(c.provenance)}};
  if (c.dec_exp1) j["dec_exp1"] = to_int(*c.dec_exp1);
  if (c.dec_exp2) j["dec_exp2"] = to_int(*c.dec_exp2);
  if (!c.parent_id.empty()) j["parent_id"] = c.parent_id;
  if (c.image_recipe) j["image_recipe"] = {{"kind", c.image_recipe->kind}, {"seed", c.image_recipe->seed}};
  if (c.generator) {
    const auto& g = *c.generator;
    j["generator"] = {{"image_grade", g.image_grade},
                      {"text_grade", g.text_grade},
                      {"lesion",
                       {{"cx", g.lesion.cx},
                        {"cy", g.lesion.cy},
                        {"rx", g.lesion.rx},
                        {"ry", g.lesion.ry},
                        {"angle", g.lesion.angle},
                        {"irregularity", g.lesion.irregularity}}}};
  }
  return j;
}

WoundCase case_from_json(const nlohmann::json& j) {
  WoundCase c;
  c.case_id = j.at("case_id").get<std::string>();
  c.image_path = j.value("image_path", std::string());
  c.note = j.value("note", std::string());
  if (j.contains("dec_exp1")) c.dec_exp1 = decision_from_int(j["dec_exp1"].get<int>());
  if (j.contains("dec_exp2")) c.dec_exp2 = decision_from_int(j["dec_exp2"].get<int>());
  if (j.contains("dec_final")) {
    c.dec_final = decision_from_int(j["dec_final"].get<int>());
  } else if (c.dec_exp1 && c.dec_exp2) {
    c.dec_final = reconcile_labels(*c.dec_exp1, *c.dec_exp2);
  } else {
    throw std::invalid_argument("case " + c.case_id + " has no decision");
  }
  c.is_synthetic_augment = j.value("is_synthetic_augment", false);
  c.provenance = provenance_from_string(j.value("provenance", std::string("original")));
  c.parent_id = j.value("parent_id", std::string());
  if (j.contains("image_recipe")) {
    c.image_recipe = ImageRecipe{j["image_recipe"].at("kind").get<std::string>(),
                                 j["image_recipe"].at("seed").get<std::uint64_t>()};
  }
  if (j.contains("generator")) {
    const auto& g = j["generator"];
    GeneratorInfo info;
    info.image_grade = g.at("image_grade").get<int>();
    info.text_grade = g.at("text_grade").get<int>();
    const auto& l = g.at("lesion");
    info.lesion = {l.at("cx").get<double>(), l.at("cy").get<double>(), l.at("rx").get<double>(),
                   l.at("ry").get<double>(), l.at("angle").get<double>(),
                   l.at("irregularity").get<double>()};
    c.generator = info;
  }
  c.validate();
  return c;
}

std::vector<WoundCase> read_jsonl(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw DatasetError("cannot open dataset file: " + path.string());
  std::vector<WoundCase> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      out.push_back(case_from_json(nlohmann::json::parse(line)));
    } catch (const std::exception& e) {
      throw DatasetError(path.string() + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
  return out;
}

void write_jsonl(const std::filesystem::path& path, const std::vector<WoundCase>& cases) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream os(path);
  if (!os) throw DatasetError("cannot write dataset file: " + path.string());
  for (const auto& c : cases) os << to_json(c).dump() << '\n';
  if (!os) throw DatasetError("write failed: " + path.string());
}

std::array<std::size_t, kNumClasses> class_counts(const std::vector<WoundCase>& cases) {
  std::array<std::size_t, kNumClasses> n{};
  for (const auto& c : cases) ++n[class_index(c.dec_final)];
  return n;
}

}  // namespace dmwat::data
