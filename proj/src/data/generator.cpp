#include "dmwat/data/generator.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <stdexcept>

namespace dmwat::data {

void GeneratorSpec::validate() const {
  if (total() == 0) throw std::invalid_argument("generator needs at least one case");
  if (image_size < 16) throw std::invalid_argument("generator image_size must be at least 16");
  if (!(concordance >= 0.0 && concordance <= 1.0)) {
    throw std::invalid_argument("concordance must lie in [0,1]");
  }
  if (!(disagreement_rate >= 0.0 && disagreement_rate <= 1.0)) {
    throw std::invalid_argument("disagreement_rate must lie in [0,1]");
  }
  if (!(pixel_noise >= 0.0 && pixel_noise <= 0.5)) {
    throw std::invalid_argument("pixel_noise must lie in [0,0.5]");
  }
}

GeneratorSpec GeneratorSpec::with_total(std::size_t n, std::uint64_t seed) {
  GeneratorSpec s;
  s.seed = seed;
  for (std::size_t c = 0; c < kNumClasses; ++c) s.counts[c] = n / kNumClasses + (c < n % kNumClasses);
  return s;
}

std::pair<int, int> sample_grades(ReferralDecision y, double concordance, Rng& rng) {
  const int g = to_int(y);
  if (g == 1) return {1, 1};
  const double u = rng.uniform();
  if (u < concordance) return {g, g};
  const double v = (u - concordance) / (1.0 - concordance);  // uniform in [0,1)
  int low = 1;
  double side = 0.0;
  if (g == 2) {
    side = v * 2.0;
  } else {
    // Lower grade 1 with weight 5/9, grade 2 with weight 4/9.
    low = v < 5.0 / 9.0 ? 1 : 2;
    side = low == 1 ? v * 9.0 / 5.0 * 2.0 : (v - 5.0 / 9.0) * 9.0 / 4.0 * 2.0;
  }
  return side < 1.0 ? std::pair{g, low} : std::pair{low, g};
}

std::pair<ReferralDecision, ReferralDecision> sample_experts(ReferralDecision y, double rate,
                                                             Rng& rng) {
  const int g = to_int(y);
  if (g == 1 || !rng.bernoulli(rate)) return {y, y};
  const auto lower = decision_from_int(g - 1);
  return rng.bernoulli(0.5) ? std::pair{y, lower} : std::pair{lower, y};
}

namespace {

struct Rgb {
  double r, g, b;
};

constexpr Rgb kPink{0.95, 0.45, 0.60};
constexpr Rgb kRed{0.72, 0.12, 0.14};
constexpr Rgb kYellow{0.85, 0.76, 0.20};
constexpr Rgb kBlack{0.12, 0.08, 0.06};
constexpr Rgb kDarkRed{0.45, 0.08, 0.08};

// Smooth noise in [0,1] from a coarse random lattice, bilinearly sampled.
class ValueNoise {
 public:
  ValueNoise(std::size_t size, std::size_t cell, Rng& rng) : cell_(cell), n_(size / cell + 2) {
    lattice_.resize(n_ * n_);
    for (auto& v : lattice_) v = rng.uniform();
  }
  double operator()(double row, double col) const {
    const double fr = row / static_cast<double>(cell_), fc = col / static_cast<double>(cell_);
    const auto r0 = static_cast<std::size_t>(fr), c0 = static_cast<std::size_t>(fc);
    const double tr = fr - static_cast<double>(r0), tc = fc - static_cast<double>(c0);
    auto at = [&](std::size_t r, std::size_t c) { return lattice_[std::min(r, n_ - 1) * n_ + std::min(c, n_ - 1)]; };
    return (1 - tr) * ((1 - tc) * at(r0, c0) + tc * at(r0, c0 + 1)) +
           tr * ((1 - tc) * at(r0 + 1, c0) + tc * at(r0 + 1, c0 + 1));
  }

 private:
  std::size_t cell_, n_;
  std::vector<double> lattice_;
};

double clamp01(double v) { return std::clamp(v, 0.0, 1.0); }

}  // namespace

vision::ImageSample render_wound(int grade, std::size_t size, double noise, Rng& rng,
                                 LesionEllipse& lesion) {
  if (grade < 1 || grade > 3) throw std::out_of_range("image grade must be 1, 2 or 3");
  const double s = static_cast<double>(size) / 32.0;
  const Rgb skin{rng.uniform(0.80, 0.92), rng.uniform(0.62, 0.72), rng.uniform(0.52, 0.62)};
  const double shade = rng.uniform(-0.06, 0.06);

  double r_lo = 3.5, r_hi = 5.5, irregular = 0.0;
  if (grade == 2) r_lo = 6.0, r_hi = 8.5, irregular = 0.05;
  if (grade == 3) r_lo = 7.0, r_hi = 10.0, irregular = 0.3;
  lesion.rx = rng.uniform(r_lo, r_hi) * s;
  lesion.ry = rng.uniform(r_lo, r_hi) * s;
  lesion.angle = rng.uniform(0.0, std::numbers::pi);
  lesion.irregularity = irregular;
  const double mid = static_cast<double>(size) / 2.0 - 0.5;
  lesion.cx = mid + rng.uniform(-5.0, 5.0) * s;
  lesion.cy = mid + rng.uniform(-5.0, 5.0) * s;

  const ValueNoise tissue(size, std::max<std::size_t>(2, size / 8), rng);
  vision::ImageSample img(size, size);
  for (std::size_t r = 0; r < size; ++r) {
    for (std::size_t c = 0; c < size; ++c) {
      const double rr = static_cast<double>(r), cc = static_cast<double>(c);
      Rgb px{skin.r + shade * rr / static_cast<double>(size), skin.g, skin.b};
      if (lesion.contains(cc, rr)) {
        if (grade == 1) {
          px = kPink;
        } else if (grade == 2) {
          px = kRed;
        } else {
          const double t = tissue(rr, cc);
          px = t < 0.4 ? kBlack : (t < 0.55 ? kDarkRed : kYellow);
        }
      }
      img.at(r, c, 0) = clamp01(px.r + noise * rng.normal());
      img.at(r, c, 1) = clamp01(px.g + noise * rng.normal());
      img.at(r, c, 2) = clamp01(px.b + noise * rng.normal());
    }
  }
  vision::quantize_8bit(img);
  return img;
}

namespace {

using Phrases = std::vector<std::string>;

const Phrases kOpeners = {"patient seen today.", "follow up visit.",
                          "dressing removed for assessment.", "weekly wound review."};
const Phrases kClosers = {"dressing changed.", "will monitor.", "continue current care plan.",
                          "reassess next visit."};

struct GradeTemplates {
  Phrases size, bed, fluid;
};

const GradeTemplates& templates(int grade) {
  static const GradeTemplates g1{
      {"small superficial wound.", "wound reduced in size.", "shallow wound, edges contracting."},
      {"bed pink and granulating.", "healthy granulation tissue.", "epithelializing edges."},
      {"minimal serous drainage.", "scant clear exudate.", "dry intact periwound skin."}};
  static const GradeTemplates g2{
      {"wound unchanged in size.", "moderate wound, slow progress.", "stalled wound since last visit."},
      {"bed red with patchy granulation.", "macerated edges.", "periwound edema."},
      {"moderate serosanguinous drainage.", "increased exudate.", "mild redness around edges."}};
  static const GradeTemplates g3{
      {"wound enlarging.", "deep wound with tunneling.", "wound expanding with undermining."},
      {"necrotic tissue present.", "yellow slough covering bed.", "black eschar at base."},
      {"purulent drainage with odor.", "foul odor noted.", "spreading erythema and warmth."}};
  if (grade == 1) return g1;
  if (grade == 2) return g2;
  if (grade == 3) return g3;
  throw std::out_of_range("text grade must be 1, 2 or 3");
}

const std::string& pick(const Phrases& p, Rng& rng) { return p[rng.below(p.size())]; }

}  // namespace

std::string render_note(int grade, Rng& rng) {
  const auto& t = templates(grade);
  std::vector<std::string> middle = {pick(t.size, rng), pick(t.bed, rng), pick(t.fluid, rng)};
  rng.shuffle(middle.begin(), middle.end());
  std::string out = pick(kOpeners, rng);
  for (const auto& m : middle) out += " " + m;
  out += " " + pick(kClosers, rng);
  return out;
}

const std::vector<std::string>& grade_keywords(int grade) {
  static const std::vector<std::string> k1 = {"granulating", "granulation", "epithelializing",
                                              "superficial", "shallow", "contracting",
                                              "minimal", "scant", "healthy", "reduced"};
  static const std::vector<std::string> k2 = {"unchanged", "stalled", "slow", "macerated",
                                              "edema", "serosanguinous", "increased", "patchy"};
  static const std::vector<std::string> k3 = {"odor", "purulent", "necrotic", "slough",
                                              "eschar", "tunneling", "undermining", "foul",
                                              "enlarging", "spreading"};
  if (grade == 1) return k1;
  if (grade == 2) return k2;
  if (grade == 3) return k3;
  throw std::out_of_range("grade must be 1, 2 or 3");
}

std::array<double, 4> image_summary_features(const vision::ImageSample& img) {
  std::array<double, 4> f{};
  for (std::size_t r = 0; r < img.height; ++r) {
    for (std::size_t c = 0; c < img.width; ++c) {
      const double R = img.at(r, c, 0), G = img.at(r, c, 1), B = img.at(r, c, 2);
      if (R > 0.85 && G < 0.56 && B > 0.48) {
        f[0] += 1;  // pink
      } else if (R > 0.55 && G < 0.3) {
        f[1] += 1;  // red
      } else if (R > 0.65 && G > 0.6 && B < 0.4) {
        f[2] += 1;  // yellow
      } else if (R + G + B < 0.9) {
        f[3] += 1;  // dark
      }
    }
  }
  for (auto& v : f) v /= static_cast<double>(img.area());
  return f;
}

std::vector<GeneratedCase> generate_cases(const GeneratorSpec& spec, bool parallel) {
  spec.validate();
  const std::size_t n = spec.total();
  std::vector<ReferralDecision> labels;
  labels.reserve(n);
  for (std::size_t c = 0; c < kNumClasses; ++c)
    labels.insert(labels.end(), spec.counts[c], decision_from_index(c));
  Rng root(spec.seed);
  Rng order = root.derive("labels");
  order.shuffle(labels.begin(), labels.end());

  std::vector<GeneratedCase> out(n);
  auto make = [&](std::size_t i) {
    Rng rng = root.derive("case", i);
    Rng grade_rng = rng.derive("grades"), expert_rng = rng.derive("experts");
    Rng image_rng = rng.derive("image"), text_rng = rng.derive("text");
    const ReferralDecision y = labels[i];
    const auto [gi, gt] = sample_grades(y, spec.concordance, grade_rng);
    const auto [e1, e2] = sample_experts(y, spec.disagreement_rate, expert_rng);
    GeneratedCase& g = out[i];
    char id[32];
    std::snprintf(id, sizeof id, "case-%05zu", i);
    g.record.case_id = id;
    g.record.image_path = "images/" + g.record.case_id + ".ppm";
    g.record.dec_exp1 = e1;
    g.record.dec_exp2 = e2;
    g.record.dec_final = reconcile_labels(e1, e2);
    g.record.provenance = Provenance::generator;
    GeneratorInfo info;
    info.image_grade = gi;
    info.text_grade = gt;
    g.image = render_wound(gi, spec.image_size, spec.pixel_noise, image_rng, info.lesion);
    g.record.note = render_note(gt, text_rng);
    g.record.generator = info;
  };
  if (parallel) {
#pragma omp parallel for schedule(static)
    for (std::size_t i = 0; i < n; ++i) make(i);
  } else {
    for (std::size_t i = 0; i < n; ++i) make(i);
  }
  return out;
}

void write_dataset(const std::filesystem::path& dir, const std::vector<GeneratedCase>& cases) {
  std::error_code ec;
  std::filesystem::create_directories(dir / "images", ec);
  if (ec) throw DatasetError("cannot create output directory " + dir.string() + ": " + ec.message());
  std::vector<WoundCase> records;
  records.reserve(cases.size());
  for (const auto& g : cases) {
    vision::write_ppm(dir / g.record.image_path, g.image);
    records.push_back(g.record);
  }
  write_jsonl(dir / kDatasetFileName, records);
}

}  // namespace dmwat::data
