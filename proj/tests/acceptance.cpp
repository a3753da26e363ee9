// Acceptance checks. Prints one PASS/FAIL line per criterion; exit status is
// non-zero if any selected criterion fails. Pass criterion numbers as
// arguments to run a subset.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <functional>
#include <map>
#include <numbers>
#include <optional>
#include <set>
#include <string>

#include <spdlog/fmt/fmt.h>

#include "dmwat/core/ops.hpp"
#include "dmwat/core/rng.hpp"
#include "dmwat/data/balance.hpp"
#include "dmwat/data/folds.hpp"
#include "dmwat/data/generator.hpp"
#include "dmwat/eval/pipeline.hpp"
#include "dmwat/eval/report.hpp"
#include "dmwat/fusion/svm.hpp"
#include "dmwat/interpret/integrated_gradients.hpp"
#include "dmwat/interpret/score_cam.hpp"
#include "dmwat/text/attention.hpp"
#include "dmwat/text/train.hpp"
#include "dmwat/vision/augment.hpp"
#include "dmwat/vision/distill.hpp"
#include "dmwat/vision/teacher.hpp"
#include "dmwat/vision/train.hpp"
#include "support/gradcheck.hpp"
#include "support/oracle.hpp"
#include "support/random_net.hpp"

using namespace dmwat;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

double cpu_seconds(std::clock_t since) {
  return static_cast<double>(std::clock() - since) / CLOCKS_PER_SEC;
}

Tensor random_matrix(std::size_t r, std::size_t c, Rng& rng) {
  std::vector<double> v(r * c);
  for (auto& x : v) x = rng.normal();
  return Tensor({r, c}, std::move(v));
}

vision::ImageSample random_image(std::size_t h, std::size_t w, Rng& rng) {
  vision::ImageSample img(h, w);
  for (auto& p : img.pixels) p = rng.uniform();
  return img;
}

const std::vector<data::GeneratedCase>& synthetic_600() {
  static const auto cases = data::generate_cases(data::GeneratorSpec{});
  return cases;
}

std::vector<data::WoundCase> cases_with_counts(std::array<std::size_t, 3> counts) {
  std::vector<data::WoundCase> out;
  for (std::size_t c = 0; c < 3; ++c)
    for (std::size_t i = 0; i < counts[c]; ++i) {
      data::WoundCase w;
      w.case_id = fmt::format("c{}-{:03}", c + 1, i);
      w.note = "note";
      w.dec_final = decision_from_index(c);
      w.dec_exp1 = w.dec_exp2 = w.dec_final;
      out.push_back(w);
    }
  return out;
}

const eval::LoadedDataset& dataset_600() {
  static const auto ds = eval::dataset_from_generated(synthetic_600());
  return ds;
}

Outcome autodiff() {
  const auto t0 = std::clock();
  double worst = 0.0;
  std::size_t entries = 0;
  for (std::uint64_t seed = 1000; seed < 1025; ++seed) {
    auto net = dmwat::testing::make_random_net(seed);
    const auto r = dmwat::testing::gradcheck(net.params, [&] { return net.loss(); });
    worst = std::max(worst, r.max_rel_error);
    entries += r.entries;
  }
  const double secs = cpu_seconds(t0);
  return {worst < 1e-4 && secs < 30.0,
          fmt::format("max rel error {:.2e} over 25 nets ({} entries), {:.1f} s CPU", worst, entries, secs)};
}

Outcome attention_reduction() {
  Rng rng(2);
  double weight_err = 0.0, out_err = 0.0, row_err = 0.0;
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t n = 2 + rng.below(14), dh = 1 + rng.below(16), k = 1 + rng.below(8);
    const auto qc = random_matrix(n, dh, rng), kc = random_matrix(n, dh, rng), v = random_matrix(n, dh, rng);
    const Tensor zeros({2 * k + 1, dh});
    const auto a = text::disentangled_attention(qc, kc, v, zeros, zeros, k);
    const auto b = text::scaled_dot_attention(qc, kc, v);
    for (std::size_t i = 0; i < n * n; ++i) weight_err = std::max(weight_err, std::abs(a.weights[i] - b.weights[i]));
    for (std::size_t i = 0; i < n * dh; ++i) out_err = std::max(out_err, std::abs(a.output[i] - b.output[i]));
    for (std::size_t i = 0; i < n; ++i) {
      double s = 0.0;
      for (std::size_t j = 0; j < n; ++j) s += a.weights.at(i, j);
      row_err = std::max(row_err, std::abs(s - 1.0));
    }
  }
  return {weight_err <= 1e-12 && out_err <= 1e-12 && row_err <= 1e-9,
          fmt::format("50 random shapes: weights {:.1e}, outputs {:.1e}, row sums {:.1e}", weight_err, out_err,
                      row_err)};
}

Outcome distillation_endpoints() {
  Rng rng(3);
  bool endpoints = true;
  double worst = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    vision::VitConfig cfg;
    cfg.distillation_mode = trial % 2 ? vision::DistillMode::soft : vision::DistillMode::hard;
    const Tensor s = Tensor::vector({rng.normal(), rng.normal(), rng.normal()});
    const Tensor t = Tensor::vector({rng.normal(), rng.normal(), rng.normal()});
    const auto y = decision_from_index(rng.below(3));
    cfg.distillation_alpha = 1.0;
    const auto one = vision::distillation_loss(s, t, y, cfg);
    cfg.distillation_alpha = 0.0;
    const auto zero = vision::distillation_loss(s, t, y, cfg);
    endpoints &= one.parts.total == one.parts.ce && one.total.item() == one.parts.ce;
    endpoints &= zero.parts.total == zero.parts.kd && zero.total.item() == zero.parts.kd;
    for (int i = 0; i <= 10; ++i) {
      cfg.distillation_alpha = i / 10.0;
      const auto l = vision::distillation_loss(s, t, y, cfg);
      const double a = cfg.distillation_alpha;
      worst = std::max(worst, std::abs(l.total.item() - (a * l.parts.ce + (1.0 - a) * l.parts.kd)));
    }
  }
  return {endpoints && worst <= 1e-12,
          fmt::format("endpoints exact: {}, max convex-combination error {:.1e} (hard and soft, 11 alphas)",
                      endpoints ? "yes" : "no", worst)};
}

Outcome augmentation_algebra() {
  std::size_t bad_sum = 0, bad_area = 0, bad_flip = 0, bad_rot = 0;
  for (std::uint64_t seed = 0; seed < 1000; ++seed) {
    Rng rng(seed);
    const auto a = random_image(32, 32, rng), b = random_image(32, 32, rng);
    const auto la = decision_from_index(rng.below(3)), lb = decision_from_index(rng.below(3));
    const auto m = vision::mixup(a, la, b, lb, rng);
    const auto c = vision::cutmix(a, la, b, lb, seed);
    if (m.label[0] + m.label[1] + m.label[2] != 1.0) ++bad_sum;
    if (c.label[0] + c.label[1] + c.label[2] != 1.0) ++bad_sum;
    std::size_t pasted = 0;
    for (std::size_t r = 0; r < 32; ++r)
      for (std::size_t col = 0; col < 32; ++col) {
        const bool in = c.box && c.box->contains(r, col);
        const auto& src = in ? b : a;
        for (std::size_t ch = 0; ch < 3; ++ch)
          if (c.image.at(r, col, ch) != src.at(r, col, ch)) ++bad_area;
        pasted += in;
      }
    if (c.b_weight != static_cast<double>(pasted) / 1024.0) ++bad_area;
    if (la != lb && c.label[class_index(lb)] != c.b_weight) ++bad_area;

    const auto s = random_image(12, 12, rng);
    if (vision::flip_horizontal(vision::flip_horizontal(s)) != s) ++bad_flip;
    if (vision::flip_vertical(vision::flip_vertical(s)) != s) ++bad_flip;
    const int p = static_cast<int>(rng.below(8)), q = static_cast<int>(rng.below(8));
    if (vision::rotate_quarter(vision::rotate_quarter(s, p), q) != vision::rotate_quarter(s, (p + q) % 4)) ++bad_rot;
    if (vision::rotate_quarter(s, 2) != vision::flip_horizontal(vision::flip_vertical(s))) ++bad_rot;
  }
  return {bad_sum + bad_area + bad_flip + bad_rot == 0,
          fmt::format("1000 seeds: label-sum violations {}, area violations {}, flip {}, rotation {}", bad_sum,
                      bad_area, bad_flip, bad_rot)};
}

Outcome reconciliation() {
  std::size_t bad = 0;
  for (int a = 1; a <= 3; ++a)
    for (int b = 1; b <= 3; ++b) bad += data::reconcile_labels(a, b) != std::max(a, b);
  std::size_t monotone_bad = 0;
  for (const auto& g : synthetic_600()) {
    const auto& r = g.record;
    const int e1 = to_int(*r.dec_exp1), e2 = to_int(*r.dec_exp2), y = to_int(r.dec_final);
    if (y != data::reconcile_labels(e1, e2)) ++bad;
    for (int u = e1; u <= 3; ++u)
      for (int v = e2; v <= 3; ++v) monotone_bad += data::reconcile_labels(u, v) < y;
  }
  return {bad == 0 && monotone_bad == 0,
          fmt::format("9 pairs and {} cases: {} mismatches, {} monotonicity violations", synthetic_600().size(),
                      bad, monotone_bad)};
}

Outcome table_balancing() {
  const auto originals = cases_with_counts({26, 40, 139});
  const auto out = data::balance_upsample(originals, {1950, 1850, 2085}, data::image_recipe_augmentor(), 13);
  const auto counts = data::class_counts(out);
  const auto folds = data::stratified_kfold(originals, 5, 13);
  std::string leak;
  try {
    for (std::size_t f = 0; f < 5; ++f) {
      std::vector<data::WoundCase> train, test;
      for (const auto& c : out) {
        if (folds.fold(c) != f) train.push_back(c);
        else if (!c.is_synthetic_augment) test.push_back(c);
      }
      data::assert_no_leakage(folds, f, train, test);
    }
  } catch (const std::exception& e) {
    leak = e.what();
  }
  const bool exact = counts == std::array<std::size_t, 3>{1950, 1850, 2085};
  return {exact && leak.empty(),
          fmt::format("counts {{{}, {}, {}}}, augments follow their parent's fold: {}", counts[0], counts[1],
                      counts[2], leak.empty() ? "yes" : leak)};
}

Outcome stratification() {
  std::vector<data::WoundCase> records;
  for (const auto& g : synthetic_600()) records.push_back(g.record);
  const auto total = data::class_counts(records);
  const auto folds = data::stratified_kfold(records, 5, 7);
  double worst = 0.0;
  for (const auto& h : folds.histograms)
    for (std::size_t c = 0; c < 3; ++c) worst = std::max(worst, std::abs(h[c] - total[c] / 5.0));
  return {worst <= 1.0, fmt::format("5 folds over 600 cases, max deviation from ideal {:.1f}", worst)};
}

Outcome svm_oracle() {
  const auto& o = dmwat::testing::oracle()["svm_two_points"];
  fusion::FeatureMatrix two;
  two.append(std::vector<double>{0.0, 0.0});
  two.append(std::vector<double>{4.0, 4.0});
  const std::vector<ReferralDecision> y2{ReferralDecision::continue_treatment, ReferralDecision::change_urgent};
  fusion::SvmModel svm(fusion::SvmConfig{10.0, 500, 0.5, 0});
  svm.fit(two, y2);
  const auto wa = svm.weights(0), wb = svm.weights(2);
  const double dx = wb[0] - wa[0], dy = wb[1] - wa[1];
  const double nx = o["normal"][0].get<double>(), ny = o["normal"][1].get<double>();
  const double angle =
      std::acos(std::clamp((dx * nx + dy * ny) / std::hypot(dx, dy) / std::hypot(nx, ny), -1.0, 1.0)) * 180.0 /
      std::numbers::pi;

  Rng rng(8);
  fusion::FeatureMatrix x;
  std::vector<ReferralDecision> y;
  for (std::size_t i = 0; i < 150; ++i) {
    std::vector<double> row(6);
    for (auto& v : row) v = 1.5 * rng.normal();
    row[i % 3] += 3.0;
    x.append(row);
    y.push_back(decision_from_index(i % 3));
  }
  fusion::SvmModel blob(fusion::SvmConfig{1.0, 200, 1.0, 0});
  blob.fit(x, y);
  double rise = 0.0;
  const auto& h = blob.objective_history();
  for (std::size_t t = 1; t < h.size(); ++t)
    for (std::size_t c = 0; c < 3; ++c) rise = std::max(rise, h[t][c] - h[t - 1][c]);

  double grad_err = 0.0;
  for (std::size_t cls = 0; cls < 3; ++cls) {
    const auto signs = fusion::svm::ovr_signs(y, cls);
    std::vector<double> w(6);
    for (auto& v : w) v = 0.3 * rng.normal();
    const double b = 0.05;
    // Keep to points whose margins sit away from the hinge.
    bool near_kink = false;
    for (std::size_t i = 0; i < x.rows; ++i) {
      double f = b;
      for (std::size_t j = 0; j < 6; ++j) f += w[j] * x.row(i)[j];
      near_kink |= std::abs(1.0 - signs[i] * f) < 1e-4;
    }
    if (near_kink) continue;
    std::vector<double> gw(6);
    double gb = 0.0;
    fusion::svm::subgradient(w, b, x, signs, 1.0, gw, gb);
    const double step = 1e-6;
    for (std::size_t j = 0; j < 6; ++j) {
      auto wp = w, wm = w;
      wp[j] += step;
      wm[j] -= step;
      const double fd =
          (fusion::svm::objective(wp, b, x, signs, 1.0) - fusion::svm::objective(wm, b, x, signs, 1.0)) / (2 * step);
      grad_err = std::max(grad_err, std::abs(fd - gw[j]) / std::max(1.0, std::abs(fd)));
    }
  }
  return {angle < 15.0 && rise <= 1e-6 && grad_err < 1e-4,
          fmt::format("bisector angle {:.2f} deg, max objective rise {:.1e}, subgradient error {:.1e}", angle,
                      std::max(rise, 0.0), grad_err)};
}

Outcome ig_axioms() {
  // Text encoder at the toy defaults, trained as one cross-validation fold would be.
  const auto& ds = dataset_600();
  const std::vector<data::WoundCase> train(ds.cases.begin(), ds.cases.begin() + 480);
  const auto cfg = eval::RunConfig::toy();
  const auto bundle = eval::train_encoders(cfg, ds, train, 11);
  const auto& enc = *bundle.text;

  // Zero attribution when the input is its own baseline.
  const auto probe = text::tokenize(ds.cases[500].note, bundle.vocab, cfg.text.max_len);
  const auto ids = probe.trimmed_ids();
  Tensor xin;
  {
    NoGradGuard g;
    xin = enc.content_embeddings(ids).detach();
  }
  const interpret::ScalarModel f = [&](const Tensor& z) {
    const Tensor logits = enc.class_logits(enc.forward_content(z, ids).hidden);
    return gather(softmax(reshape(logits, {1, kNumClasses}), -1), {2}, {1});
  };
  const auto same = interpret::integrated_gradients(xin, xin, f, 32);
  const bool zero = std::all_of(same.row_scores.begin(), same.row_scores.end(), [](double s) { return s == 0.0; });

  // Linear model closed form.
  Rng rng(9);
  const auto x = random_matrix(8, 5, rng), xb = random_matrix(8, 5, rng), w = random_matrix(8, 5, rng);
  const auto lin = interpret::integrated_gradients(
      x, xb, [&](const Tensor& t) { return add_scalar(sum(mul(t, w)), 1.5); }, 256);
  double lin_err = 0.0;
  for (std::size_t i = 0; i < 8; ++i) {
    double want = 0.0;
    for (std::size_t j = 0; j < 5; ++j) want += (x.at(i, j) - xb.at(i, j)) * w.at(i, j);
    lin_err = std::max(lin_err, std::abs(lin.row_scores[i] - want));
  }

  // Completeness at 256 steps, with an 8192-step reference integral.
  double worst_gap = 0.0, worst_ref = 0.0, ref_gap = 0.0, mean_gap = 0.0;
  std::size_t within = 0;
  for (std::size_t i = 0; i < 20; ++i) {
    const auto& c = ds.cases[500 + i];
    const auto note = text::tokenize(c.note, bundle.vocab, cfg.text.max_len);
    const std::size_t target = class_index(c.dec_final);
    const auto coarse = interpret::integrated_gradients(note, enc, target, 256);
    const auto ref = interpret::integrated_gradients(note, enc, target, 8192);
    double total = 0.0, ref_total = 0.0;
    for (double s : coarse.scores) total += s;
    for (double s : ref.scores) ref_total += s;
    const double delta = std::abs(coarse.f_input - coarse.f_baseline);
    const double gap = coarse.completeness_gap / delta, to_ref = std::abs(total - ref_total) / delta;
    worst_gap = std::max(worst_gap, gap);
    worst_ref = std::max(worst_ref, to_ref);
    ref_gap = std::max(ref_gap, ref.completeness_gap / delta);
    mean_gap += gap / 20.0;
    within += gap <= 0.01 && to_ref <= 0.01;
  }
  return {zero && lin_err <= 1e-9 && within == 20,
          fmt::format("x==x' exact zero: {}, linear error {:.1e}; 20 held-out notes at m=256: {} within 1%, "
                      "worst gap {:.2f}% (mean {:.2f}%), worst distance to m=8192 integral {:.2f}%, "
                      "m=8192 worst gap {:.3f}% of |f(x)-f(x')|",
                      zero ? "yes" : "no", lin_err, within, 100 * worst_gap, 100 * mean_gap, 100 * worst_ref,
                      100 * ref_gap)};
}

Outcome score_cam_checks() {
  const auto t0 = std::clock();
  const auto& cases = synthetic_600();
  const auto cfg = eval::RunConfig::toy();
  std::vector<vision::LabeledImage> train;
  for (const auto& g : cases) train.push_back({&g.image, g.record.dec_final});
  vision::ConvTeacher teacher(cfg.vit.image_size, 31);
  vision::VisionTrainConfig vt;
  vt.batch_size = cfg.batch_size;
  vt.learning_rate = cfg.learning_rate;
  vt.epochs = cfg.teacher_epochs;
  vt.seed = 32;
  vision::train_teacher(teacher, train, vt);
  vision::VisionTransformer vit(cfg.vit, 33);
  vt.epochs = cfg.epochs;
  vt.seed = 34;
  vision::train_vit(vit, teacher, train, vt);
  const auto scorer = [&](const vision::ImageSample& img) { return vit.probabilities(img); };

  // Unseen images from an independently seeded generator run.
  const auto fresh = data::generate_cases(data::GeneratorSpec::with_total(600, 1234));
  std::size_t checked = 0, well_formed = 0, localized = 0, deletion = 0;
  for (std::size_t i = 0; i < fresh.size() && checked < 50; ++i) {
    const auto& g = fresh[i];
    if (g.record.generator->image_grade != 3) continue;
    ++checked;
    const auto baseline = interpret::mean_color_image(g.image);
    const auto map = interpret::score_cam(g.image, vit, 2, cfg.vit.num_layers - 1, baseline);
    const bool nonneg = std::all_of(map.values.begin(), map.values.end(), [](double v) { return v >= 0.0; });
    const double mx = map.max();
    well_formed += nonneg && (mx == 0.0 || std::abs(mx - 1.0) < 1e-12);
    double in = 0.0, out = 0.0;
    std::size_t nin = 0, nout = 0;
    for (std::size_t r = 0; r < map.height; ++r)
      for (std::size_t c = 0; c < map.width; ++c) {
        if (g.record.generator->lesion.contains(static_cast<double>(c), static_cast<double>(r))) {
          in += map.at(r, c);
          ++nin;
        } else {
          out += map.at(r, c);
          ++nout;
        }
      }
    localized += nin > 0 && nout > 0 && in / nin > out / nout;
    const auto d = interpret::deletion_check(g.image, map, scorer, 2, 0.2, baseline, i);
    deletion += d.top_drop > d.random_drop;
  }
  const double secs = cpu_seconds(t0);
  const bool pass = checked == 50 && well_formed == checked && localized >= 40 && deletion >= 40 && secs < 300.0;
  return {pass, fmt::format("{} unseen grade-3 images: well-formed {}, lesion inside > outside {}, "
                            "top-k drop > random-k drop {}, {:.0f} s CPU including training",
                            checked, well_formed, localized, deletion, secs)};
}

eval::RunConfig e2e_config() {
  eval::RunConfig cfg = eval::RunConfig::toy();
  cfg.seed = 7;
  cfg.tta_views = 8;
  return cfg;
}


std::optional<eval::CvReport> first_run;
double first_run_seconds = 0.0;

const eval::CvReport& cv_report() {
  if (!first_run) {
    const auto t0 = std::clock();
    eval::CvOptions opt;
    opt.persist = false;
    first_run = eval::cross_validate(e2e_config(), dataset_600(), opt);
    first_run_seconds = cpu_seconds(t0);
  }
  return *first_run;
}

Outcome fusion_superiority() {
  const auto& r = cv_report();
  using eval::HeadKind;
  using eval::Modality;
  double best_uni = 0.0, worst_fused = 1.0, acc_gap = 0.0;
  for (auto h : {HeadKind::svm, HeadKind::mlp}) {
    best_uni = std::max({best_uni, r.variant(Modality::image, h).f1.mean, r.variant(Modality::text, h).f1.mean});
    worst_fused = std::min(worst_fused, r.variant(Modality::fused, h).f1.mean);
  }
  for (auto m : {Modality::image, Modality::text, Modality::fused})
    acc_gap = std::max(acc_gap, std::abs(r.variant(m, HeadKind::svm).accuracy.mean -
                                         r.variant(m, HeadKind::mlp).accuracy.mean));
  const double margin = 100 * (worst_fused - best_uni);
  return {margin >= 5.0 && 100 * acc_gap <= 3.0 && first_run_seconds < 600.0,
          fmt::format("fused F1 {:.1f} vs best unimodal {:.1f} (+{:.1f} points), max SVM/MLP accuracy gap "
                      "{:.1f} points, {:.0f} s CPU",
                      100 * worst_fused, 100 * best_uni, margin, 100 * acc_gap, first_run_seconds)};
}

Outcome tta_voting() {
  const auto& r = cv_report();
  double worst = 1.0;
  std::string detail;
  for (const auto& v : r.voting) {
    const auto& single = r.variant(v.modality, v.head);
    worst = std::min(worst, v.accuracy.mean - single.accuracy.mean);
    detail += fmt::format("{}+{} {:.1f}->{:.1f}; ", eval::to_string(v.modality), eval::to_string(v.head),
                          100 * single.accuracy.mean, 100 * v.accuracy.mean);
  }
  // One view on a trained fused model must reproduce the plain prediction.
  const auto& ds = dataset_600();
  std::vector<data::WoundCase> train(ds.cases.begin(), ds.cases.begin() + 480);
  const auto model = eval::train_model(e2e_config(), ds, train);
  std::size_t mismatches = 0;
  for (const auto& c : ds.cases) {
    const auto img = eval::case_image(ds, c);
    mismatches += model.predict_tta(img, c.note, 1, hash_string(c.case_id)) != model.predict(img, c.note).label;
  }
  return {!r.voting.empty() && 100 * worst >= -1.0 && mismatches == 0,
          fmt::format("{}worst change {:+.1f} points; n_views=1 mismatches {} of {}", detail, 100 * worst, mismatches,
                      ds.cases.size())};
}

Outcome determinism() {
  const std::string a = eval::report_json(cv_report()).dump(2);
  eval::CvOptions opt;
  opt.persist = false;
  const std::string b = eval::report_json(eval::cross_validate(e2e_config(), dataset_600(), opt)).dump(2);
  return {a == b, fmt::format("two runs with seed 7: {} bytes, identical: {}", a.size(), a == b ? "yes" : "no")};
}

}  // namespace

int main(int argc, char** argv) {
  const std::map<int, std::pair<std::string, std::function<Outcome()>>> criteria{
      {1, {"autodiff soundness", autodiff}},
      {2, {"attention reduction", attention_reduction}},
      {3, {"distillation endpoints", distillation_endpoints}},
      {4, {"augmentation algebra", augmentation_algebra}},
      {5, {"label reconciliation", reconciliation}},
      {6, {"class balancing", table_balancing}},
      {7, {"stratification", stratification}},
      {8, {"svm oracle", svm_oracle}},
      {9, {"integrated gradients axioms", ig_axioms}},
      {10, {"score-cam", score_cam_checks}},
      {11, {"fusion superiority", fusion_superiority}},
      {12, {"tta voting", tta_voting}},
      {13, {"determinism", determinism}},
  };
  std::set<int> selected;
  for (int i = 1; i < argc; ++i) selected.insert(std::stoi(argv[i]));
  if (selected.empty())
    for (const auto& [k, v] : criteria) selected.insert(k);

  int failures = 0;
  for (int k : selected) {
    const auto it = criteria.find(k);
    if (it == criteria.end()) {
      std::fprintf(stderr, "unknown criterion %d\n", k);
      return 2;
    }
    const auto wall = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = it->second.second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - wall).count();
    std::printf("[%s] %d %s: %s (%.1f s)\n", o.pass ? "PASS" : "FAIL", k, it->second.first.c_str(), o.detail.c_str(),
                secs);
    std::fflush(stdout);
    failures += !o.pass;
  }
  return failures == 0 ? 0 : 1;
}
