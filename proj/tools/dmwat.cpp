// dmwat: synthetic wound-triage data, cross-validation, prediction and
// explanations from the command line.

#include <CLI11.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include <algorithm>
#include <fstream>
#include <iostream>
#include <optional>

#include "dmwat/core/checkpoint.hpp"
#include "dmwat/data/balance.hpp"
#include "dmwat/data/folds.hpp"
#include "dmwat/data/generator.hpp"
#include "dmwat/data/text_augment.hpp"
#include "dmwat/eval/pipeline.hpp"
#include "dmwat/eval/report.hpp"
#include "dmwat/interpret/export.hpp"
#include "dmwat/interpret/integrated_gradients.hpp"
#include "dmwat/interpret/score_cam.hpp"

namespace fs = std::filesystem;
using namespace dmwat;

namespace {

enum Exit : int { kOk = 0, kFailure = 1, kUsage = 2, kBadConfig = 3, kMissingFile = 4, kBadData = 5, kBadCheckpoint = 6 };

struct Common {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out;
  std::string head;
  std::string modality;
  std::optional<std::size_t> tta;
  std::string dataset;
};

void add_common(CLI::App* app, Common& c, bool with_model_flags) {
  app->add_option("--config", c.config, "Run configuration (JSON)");
  app->add_option("--seed", c.seed, "Root seed, overrides the config");
  app->add_option("--out", c.out, "Output location");
  app->add_option("--dataset", c.dataset, "Dataset JSON-Lines file, overrides the config");
  if (with_model_flags) {
    app->add_option("--head", c.head, "Classifier head")->check(CLI::IsMember({"svm", "mlp"}));
    app->add_option("--modality", c.modality, "Input modality")->check(CLI::IsMember({"image", "text", "fused"}));
    app->add_option("--tta", c.tta, "Test-time views for majority voting")->check(CLI::PositiveNumber);
  }
}

eval::RunConfig resolve_config(const Common& c, bool need_dataset) {
  eval::RunConfig cfg = c.config.empty() ? eval::RunConfig::toy() : eval::load_run_config(c.config);
  if (c.seed) cfg.seed = *c.seed;
  if (!c.dataset.empty()) cfg.dataset = c.dataset;
  if (!c.head.empty()) cfg.head = eval::head_from_string(c.head);
  if (!c.modality.empty()) cfg.modality = eval::modality_from_string(c.modality);
  if (c.tta) cfg.tta_views = *c.tta;
  cfg.validate(need_dataset);
  return cfg;
}

std::vector<data::WoundCase> dataset_records(const std::vector<data::GeneratedCase>& cases) {
  std::vector<data::WoundCase> out;
  for (const auto& g : cases) out.push_back(g.record);
  return out;
}

void require_file(const fs::path& p, const std::string& what) {
  if (!fs::is_regular_file(p)) throw std::filesystem::filesystem_error(what + " not found", p, std::make_error_code(std::errc::no_such_file_or_directory));
}

int cmd_gen_data(std::size_t n, const Common& c) {
  const fs::path out = c.out.empty() ? fs::path("data") : fs::path(c.out);
  auto spec = data::GeneratorSpec::with_total(n, c.seed.value_or(7));
  const auto cases = data::generate_cases(spec);
  data::write_dataset(out, cases);
  const auto counts = data::class_counts(dataset_records(cases));
  std::cout << "wrote " << cases.size() << " cases to " << (out / data::kDatasetFileName).string()
            << " (class counts " << counts[0] << "/" << counts[1] << "/" << counts[2] << ")\n";
  return kOk;
}

int cmd_train(const Common& c, std::optional<std::size_t> holdout) {
  const auto cfg = resolve_config(c, true);
  const auto ds = eval::load_dataset(cfg.dataset);
  std::vector<data::WoundCase> train;
  if (holdout) {
    std::vector<data::WoundCase> originals;
    for (const auto& x : ds.cases)
      if (!x.is_synthetic_augment) originals.push_back(x);
    if (*holdout >= cfg.folds) throw eval::ConfigError("--holdout-fold must be below folds");
    const auto folds = data::stratified_kfold(originals, cfg.folds, Rng(cfg.seed).derive("folds").next_u64());
    for (const auto& x : ds.cases)
      if (folds.fold(x) != *holdout) train.push_back(x);
  } else {
    train = ds.cases;
  }
  spdlog::info("training {} / {} on {} cases", eval::to_string(cfg.modality), eval::to_string(cfg.head), train.size());
  const auto model = eval::train_model(cfg, ds, train);
  const fs::path out = c.out.empty() ? cfg.output_dir / "model.ckpt" : fs::path(c.out);
  eval::save_model(out, model);
  std::cout << "saved model to " << out.string() << "\n";
  return kOk;
}

int cmd_evaluate(const Common& c) {
  auto cfg = resolve_config(c, true);
  if (!c.out.empty()) cfg.output_dir = c.out;
  const auto ds = eval::load_dataset(cfg.dataset);
  eval::CvOptions opt;
  opt.progress = [](const std::string& s) { spdlog::info("{}", s); };
  const auto report = eval::cross_validate(cfg, ds, opt);
  eval::write_report(cfg.output_dir, report);
  std::cout << eval::results_table(report);
  std::cout << "metrics written to " << (cfg.output_dir / "metrics.json").string() << "\n";
  return kOk;
}

struct CaseInput {
  std::string id;
  vision::ImageSample image;
  std::string note;
};

CaseInput case_input(const std::string& dataset, const std::string& case_id, const std::string& image,
                     const std::string& note) {
  if (!dataset.empty() && !case_id.empty()) {
    require_file(dataset, "dataset");
    const auto ds = eval::load_dataset(dataset);
    const auto& wc = ds.find(case_id);
    return {wc.case_id, eval::case_image(ds, wc), wc.note};
  }
  if (!image.empty()) {
    require_file(image, "image");
    return {fs::path(image).stem().string(), vision::read_image(image), note};
  }
  throw CLI::ValidationError("case", "give --dataset with --case, or --image with --note");
}

int cmd_predict(const Common& c, const std::string& model_path, const CaseInput& in) {
  require_file(model_path, "model checkpoint");
  const auto model = eval::load_model(model_path);
  const auto p = model.predict(in.image, in.note);
  nlohmann::json j = {{"case_id", in.id},
                      {"modality", eval::to_string(model.modality)},
                      {"head", eval::to_string(model.head_kind)},
                      {"decision", to_int(p.label)},
                      {"scores", p.scores}};
  const std::size_t views = c.tta.value_or(1);
  if (views > 1) {
    const std::uint64_t seed = Rng(c.seed.value_or(model.config.seed)).derive("tta", hash_string(in.id)).next_u64();
    j["tta_views"] = views;
    j["tta_decision"] = to_int(model.predict_tta(in.image, in.note, views, seed));
  }
  std::cout << j.dump() << "\n";
  return kOk;
}

int cmd_explain(const Common& c, const std::string& model_path, const CaseInput& in, std::size_t steps,
                std::optional<std::size_t> layer) {
  require_file(model_path, "model checkpoint");
  const auto model = eval::load_model(model_path);
  const fs::path out = c.out.empty() ? fs::path("explain") / in.id : fs::path(c.out);
  fs::create_directories(out);
  const auto pred = model.predict(in.image, in.note);
  const std::size_t target = class_index(pred.label);

  const auto& vit = *model.encoders.vit;
  const std::size_t l = layer.value_or(vit.config().num_layers - 1);
  if (l >= vit.config().num_layers) throw eval::ConfigError("--layer is out of range");
  const auto map = interpret::score_cam(in.image, vit, target, l, interpret::mean_color_image(in.image));
  interpret::write_saliency_ppm(out / "saliency.ppm", map);
  interpret::write_saliency_overlay_png(out / "overlay.png", in.image, map);
  {
    std::ofstream os(out / "saliency.json");
    os << interpret::to_json(map).dump(2) << "\n";
  }

  const auto& enc = *model.encoders.text;
  const auto note = text::tokenize(in.note, model.encoders.vocab, enc.config().max_len);
  const auto rep = interpret::integrated_gradients(note, enc, target, steps, &model.encoders.vocab);
  interpret::write_attribution_json(out / "attribution.json", rep);
  interpret::write_attribution_html(out / "attribution.html", rep, "Case " + in.id);
  std::cout << "decision " << to_int(pred.label) << ", explanations written to " << out.string() << "\n";
  return kOk;
}

int cmd_augment(const Common& c, std::size_t paraphrases, bool balance, bool remote) {
  const auto cfg = c.config.empty() ? eval::RunConfig::toy() : eval::load_run_config(c.config);
  const fs::path src = !c.dataset.empty() ? fs::path(c.dataset) : cfg.dataset;
  if (src.empty()) throw eval::ConfigError("augment needs --dataset or a config with a dataset");
  require_file(src, "dataset");
  if (c.out.empty()) throw eval::ConfigError("augment needs --out");
  const std::uint64_t seed = c.seed.value_or(7);
  const Rng rng(seed);
  const auto ds = eval::load_dataset(src);
  auto cases = ds.cases;
  if (paraphrases > 0) {
    const auto client = remote ? data::TextAugmentClient::remote_from_environment() : data::TextAugmentClient::offline();
    std::vector<std::string> warnings;
    cases = data::augment_dataset_text(cases, client, paraphrases, rng.derive("text").next_u64(), &warnings);
    if (!warnings.empty()) spdlog::warn("{} paraphrase requests were skipped", warnings.size());
  }
  if (balance) {
    cases = data::balance_upsample(cases, cfg.augment.balance_targets(data::class_counts(cases)),
                                   data::image_recipe_augmentor(), rng.derive("balance").next_u64());
  }
  const fs::path out = c.out;
  fs::create_directories(out / "images");
  for (auto& wc : cases) {
    // Every case gets its own pixels so the output stands alone.
    const auto img = eval::case_image(ds, wc);
    wc.image_path = "images/" + wc.case_id + ".ppm";
    vision::write_image(out / wc.image_path, img);
    wc.image_recipe.reset();
  }
  data::write_jsonl(out / data::kDatasetFileName, cases);
  std::cout << "wrote " << cases.size() << " cases (" << cases.size() - ds.cases.size() << " new) to "
            << (out / data::kDatasetFileName).string() << "\n";
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  spdlog::set_pattern("[%l] %v");
  spdlog::set_default_logger(spdlog::stderr_color_mt("dmwat"));
  CLI::App app{"Multimodal wound-triage toolkit"};
  bool print_config = false;
  app.add_flag("--print-config", print_config, "Print a complete example configuration and exit");

  Common gen, tr, ev, pr, ex, au;
  std::size_t n_cases = 600;
  auto* g = app.add_subcommand("gen-data", "Write a seeded synthetic dataset");
  add_common(g, gen, false);
  g->add_option("--cases", n_cases, "Number of cases")->check(CLI::PositiveNumber);

  std::optional<std::size_t> holdout;
  auto* t = app.add_subcommand("train", "Train encoders and a head, write a checkpoint");
  add_common(t, tr, true);
  t->add_option("--holdout-fold", holdout, "Leave this fold out of training");

  auto* e = app.add_subcommand("evaluate", "Stratified cross-validation with a results table");
  add_common(e, ev, true);

  std::string model_path, case_id, image, note;
  auto* p = app.add_subcommand("predict", "Decision and class scores for one case");
  add_common(p, pr, true);
  p->add_option("--model", model_path, "Model checkpoint")->required();
  p->add_option("--case", case_id, "Case id in --dataset");
  p->add_option("--image", image, "Image file (PPM or PNG)");
  p->add_option("--note", note, "Clinical note text");

  std::size_t steps = 256;
  std::optional<std::size_t> layer;
  auto* x = app.add_subcommand("explain", "Score-CAM saliency and integrated-gradients token attributions");
  add_common(x, ex, false);
  x->add_option("--model", model_path, "Model checkpoint")->required();
  x->add_option("--case", case_id, "Case id in --dataset");
  x->add_option("--image", image, "Image file (PPM or PNG)");
  x->add_option("--note", note, "Clinical note text");
  x->add_option("--steps", steps, "Integrated-gradients path steps")->check(CLI::PositiveNumber);
  x->add_option("--layer", layer, "Transformer block for activation maps (default last)");

  std::size_t paraphrases = 0;
  bool balance = false, remote = false;
  auto* a = app.add_subcommand("augment", "Write an augmented copy of a dataset");
  add_common(a, au, false);
  a->add_option("--text", paraphrases, "Paraphrases per case");
  a->add_flag("--balance", balance, "Upsample classes with image augmentations (to augment.targets, default the largest class)");
  a->add_flag("--remote", remote, "Paraphrase through the endpoint in DMWAT_LLM_URL");

  app.require_subcommand(0, 1);
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& err) {
    return app.exit(err) == 0 ? kOk : kUsage;
  }
  if (print_config) {
    std::cout << eval::canonical_config_example() << "\n";
    return kOk;
  }
  if (app.get_subcommands().empty()) {
    std::cerr << app.help();
    return kUsage;
  }

  try {
    if (g->parsed()) return cmd_gen_data(n_cases, gen);
    if (t->parsed()) return cmd_train(tr, holdout);
    if (e->parsed()) return cmd_evaluate(ev);
    if (p->parsed()) {
      if (!pr.config.empty()) resolve_config(pr, false);
      return cmd_predict(pr, model_path, case_input(pr.dataset, case_id, image, note));
    }
    if (x->parsed()) return cmd_explain(ex, model_path, case_input(ex.dataset, case_id, image, note), steps, layer);
    if (a->parsed()) return cmd_augment(au, paraphrases, balance, remote);
  } catch (const eval::ConfigError& err) {
    std::cerr << "config error: " << err.what() << "\n";
    return kBadConfig;
  } catch (const fs::filesystem_error& err) {
    std::cerr << "missing file: " << err.what() << "\n";
    return kMissingFile;
  } catch (const CheckpointError& err) {
    std::cerr << "bad checkpoint: " << err.what() << "\n";
    return kBadCheckpoint;
  } catch (const data::DatasetError& err) {
    std::cerr << "dataset error: " << err.what() << "\n";
    return kBadData;
  } catch (const vision::ImageError& err) {
    std::cerr << "image error: " << err.what() << "\n";
    return kBadData;
  } catch (const CLI::ValidationError& err) {
    std::cerr << "usage error: " << err.what() << "\n";
    return kUsage;
  } catch (const std::exception& err) {
    std::cerr << "error: " << err.what() << "\n";
    return kFailure;
  }
  return kUsage;
}

