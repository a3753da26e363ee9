#include "dmwat/eval/config.hpp"

#include <algorithm>
#include <fstream>
#include <set>

namespace dmwat::eval {

const char* to_string(Modality m) {
  switch (m) {
    case Modality::image: return "image";
    case Modality::text: return "text";
    case Modality::fused: return "fused";
  }
  return "?";
}

const char* to_string(HeadKind h) { return h == HeadKind::svm ? "svm" : "mlp"; }

Modality modality_from_string(const std::string& s) {
  if (s == "image") return Modality::image;
  if (s == "text") return Modality::text;
  if (s == "fused") return Modality::fused;
  throw ConfigError("modality must be image, text or fused, got '" + s + "'");
}

HeadKind head_from_string(const std::string& s) {
  if (s == "svm") return HeadKind::svm;
  if (s == "mlp") return HeadKind::mlp;
  throw ConfigError("head must be svm or mlp, got '" + s + "'");
}

RunConfig RunConfig::toy() { return {}; }

std::array<std::size_t, kNumClasses> AugmentPolicy::balance_targets(
    const std::array<std::size_t, kNumClasses>& counts) const {
  std::array<std::size_t, kNumClasses> t;
  if (targets.empty()) {
    t.fill(*std::max_element(counts.begin(), counts.end()));
  } else {
    std::copy(targets.begin(), targets.end(), t.begin());
  }
  return t;
}

RunConfig RunConfig::paper_scale() {
  RunConfig c;
  c.preset = "paper";
  c.epochs = 20;
  c.learning_rate = 1e-6;
  c.vit.image_size = 224;
  c.vit.patch_size = 16;
  c.vit.embed_dim = 768;
  c.vit.num_layers = 12;
  c.vit.num_heads = 12;
  c.vit.mlp_ratio = 4;
  c.text.embed_dim = 768;
  c.text.num_layers = 12;
  c.text.num_heads = 12;
  c.text.max_len = 128;
  c.text.relative_bucket_k = 64;
  c.text.emd_layers = 2;
  c.text.mlp_ratio = 4;
  c.mlp.hidden = 256;
  c.mlp.epochs = 20;
  c.augment.targets = {1950, 1850, 2085};
  return c;
}

void RunConfig::validate(bool check_paths) const {
  if (folds < 2) throw ConfigError("folds must be at least 2");
  if (tta_views < 1) throw ConfigError("tta_views must be at least 1");
  if (epochs == 0) throw ConfigError("epochs must be positive");
  if (batch_size == 0) throw ConfigError("batch_size must be positive");
  if (!(learning_rate > 0.0)) throw ConfigError("learning_rate must be positive");
  for (double p : {augment.mixup_prob, augment.cutmix_prob, augment.erase_prob})
    if (!(p >= 0.0 && p <= 1.0)) throw ConfigError("augmentation probabilities must lie in [0,1]");
  if (!augment.targets.empty() && augment.targets.size() != kNumClasses)
    throw ConfigError("augment.targets needs one count per class");
  if (augment.mixup_prob + augment.cutmix_prob > 1.0) {
    throw ConfigError("mixup_prob + cutmix_prob must not exceed 1");
  }
  try {
    vit.validate();
    text.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  if (!(svm.c >= 0.0)) throw ConfigError("svm.c must be non-negative");
  if (mlp.hidden == 0 || mlp.batch_size == 0) throw ConfigError("mlp sizes must be positive");
  if (check_paths) {
    if (dataset.empty()) throw ConfigError("dataset path is not set");
    if (!std::filesystem::is_regular_file(dataset)) {
      throw ConfigError("dataset file does not exist: " + dataset.string());
    }
  }
}

namespace {

void check_keys(const nlohmann::json& j, const std::set<std::string>& allowed, const std::string& where) {
  if (!j.is_object()) throw ConfigError(where + " must be a JSON object");
  for (const auto& [k, v] : j.items()) {
    if (!allowed.count(k)) throw ConfigError("unknown config key '" + (where.empty() ? k : where + "." + k) + "'");
  }
}

std::set<std::string> keys_of(const nlohmann::json& j) {
  std::set<std::string> s;
  for (const auto& [k, v] : j.items()) s.insert(k);
  return s;
}

}  // namespace

nlohmann::json to_json(const RunConfig& c) {
  nlohmann::json vision = to_json(c.vit);
  vision["teacher_epochs"] = c.teacher_epochs;
  nlohmann::json text = to_json(c.text);
  text["mlm_epochs"] = c.mlm_epochs;
  return {{"preset", c.preset},
          {"seed", c.seed},
          {"dataset", c.dataset.string()},
          {"output_dir", c.output_dir.string()},
          {"folds", c.folds},
          {"head", to_string(c.head)},
          {"modality", to_string(c.modality)},
          {"tta_views", c.tta_views},
          {"averaging", to_string(c.averaging)},
          {"epochs", c.epochs},
          {"learning_rate", c.learning_rate},
          {"batch_size", c.batch_size},
          {"augment",
           {{"balance", c.augment.balance},
            {"targets", c.augment.targets},
            {"text_paraphrases", c.augment.text_paraphrases},
            {"mixup_prob", c.augment.mixup_prob},
            {"cutmix_prob", c.augment.cutmix_prob},
            {"erase_prob", c.augment.erase_prob}}},
          {"fusion", {{"l2_normalize_blocks", c.l2_normalize_blocks}}},
          {"vision", vision},
          {"text", text},
          {"svm", {{"c", c.svm.c}, {"epochs", c.svm.epochs}, {"step_size", c.svm.step_size}}},
          {"mlp",
           {{"hidden", c.mlp.hidden},
            {"epochs", c.mlp.epochs},
            {"batch_size", c.mlp.batch_size},
            {"learning_rate", c.mlp.learning_rate}}}};
}

RunConfig run_config_from_json(const nlohmann::json& user) {
  try {
    if (!user.is_object()) throw ConfigError("config must be a JSON object");
    const std::string preset = user.value("preset", std::string("toy"));
    RunConfig base;
    if (preset == "toy") {
      base = RunConfig::toy();
    } else if (preset == "paper") {
      base = RunConfig::paper_scale();
    } else {
      throw ConfigError("preset must be 'toy' or 'paper', got '" + preset + "'");
    }
    nlohmann::json j = to_json(base);
    for (const char* section : {"augment", "fusion", "vision", "text", "svm", "mlp"})
      if (user.contains(section)) check_keys(user[section], keys_of(j[section]), section);
    check_keys(user, keys_of(j), "");
    j.merge_patch(user);

    RunConfig c;
    c.preset = preset;
    c.seed = j["seed"].get<std::uint64_t>();
    c.dataset = j["dataset"].get<std::string>();
    c.output_dir = j["output_dir"].get<std::string>();
    c.folds = j["folds"].get<std::size_t>();
    c.head = head_from_string(j["head"].get<std::string>());
    c.modality = modality_from_string(j["modality"].get<std::string>());
    c.tta_views = j["tta_views"].get<std::size_t>();
    c.averaging = averaging_from_string(j["averaging"].get<std::string>());
    c.epochs = j["epochs"].get<std::size_t>();
    c.learning_rate = j["learning_rate"].get<double>();
    c.batch_size = j["batch_size"].get<std::size_t>();
    const auto& a = j["augment"];
    c.augment.balance = a["balance"].get<bool>();
    c.augment.targets = a["targets"].get<std::vector<std::size_t>>();
    c.augment.text_paraphrases = a["text_paraphrases"].get<std::size_t>();
    c.augment.mixup_prob = a["mixup_prob"].get<double>();
    c.augment.cutmix_prob = a["cutmix_prob"].get<double>();
    c.augment.erase_prob = a["erase_prob"].get<double>();
    c.l2_normalize_blocks = j["fusion"]["l2_normalize_blocks"].get<bool>();
    c.vit = vision::vit_config_from_json(j["vision"]);
    c.teacher_epochs = j["vision"]["teacher_epochs"].get<std::size_t>();
    c.text = text::text_config_from_json(j["text"]);
    c.mlm_epochs = j["text"]["mlm_epochs"].get<std::size_t>();
    c.svm.c = j["svm"]["c"].get<double>();
    c.svm.epochs = j["svm"]["epochs"].get<std::size_t>();
    c.svm.step_size = j["svm"]["step_size"].get<double>();
    c.mlp.hidden = j["mlp"]["hidden"].get<std::size_t>();
    c.mlp.epochs = j["mlp"]["epochs"].get<std::size_t>();
    c.mlp.batch_size = j["mlp"]["batch_size"].get<std::size_t>();
    c.mlp.learning_rate = j["mlp"]["learning_rate"].get<double>();
    c.validate(false);
    return c;
  } catch (const ConfigError&) {
    throw;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("config value has the wrong type: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
}

RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot open config file: " + path.string());
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(is);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError("malformed config JSON in " + path.string() + ": " + e.what());
  }
  return run_config_from_json(j);
}

std::string canonical_config_example() {
  RunConfig c = RunConfig::toy();
  c.dataset = "data/dataset.jsonl";
  c.output_dir = "runs/cv";
  return to_json(c).dump(2);
}

}  // namespace dmwat::eval
