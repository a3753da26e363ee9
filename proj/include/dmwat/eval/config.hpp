#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "dmwat/eval/metrics.hpp"
#include "dmwat/fusion/mlp.hpp"
#include "dmwat/fusion/svm.hpp"
#include "dmwat/text/encoder.hpp"
#include "dmwat/vision/vit.hpp"

namespace dmwat::eval {

class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

enum class Modality { image, text, fused };
enum class HeadKind { svm, mlp };

const char* to_string(Modality m);
const char* to_string(HeadKind h);
Modality modality_from_string(const std::string& s);
HeadKind head_from_string(const std::string& s);

struct AugmentPolicy {
  bool balance = true;               // upsample each training class
  std::vector<std::size_t> targets;  // per-class counts; empty means the largest class
  std::size_t text_paraphrases = 0;  // offline paraphrases per training original
  double mixup_prob = 0.0;
  double cutmix_prob = 0.0;
  double erase_prob = 0.0;

  std::array<std::size_t, kNumClasses> balance_targets(const std::array<std::size_t, kNumClasses>& counts) const;
};

struct RunConfig {
  std::string preset = "toy";
  std::uint64_t seed = 7;
  std::filesystem::path dataset;  // JSON-Lines file
  std::filesystem::path output_dir = "runs";
  std::size_t folds = 5;
  HeadKind head = HeadKind::svm;
  Modality modality = Modality::fused;
  std::size_t tta_views = 1;
  Averaging averaging = Averaging::macro;
  std::size_t epochs = 6;  // encoder fine-tuning
  double learning_rate = 1e-3;
  std::size_t batch_size = 16;
  AugmentPolicy augment;
  bool l2_normalize_blocks = false;

  vision::VitConfig vit;
  std::size_t teacher_epochs = 10;
  text::TextEncoderConfig text;
  std::size_t mlm_epochs = 2;  // 0 skips pretraining
  fusion::SvmConfig svm;
  fusion::MlpConfig mlp;

  /// Small models sized for a laptop CPU.
  static RunConfig toy();
  /// Base-size encoders, 20 epochs at learning rate 1e-6.
  static RunConfig paper_scale();

  /// Throws ConfigError. With `check_paths`, the dataset file must exist.
  void validate(bool check_paths) const;
};

/// Parses a config document. Keys absent from the document take the value
/// of the chosen "preset" (default "toy"); unknown keys are rejected.
RunConfig run_config_from_json(const nlohmann::json& j);
RunConfig load_run_config(const std::filesystem::path& path);
nlohmann::json to_json(const RunConfig& cfg);

/// Fully spelled-out example accepted by run_config_from_json.
std::string canonical_config_example();

}  // namespace dmwat::eval
