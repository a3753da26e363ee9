#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <vector>

#include "dmwat/data/case.hpp"
#include "dmwat/data/generator.hpp"
#include "dmwat/eval/config.hpp"
#include "dmwat/eval/metrics.hpp"
#include "dmwat/fusion/head.hpp"
#include "dmwat/text/encoder.hpp"
#include "dmwat/text/vocab.hpp"
#include "dmwat/vision/teacher.hpp"
#include "dmwat/vision/vit.hpp"

namespace dmwat::eval {

/// Cases plus the decoded images of every case that has its own file.
struct LoadedDataset {
  std::filesystem::path root;  // directory holding the dataset file
  std::vector<data::WoundCase> cases;
  std::map<std::string, vision::ImageSample> images;

  const data::WoundCase& find(const std::string& case_id) const;
};

LoadedDataset load_dataset(const std::filesystem::path& jsonl);
LoadedDataset dataset_from_generated(const std::vector<data::GeneratedCase>& cases);

/// Pixels of a case: its own image, or its parent's image with the recorded
/// augmentation recipe applied.
vision::ImageSample case_image(const LoadedDataset& ds, const data::WoundCase& c);

/// Trained encoders and the vocabulary they were trained with.
struct EncoderBundle {
  text::Vocabulary vocab;
  std::unique_ptr<vision::ConvTeacher> teacher;
  std::unique_ptr<vision::VisionTransformer> vit;
  std::unique_ptr<text::TextEncoder> text;

  EmbeddingVector image_embedding(const vision::ImageSample& img) const;
  EmbeddingVector text_embedding(const std::string& note) const;
  ParameterSet parameters() const;  // prefixed "teacher." "vit." "text."
};

/// Builds vocabulary from the training notes, trains the teacher, distils
/// the ViT, optionally MLM-pretrains and then fine-tunes the text encoder.
EncoderBundle train_encoders(const RunConfig& cfg, const LoadedDataset& ds,
                             const std::vector<data::WoundCase>& train, std::uint64_t seed);

/// Expands training originals per the augmentation policy (balancing and
/// text paraphrases). Returned cases carry parent ids.
std::vector<data::WoundCase> augment_training_split(const RunConfig& cfg,
                                                    const std::vector<data::WoundCase>& originals,
                                                    std::uint64_t seed);

std::vector<double> modality_features(const EmbeddingVector& image, const EmbeddingVector& text,
                                      Modality m, bool l2_normalize_blocks);

std::unique_ptr<fusion::ClassifierHead> make_head(HeadKind kind, const RunConfig& cfg,
                                                  std::uint64_t seed);

/// Plurality vote; exact ties go to the more urgent class.
ReferralDecision majority_vote(std::span<const ReferralDecision> votes);

using ImageDecider = std::function<ReferralDecision(const vision::ImageSample&)>;

/// Votes over the original image plus n_views - 1 label-preserving views.
ReferralDecision tta_majority_vote(const vision::ImageSample& img, const ImageDecider& decide,
                                   std::size_t n_views, std::uint64_t seed);

struct VariantResult {
  Modality modality = Modality::fused;
  HeadKind head = HeadKind::svm;
  std::size_t views = 1;
  std::vector<MetricsReport> folds;
  MeanStd accuracy, precision, recall, f1;
};

struct CaseOutcome {
  std::string case_id;
  std::size_t fold = 0;
  ReferralDecision label = ReferralDecision::continue_treatment;
  // Keyed by "<modality>/<head>" and, for voting, "<modality>/<head>/tta<N>".
  std::map<std::string, ReferralDecision> predictions;
};

struct CvReport {
  nlohmann::json config;
  std::size_t folds = 0;
  std::vector<VariantResult> variants;  // single view: image, text, fused x svm, mlp
  std::vector<VariantResult> voting;    // tta_views > 1: image and fused x svm, mlp
  std::vector<CaseOutcome> cases;       // sorted by case id

  const VariantResult& variant(Modality m, HeadKind h, bool voting = false) const;
};

struct CvOptions {
  bool persist = true;  // write per-fold checkpoints and predictions under cfg.output_dir
  std::function<void(const std::string&)> progress;
};

/// Stratified k-fold evaluation on the original cases of `ds`.
CvReport cross_validate(const RunConfig& cfg, const LoadedDataset& ds, const CvOptions& opt = {});

/// A full predictor: encoders plus one head for one modality.
struct TrainedModel {
  RunConfig config;
  EncoderBundle encoders;
  Modality modality = Modality::fused;
  HeadKind head_kind = HeadKind::svm;
  std::unique_ptr<fusion::ClassifierHead> head;

  fusion::Prediction predict(const vision::ImageSample& img, const std::string& note) const;
  ReferralDecision predict_tta(const vision::ImageSample& img, const std::string& note,
                               std::size_t n_views, std::uint64_t seed) const;
};

/// Trains on `train` (augmented per policy) with the configured head and
/// modality.
TrainedModel train_model(const RunConfig& cfg, const LoadedDataset& ds,
                         const std::vector<data::WoundCase>& train);

void save_model(const std::filesystem::path& path, const TrainedModel& m);
TrainedModel load_model(const std::filesystem::path& path);

}  // namespace dmwat::eval
