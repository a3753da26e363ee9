#include "dmwat/eval/pipeline.hpp"

#include <algorithm>
#include <fstream>
#include <set>

#include "dmwat/core/checkpoint.hpp"
#include "dmwat/core/ops.hpp"
#include "dmwat/data/balance.hpp"
#include "dmwat/data/folds.hpp"
#include "dmwat/data/text_augment.hpp"
#include "dmwat/fusion/fuse.hpp"
#include "dmwat/fusion/mlp.hpp"
#include "dmwat/fusion/svm.hpp"
#include "dmwat/text/train.hpp"
#include "dmwat/vision/augment.hpp"
#include "dmwat/vision/train.hpp"

namespace dmwat::eval {

const data::WoundCase& LoadedDataset::find(const std::string& case_id) const {
  for (const auto& c : cases)
    if (c.case_id == case_id) return c;
  throw data::DatasetError("no case with id " + case_id);
}

LoadedDataset load_dataset(const std::filesystem::path& jsonl) {
  LoadedDataset ds;
  ds.root = jsonl.parent_path();
  ds.cases = data::read_jsonl(jsonl);
  std::map<std::string, const vision::ImageSample*> by_path;
  for (const auto& c : ds.cases) {
    if (c.image_recipe || c.image_path.empty()) continue;
    if (auto it = by_path.find(c.image_path); it != by_path.end()) {
      ds.images.emplace(c.case_id, *it->second);
      continue;
    }
    try {
      auto [pos, ok] = ds.images.emplace(c.case_id, vision::read_image(ds.root / c.image_path));
      by_path.emplace(c.image_path, &pos->second);
    } catch (const vision::ImageError& e) {
      throw data::DatasetError("case " + c.case_id + ": " + e.what());
    }
  }
  return ds;
}

LoadedDataset dataset_from_generated(const std::vector<data::GeneratedCase>& cases) {
  LoadedDataset ds;
  for (const auto& g : cases) {
    ds.cases.push_back(g.record);
    ds.images.emplace(g.record.case_id, g.image);
  }
  return ds;
}

vision::ImageSample case_image(const LoadedDataset& ds, const data::WoundCase& c) {
  auto lookup = [&](const std::string& id) -> const vision::ImageSample* {
    auto it = ds.images.find(id);
    return it == ds.images.end() ? nullptr : &it->second;
  };
  if (c.image_recipe) {
    const vision::ImageSample* base = lookup(c.parent_id);
    if (!base) base = lookup(c.root_id());
    if (!base) throw data::DatasetError("case " + c.case_id + ": parent image is not loaded");
    return vision::augment_image(*base, vision::augment_kind_from_string(c.image_recipe->kind),
                                 c.image_recipe->seed);
  }
  if (const auto* img = lookup(c.case_id)) return *img;
  if (c.is_synthetic_augment) {
    if (const auto* img = lookup(c.parent_id)) return *img;
  }
  throw data::DatasetError("case " + c.case_id + " has no image");
}

EmbeddingVector EncoderBundle::image_embedding(const vision::ImageSample& img) const {
  return vit->embedding(img);
}

EmbeddingVector EncoderBundle::text_embedding(const std::string& note) const {
  return text->encode(text::tokenize(note, vocab, text->config().max_len));
}

ParameterSet EncoderBundle::parameters() const {
  ParameterSet ps;
  ps.extend("teacher.", teacher->parameters());
  ps.extend("vit.", vit->parameters());
  ps.extend("text.", text->parameters());
  return ps;
}

EncoderBundle train_encoders(const RunConfig& cfg, const LoadedDataset& ds,
                             const std::vector<data::WoundCase>& train, std::uint64_t seed) {
  const Rng rng(seed);
  EncoderBundle b;

  std::vector<std::string> corpus;
  for (const auto& c : train) corpus.push_back(c.note);
  b.vocab = text::Vocabulary::build(corpus);

  std::vector<vision::ImageSample> images;
  images.reserve(train.size());
  for (const auto& c : train) images.push_back(case_image(ds, c));
  std::vector<vision::LabeledImage> labeled;
  for (std::size_t i = 0; i < train.size(); ++i) labeled.push_back({&images[i], train[i].dec_final});

  b.teacher = std::make_unique<vision::ConvTeacher>(cfg.vit.image_size,
                                                    rng.derive("teacher_init").next_u64());
  vision::VisionTrainConfig vt;
  vt.batch_size = cfg.batch_size;
  vt.learning_rate = cfg.learning_rate;
  vt.epochs = cfg.teacher_epochs;
  vt.seed = rng.derive("teacher_train").next_u64();
  if (cfg.teacher_epochs > 0) vision::train_teacher(*b.teacher, labeled, vt);

  b.vit = std::make_unique<vision::VisionTransformer>(cfg.vit, rng.derive("vit_init").next_u64());
  vt.epochs = cfg.epochs;
  vt.mixup_prob = cfg.augment.mixup_prob;
  vt.cutmix_prob = cfg.augment.cutmix_prob;
  vt.erase_prob = cfg.augment.erase_prob;
  vt.seed = rng.derive("vit_train").next_u64();
  vision::train_vit(*b.vit, *b.teacher, labeled, vt);

  b.text = std::make_unique<text::TextEncoder>(cfg.text, b.vocab.size(),
                                               rng.derive("text_init").next_u64());
  std::vector<text::ClinicalNote> notes;
  notes.reserve(train.size());
  for (const auto& c : train) notes.push_back(text::tokenize(c.note, b.vocab, cfg.text.max_len));
  text::TextTrainConfig tt;
  tt.batch_size = cfg.batch_size;
  tt.learning_rate = cfg.learning_rate;
  if (cfg.mlm_epochs > 0) {
    tt.epochs = cfg.mlm_epochs;
    tt.seed = rng.derive("mlm").next_u64();
    text::mlm_pretrain(*b.text, notes, tt);
  }
  std::vector<text::LabeledNote> labeled_notes;
  for (std::size_t i = 0; i < train.size(); ++i) labeled_notes.push_back({&notes[i], train[i].dec_final});
  tt.epochs = cfg.epochs;
  tt.seed = rng.derive("text_train").next_u64();
  text::train_text_classifier(*b.text, labeled_notes, tt);
  return b;
}

std::vector<data::WoundCase> augment_training_split(const RunConfig& cfg,
                                                    const std::vector<data::WoundCase>& originals,
                                                    std::uint64_t seed) {
  const Rng rng(seed);
  std::vector<data::WoundCase> out = originals;
  if (cfg.augment.text_paraphrases > 0) {
    std::vector<std::string> warnings;
    out = data::augment_dataset_text(out, data::TextAugmentClient::offline(),
                                     cfg.augment.text_paraphrases, rng.derive("text").next_u64(),
                                     &warnings);
  }
  if (cfg.augment.balance) {
    out = data::balance_upsample(out, cfg.augment.balance_targets(data::class_counts(out)),
                                 data::image_recipe_augmentor(),
                                 rng.derive("balance").next_u64());
  }
  return out;
}

std::vector<double> modality_features(const EmbeddingVector& image, const EmbeddingVector& text,
                                      Modality m, bool l2_normalize_blocks) {
  switch (m) {
    case Modality::image: return image.values;
    case Modality::text: return text.values;
    case Modality::fused: return fusion::fuse(image, text, l2_normalize_blocks).vector.values;
  }
  throw std::logic_error("unknown modality");
}

std::unique_ptr<fusion::ClassifierHead> make_head(HeadKind kind, const RunConfig& cfg,
                                                  std::uint64_t seed) {
  if (kind == HeadKind::svm) {
    fusion::SvmConfig c = cfg.svm;
    c.seed = seed;
    return std::make_unique<fusion::SvmModel>(c);
  }
  fusion::MlpConfig c = cfg.mlp;
  c.seed = seed;
  return std::make_unique<fusion::MlpHead>(c);
}

ReferralDecision majority_vote(std::span<const ReferralDecision> votes) {
  if (votes.empty()) throw std::invalid_argument("majority_vote needs at least one vote");
  std::array<double, kNumClasses> counts{};
  for (auto v : votes) counts[class_index(v)] += 1.0;
  return urgent_argmax(counts);
}

ReferralDecision tta_majority_vote(const vision::ImageSample& img, const ImageDecider& decide,
                                   std::size_t n_views, std::uint64_t seed) {
  if (n_views == 0) throw std::invalid_argument("tta needs at least one view");
  Rng rng(seed);
  std::vector<ReferralDecision> votes{decide(img)};
  for (std::size_t v = 1; v < n_views; ++v) votes.push_back(decide(vision::label_preserving_view(img, rng)));
  return majority_vote(votes);
}

const VariantResult& CvReport::variant(Modality m, HeadKind h, bool vote) const {
  for (const auto& v : vote ? voting : variants)
    if (v.modality == m && v.head == h) return v;
  throw std::out_of_range(std::string("no result for ") + to_string(m) + "/" + to_string(h));
}

namespace {

constexpr Modality kModalities[] = {Modality::image, Modality::text, Modality::fused};
constexpr HeadKind kHeads[] = {HeadKind::svm, HeadKind::mlp};

std::string variant_key(Modality m, HeadKind h) {
  return std::string(to_string(m)) + "/" + to_string(h);
}

std::uint64_t tta_seed(std::uint64_t run_seed, const std::string& case_id) {
  return Rng(run_seed).derive("tta", hash_string(case_id)).next_u64();
}

struct Embedded {
  EmbeddingVector image, text;
};

Embedded embed(const EncoderBundle& b, const LoadedDataset& ds, const data::WoundCase& c) {
  return {b.image_embedding(case_image(ds, c)), b.text_embedding(c.note)};
}

void summarize(VariantResult& v) {
  std::vector<double> a, p, r, f;
  for (const auto& m : v.folds) {
    a.push_back(m.accuracy);
    p.push_back(m.precision);
    r.push_back(m.recall);
    f.push_back(m.f1);
  }
  v.accuracy = mean_std(a);
  v.precision = mean_std(p);
  v.recall = mean_std(r);
  v.f1 = mean_std(f);
}

}  // namespace

CvReport cross_validate(const RunConfig& cfg, const LoadedDataset& ds, const CvOptions& opt) {
  cfg.validate(false);
  auto say = [&](const std::string& s) {
    if (opt.progress) opt.progress(s);
  };
  const Rng root(cfg.seed);
  std::vector<data::WoundCase> originals;
  for (const auto& c : ds.cases)
    if (!c.is_synthetic_augment) originals.push_back(c);
  const auto folds = data::stratified_kfold(originals, cfg.folds, root.derive("folds").next_u64());

  CvReport report;
  report.config = to_json(cfg);
  report.folds = cfg.folds;
  for (auto m : kModalities)
    for (auto h : kHeads) report.variants.push_back({m, h, 1, {}, {}, {}, {}, {}});
  const bool voting = cfg.tta_views > 1;
  if (voting) {
    for (auto m : {Modality::image, Modality::fused})
      for (auto h : kHeads) report.voting.push_back({m, h, cfg.tta_views, {}, {}, {}, {}, {}});
  }

  for (std::size_t f = 0; f < cfg.folds; ++f) {
    const Rng fr = root.derive("fold", f);
    std::vector<data::WoundCase> train_orig, test, carried;
    for (const auto& c : originals) (folds.fold(c) == f ? test : train_orig).push_back(c);
    // Augments already present in the dataset join training only when
    // their original is in a training fold.
    for (const auto& c : ds.cases)
      if (c.is_synthetic_augment && folds.fold(c) != f) carried.push_back(c);
    std::vector<data::WoundCase> train =
        augment_training_split(cfg, train_orig, fr.derive("augment").next_u64());
    train.insert(train.end(), carried.begin(), carried.end());
    data::assert_no_leakage(folds, f, train, test);
    say("fold " + std::to_string(f + 1) + "/" + std::to_string(cfg.folds) + ": " +
        std::to_string(train.size()) + " training cases, " + std::to_string(test.size()) + " test cases");

    EncoderBundle enc = train_encoders(cfg, ds, train, fr.derive("init").next_u64());

    std::vector<Embedded> train_emb, test_emb;
    std::vector<ReferralDecision> y_train, y_test;
    for (const auto& c : train) {
      train_emb.push_back(embed(enc, ds, c));
      y_train.push_back(c.dec_final);
    }
    std::vector<vision::ImageSample> test_images;
    for (const auto& c : test) {
      test_images.push_back(case_image(ds, c));
      test_emb.push_back({enc.image_embedding(test_images.back()), enc.text_embedding(c.note)});
      y_test.push_back(c.dec_final);
    }

    std::vector<CaseOutcome> outcomes(test.size());
    for (std::size_t i = 0; i < test.size(); ++i) {
      outcomes[i].case_id = test[i].case_id;
      outcomes[i].fold = f;
      outcomes[i].label = y_test[i];
    }

    std::size_t vi = 0;
    for (auto m : kModalities) {
      fusion::FeatureMatrix x;
      for (const auto& e : train_emb) x.append(modality_features(e.image, e.text, m, cfg.l2_normalize_blocks));
      for (auto h : kHeads) {
        auto head = make_head(h, cfg, fr.derive("head", vi).next_u64());
        head->fit(x, y_train);
        std::vector<ReferralDecision> preds;
        for (std::size_t i = 0; i < test.size(); ++i) {
          const auto p = head->predict(
              modality_features(test_emb[i].image, test_emb[i].text, m, cfg.l2_normalize_blocks));
          preds.push_back(p.label);
          outcomes[i].predictions[variant_key(m, h)] = p.label;
        }
        report.variants[vi].folds.push_back(compute_metrics(preds, y_test, cfg.averaging));

        if (voting && m != Modality::text) {
          std::vector<ReferralDecision> voted;
          for (std::size_t i = 0; i < test.size(); ++i) {
            const auto& text_emb = test_emb[i].text;
            ImageDecider decide = [&](const vision::ImageSample& view) {
              return head->predict(modality_features(enc.image_embedding(view), text_emb, m,
                                                     cfg.l2_normalize_blocks))
                  .label;
            };
            const auto d = tta_majority_vote(test_images[i], decide, cfg.tta_views,
                                             tta_seed(cfg.seed, test[i].case_id));
            voted.push_back(d);
            outcomes[i].predictions[variant_key(m, h) + "/tta" + std::to_string(cfg.tta_views)] = d;
          }
          for (auto& v : report.voting)
            if (v.modality == m && v.head == h) v.folds.push_back(compute_metrics(voted, y_test, cfg.averaging));
        }
        ++vi;
      }
    }

    if (opt.persist) {
      const auto dir = cfg.output_dir / ("fold_" + std::to_string(f));
      std::filesystem::create_directories(dir);
      save_checkpoint(dir / "encoders.ckpt", enc.parameters(),
                      {{"run_config", to_json(cfg)}, {"fold", f}, {"vocab", enc.vocab.to_json()}});
      std::ofstream os(dir / "predictions.jsonl");
      for (const auto& o : outcomes) {
        nlohmann::json p;
        for (const auto& [k, d] : o.predictions) p[k] = to_int(d);
        os << nlohmann::json{{"case_id", o.case_id}, {"label", to_int(o.label)}, {"predictions", p}}.dump()
           << "\n";
      }
      if (!os) throw std::runtime_error("failed writing " + (dir / "predictions.jsonl").string());
    }
    for (auto& o : outcomes) report.cases.push_back(std::move(o));
  }

  for (auto& v : report.variants) summarize(v);
  for (auto& v : report.voting) summarize(v);
  std::sort(report.cases.begin(), report.cases.end(),
            [](const CaseOutcome& a, const CaseOutcome& b) { return a.case_id < b.case_id; });
  return report;
}

fusion::Prediction TrainedModel::predict(const vision::ImageSample& img, const std::string& note) const {
  EmbeddingVector ie, te;
  if (modality != Modality::text) ie = encoders.image_embedding(img);
  if (modality != Modality::image) te = encoders.text_embedding(note);
  return head->predict(modality_features(ie, te, modality, config.l2_normalize_blocks));
}

ReferralDecision TrainedModel::predict_tta(const vision::ImageSample& img, const std::string& note,
                                           std::size_t n_views, std::uint64_t seed) const {
  if (modality == Modality::text) return predict(img, note).label;
  const EmbeddingVector te = modality == Modality::fused ? encoders.text_embedding(note) : EmbeddingVector{};
  ImageDecider decide = [&](const vision::ImageSample& view) {
    return head->predict(modality_features(encoders.image_embedding(view), te, modality,
                                           config.l2_normalize_blocks))
        .label;
  };
  return tta_majority_vote(img, decide, n_views, seed);
}

TrainedModel train_model(const RunConfig& cfg, const LoadedDataset& ds,
                         const std::vector<data::WoundCase>& train) {
  cfg.validate(false);
  const Rng root(cfg.seed);
  std::vector<data::WoundCase> originals, carried;
  for (const auto& c : train) (c.is_synthetic_augment ? carried : originals).push_back(c);
  std::vector<data::WoundCase> expanded =
      augment_training_split(cfg, originals, root.derive("augment").next_u64());
  expanded.insert(expanded.end(), carried.begin(), carried.end());

  TrainedModel m;
  m.config = cfg;
  m.modality = cfg.modality;
  m.head_kind = cfg.head;
  m.encoders = train_encoders(cfg, ds, expanded, root.derive("init").next_u64());
  fusion::FeatureMatrix x;
  std::vector<ReferralDecision> y;
  for (const auto& c : expanded) {
    const auto e = embed(m.encoders, ds, c);
    x.append(modality_features(e.image, e.text, m.modality, cfg.l2_normalize_blocks));
    y.push_back(c.dec_final);
  }
  m.head = make_head(cfg.head, cfg, root.derive("head").next_u64());
  m.head->fit(x, y);
  return m;
}

void save_model(const std::filesystem::path& path, const TrainedModel& m) {
  ParameterSet ps = m.encoders.parameters();
  ps.extend("head.", m.head->parameters());
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  save_checkpoint(path, ps,
                  {{"run_config", to_json(m.config)},
                   {"vocab", m.encoders.vocab.to_json()},
                   {"modality", to_string(m.modality)},
                   {"head", to_string(m.head_kind)},
                   {"feature_dim", m.head->input_dim()}});
}

TrainedModel load_model(const std::filesystem::path& path) {
  const CheckpointContents contents = read_checkpoint(path);
  const auto& meta = contents.config;
  TrainedModel m;
  try {
    m.config = run_config_from_json(meta.at("run_config"));
    m.encoders.vocab = text::Vocabulary::from_json(meta.at("vocab"));
    m.modality = modality_from_string(meta.at("modality").get<std::string>());
    m.head_kind = head_from_string(meta.at("head").get<std::string>());
  } catch (const nlohmann::json::exception& e) {
    throw CheckpointError(path.string() + " is not a model checkpoint: " + e.what());
  }
  const auto dim = meta.at("feature_dim").get<std::size_t>();
  m.encoders.teacher = std::make_unique<vision::ConvTeacher>(m.config.vit.image_size, 0);
  m.encoders.vit = std::make_unique<vision::VisionTransformer>(m.config.vit, 0);
  m.encoders.text = std::make_unique<text::TextEncoder>(m.config.text, m.encoders.vocab.size(), 0);
  m.head = make_head(m.head_kind, m.config, 0);
  if (auto* svm = dynamic_cast<fusion::SvmModel*>(m.head.get())) {
    svm->set_parameters(std::vector<double>(kNumClasses * dim, 0.0), std::vector<double>(kNumClasses, 0.0));
  } else {
    dynamic_cast<fusion::MlpHead&>(*m.head).initialize(dim);
  }
  ParameterSet ps = m.encoders.parameters();
  ps.extend("head.", m.head->parameters());
  ps.copy_values_from(contents.tensors);
  m.encoders.vit->set_trained(true);
  m.encoders.text->set_trained(true);
  return m;
}

}  // namespace dmwat::eval
