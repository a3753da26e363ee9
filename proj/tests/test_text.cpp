#include <doctest.h>

#include <cmath>

#include "dmwat/core/ops.hpp"
#include "dmwat/core/rng.hpp"
#include "dmwat/data/generator.hpp"
#include "dmwat/text/attention.hpp"
#include "dmwat/text/encoder.hpp"
#include "dmwat/text/train.hpp"
#include "dmwat/text/vocab.hpp"
#include "support/oracle.hpp"

using namespace dmwat;
using namespace dmwat::text;

namespace {

Tensor random_matrix(std::size_t r, std::size_t c, Rng& rng) {
  std::vector<double> v(r * c);
  for (auto& x : v) x = rng.normal();
  return Tensor({r, c}, std::move(v));
}

Tensor matrix(const nlohmann::json& rows) {
  std::vector<double> v;
  for (const auto& r : rows)
    for (const auto& x : r) v.push_back(x.get<double>());
  return Tensor({rows.size(), rows[0].size()}, std::move(v));
}

Vocabulary toy_vocab() {
  return Vocabulary::build({"deep wound with slough.", "small clean wound", "wound with pus and slough"});
}

}  // namespace

TEST_SUITE("text") {

TEST_CASE("split_words lowercases and isolates punctuation") {
  const auto w = split_words("Deep, SLOUGHY wound.\tPus!");
  const std::vector<std::string> want{"deep", ",", "sloughy", "wound", ".", "pus", "!"};
  CHECK(w == want);
  CHECK(split_words("   ").empty());
}

TEST_CASE("vocabulary layout") {
  const auto v = toy_vocab();
  CHECK(v.id("[PAD]") == kPadId);
  CHECK(v.id("[CLS]") == kClsId);
  CHECK(v.id("never-seen") == kUnkId);
  CHECK(v.token(kNumReserved) == ".");  // lexicographic after the reserved ids
  CHECK(v.is_special(kMaskId));
  const auto back = Vocabulary::from_json(v.to_json());
  CHECK(back.size() == v.size());
  CHECK_THROWS(Vocabulary::from_json(nlohmann::json::array({"a", "b"})));
}

TEST_CASE("tokenize is total") {
  const auto v = toy_vocab();
  const auto n = tokenize("deep wound", v, 8);
  CHECK(n.token_ids.size() == 8);
  CHECK(n.token_ids[0] == kClsId);
  CHECK(n.content_length() == 3);
  CHECK(n.trimmed_ids().size() == 3);
  const auto e = tokenize("", v, 8);
  CHECK(e.empty_input);
  CHECK(e.token_ids.size() == 8);
  const auto longer = tokenize("wound wound wound wound wound wound wound wound wound wound", v, 8);
  CHECK(longer.content_length() == 8);
}

TEST_CASE("two-token attention matches the closed form") {
  const auto& o = dmwat::testing::oracle()["attention_2token"];
  const auto& in = o["inputs"];
  const auto r = disentangled_attention(matrix(in["qc"]), matrix(in["kc"]), matrix(in["v"]),
                                        matrix(in["qr"]), matrix(in["kr"]), in["k"].get<std::size_t>());
  for (std::size_t i = 0; i < 2; ++i)
    for (std::size_t j = 0; j < 2; ++j)
      CHECK(r.weights.at(i, j) == doctest::Approx(o["weights"][i][j].get<double>()).epsilon(1e-13));
}

TEST_CASE("vectorized attention matches the pairwise reference") {
  Rng rng(2);
  const std::size_t n = 7, dh = 4, k = 3;
  const auto qc = random_matrix(n, dh, rng), kc = random_matrix(n, dh, rng), v = random_matrix(n, dh, rng);
  const auto qr = random_matrix(2 * k + 1, dh, rng), kr = random_matrix(2 * k + 1, dh, rng);
  const bool mask[] = {false, false, true, false, false, true, false};
  const auto fast = disentangled_attention(qc, kc, v, qr, kr, k, mask);
  const auto ref = reference::disentangled_attention(n, dh, qc.values(), kc.values(), v.values(),
                                                     qr.values(), kr.values(), k, mask);
  for (std::size_t i = 0; i < n * n; ++i) CHECK(fast.weights[i] == doctest::Approx(ref.weights[i]).epsilon(1e-12));
  for (std::size_t i = 0; i < n * dh; ++i) CHECK(fast.output[i] == doctest::Approx(ref.output[i]).epsilon(1e-12));
  for (std::size_t i = 0; i < n; ++i) {
    CHECK(fast.weights.at(i, 2) == 0.0);
    CHECK(fast.weights.at(i, 5) == 0.0);
  }
}

TEST_CASE("relative buckets clamp") {
  CHECK(relative_bucket(5, 0, 2) == 4);
  CHECK(relative_bucket(0, 5, 2) == 0);
  CHECK(relative_bucket(3, 3, 2) == 2);
}

TEST_CASE("pad keys are invisible to the encoder") {
  const auto v = toy_vocab();
  TextEncoder enc(TextEncoderConfig{}, v.size(), 3);
  const auto note = tokenize("deep wound with slough", v, 32);
  const auto trimmed = note.trimmed_ids();
  const Tensor full = enc.hidden(note.token_ids);
  const Tensor cut = enc.hidden(trimmed);
  for (std::size_t c = 0; c < 64; ++c) CHECK(full.at(0, c) == doctest::Approx(cut.at(0, c)).epsilon(1e-10));
  CHECK(enc.encode(note).size() == 64);
}

TEST_CASE("absolute positions enter only the final layers") {
  TextEncoderConfig cfg;
  cfg.num_layers = 3;
  cfg.emd_layers = 1;
  TextEncoder enc(cfg, 10, 1);
  CHECK_FALSE(enc.layer_uses_absolute(0));
  CHECK_FALSE(enc.layer_uses_absolute(1));
  CHECK(enc.layer_uses_absolute(2));
}

TEST_CASE("masking rules") {
  Rng rng(4);
  const std::vector<std::size_t> ids{kClsId, 5, 6, 7, 8, 9, kPadId};
  const auto none = mask_tokens(ids, 12, 0.0, rng);
  CHECK(none.positions.empty());
  const auto all = mask_tokens(ids, 12, 1.0, rng);
  CHECK(all.positions.size() == 5);
  for (auto p : all.positions) CHECK_FALSE(p == 0);
  const auto v = toy_vocab();
  TextEncoder enc(TextEncoderConfig{}, v.size(), 3);
  std::vector<ClinicalNote> corpus{tokenize("deep wound", v, 16)};
  TextTrainConfig cfg;
  cfg.mask_rate = 0.0;
  CHECK_THROWS_AS(mlm_pretrain(enc, corpus, cfg), NothingToPredictError);
  CHECK_THROWS_AS(mlm_loss(enc, none), NothingToPredictError);
}

TEST_CASE("mlm pretraining on 200 synthetic notes reduces the loss") {
  Rng rng(11);
  std::vector<std::string> corpus;
  for (int i = 0; i < 200; ++i) corpus.push_back(data::render_note(1 + i % 3, rng));
  const auto v = Vocabulary::build(corpus);
  std::vector<ClinicalNote> notes;
  for (const auto& c : corpus) notes.push_back(tokenize(c, v, 32));
  TextEncoderConfig ec;
  ec.embed_dim = 32;
  ec.num_layers = 2;
  ec.num_heads = 2;
  TextEncoder enc(ec, v.size(), 9);
  TextTrainConfig cfg;
  cfg.epochs = 10;
  cfg.batch_size = 16;
  const auto h = mlm_pretrain(enc, notes, cfg);
  REQUIRE(h.epoch_loss.size() == 10);
  CHECK(h.epoch_loss.back() < 0.7 * h.epoch_loss.front());
}

TEST_CASE("zero relative rows reduce to scaled dot-product attention") {
  Rng rng(12);
  const std::size_t n = 6, dh = 8, k = 2;
  const auto qc = random_matrix(n, dh, rng), kc = random_matrix(n, dh, rng), v = random_matrix(n, dh, rng);
  const Tensor zeros({2 * k + 1, dh});
  const auto a = disentangled_attention(qc, kc, v, zeros, zeros, k);
  const auto b = scaled_dot_attention(qc, kc, v);
  for (std::size_t i = 0; i < n * n; ++i) CHECK(std::abs(a.weights[i] - b.weights[i]) <= 1e-12);
  for (std::size_t i = 0; i < n; ++i) {
    double row = 0.0;
    for (std::size_t j = 0; j < n; ++j) row += a.weights.at(i, j);
    CHECK(std::abs(row - 1.0) <= 1e-9);
  }
}

TEST_CASE("relative terms depend only on offsets") {
  // Shifting every token right by a PAD prefix leaves relative offsets
  // between real tokens unchanged, so their attention pattern is equal.
  Rng rng(13);
  const std::size_t n = 4, dh = 4, k = 3;
  const auto qc = random_matrix(n, dh, rng), kc = random_matrix(n, dh, rng), v = random_matrix(n, dh, rng);
  const auto qr = random_matrix(2 * k + 1, dh, rng), kr = random_matrix(2 * k + 1, dh, rng);
  const auto base = disentangled_attention(qc, kc, v, qr, kr, k);
  const Tensor pad({2, dh});
  const bool mask[] = {true, true, false, false, false, false};
  const auto shifted = disentangled_attention(concat({pad, qc}, 0), concat({pad, kc}, 0),
                                              concat({pad, v}, 0), qr, kr, k, mask);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      CHECK(shifted.weights.at(i + 2, j + 2) == doctest::Approx(base.weights.at(i, j)).epsilon(1e-12));
}

}  // TEST_SUITE
