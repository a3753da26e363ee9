#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

#include "dmwat/core/optim.hpp"
#include "dmwat/core/rng.hpp"
#include "dmwat/text/encoder.hpp"

namespace dmwat::text {

class NothingToPredictError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct TextTrainConfig {
  std::size_t epochs = 8;
  std::size_t batch_size = 16;
  std::size_t max_steps = 0;  // 0 = no cap
  OptimizerKind optimizer = OptimizerKind::adam;
  double learning_rate = 1e-3;
  double grad_clip = 1.0;
  double mask_rate = 0.15;
  std::uint64_t seed = 0;
};

/// One note prepared for masked-token prediction.
struct MaskedNote {
  std::vector<std::size_t> input;      // ids fed to the encoder
  std::vector<std::size_t> positions;  // masked positions
  std::vector<std::size_t> targets;    // original ids at those positions
};

/// Selects each non-special token with probability `rate`; a selected token
/// becomes MASK (80%), a random corpus token (10%) or stays (10%).
MaskedNote mask_tokens(std::span<const std::size_t> ids, std::size_t vocab_size, double rate,
                       Rng& rng);

/// Mean cross-entropy of the original ids at the masked positions.
Tensor mlm_loss(const TextEncoder& enc, const MaskedNote& m);

/// Masked-language-model pretraining. Throws NothingToPredictError when the
/// masking rate selects no targets anywhere in the corpus.
TrainHistory mlm_pretrain(TextEncoder& enc, std::span<const ClinicalNote> corpus,
                          const TextTrainConfig& cfg);

struct LabeledNote {
  const ClinicalNote* note = nullptr;
  ReferralDecision label = ReferralDecision::continue_treatment;
};

/// Fine-tunes encoder and classification head with cross-entropy.
TrainHistory train_text_classifier(TextEncoder& enc, std::span<const LabeledNote> data,
                                   const TextTrainConfig& cfg);

}  // namespace dmwat::text
