#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "dmwat/core/rng.hpp"
#include "dmwat/data/case.hpp"

namespace dmwat::data {

enum class TextAugmentMode { offline_template, remote_llm };

struct TextAugmentResult {
  std::vector<std::string> texts;     // successful paraphrases, in request order
  std::vector<std::string> warnings;  // one per skipped request
};

/// Produces paraphrased clinical notes.
///
/// offline_template: seeded synonym substitution and sentence reordering.
/// Only words listed in the synonym table change, so every other word,
/// including all class-bearing vocabulary, survives verbatim.
///
/// remote_llm: one HTTP POST per paraphrase with body
/// {"prompt": ..., "max_tokens": ...} and bearer auth; the reply is JSON with
/// the text in "text", "output", or choices[0].text / choices[0].message.content.
/// Failures are logged and skipped.
class TextAugmentClient {
 public:
  TextAugmentMode mode = TextAugmentMode::offline_template;
  std::string endpoint;  // http://host[:port]/path
  std::string token;
  double timeout_seconds = 10.0;
  int max_tokens = 96;

  static TextAugmentClient offline();
  /// Reads DMWAT_LLM_URL and DMWAT_LLM_TOKEN; throws if the URL is unset.
  static TextAugmentClient remote_from_environment();

  TextAugmentResult augment(const std::string& note, const WoundCase& meta, std::size_t n,
                            std::uint64_t seed) const;

  std::string offline_paraphrase(const std::string& note, Rng& rng) const;
};

/// Builds the prompt sent to a remote model for one case.
std::string augment_prompt(const std::string& note, const WoundCase& meta);

/// Appends `n` text_aug descendants per original case. Skipped requests
/// leave the input untouched; warnings are returned.
std::vector<WoundCase> augment_dataset_text(const std::vector<WoundCase>& cases,
                                            const TextAugmentClient& client, std::size_t n,
                                            std::uint64_t seed, std::vector<std::string>* warnings);

}  // namespace dmwat::data
