#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

namespace dmwat::text {

/// Reserved ids, fixed for every vocabulary.
inline constexpr std::size_t kPadId = 0;
inline constexpr std::size_t kUnkId = 1;
inline constexpr std::size_t kMaskId = 2;
inline constexpr std::size_t kClsId = 3;
inline constexpr std::size_t kNumReserved = 4;

inline constexpr std::string_view kPadToken = "[PAD]";
inline constexpr std::string_view kUnkToken = "[UNK]";
inline constexpr std::string_view kMaskToken = "[MASK]";
inline constexpr std::string_view kClsToken = "[CLS]";

/// Lowercases and splits on whitespace; each punctuation character is its
/// own token.
std::vector<std::string> split_words(std::string_view raw);

/// token -> id map. Ids are contiguous from 0; corpus tokens follow the
/// reserved ones in lexicographic order.
class Vocabulary {
 public:
  Vocabulary();
  static Vocabulary build(const std::vector<std::string>& corpus);
  static Vocabulary from_json(const nlohmann::json& j);
  nlohmann::json to_json() const;
  void save(const std::filesystem::path& path) const;
  static Vocabulary load(const std::filesystem::path& path);

  std::size_t size() const { return tokens_.size(); }
  std::size_t id(std::string_view token) const;  // UNK if absent
  const std::string& token(std::size_t id) const { return tokens_.at(id); }
  bool contains(std::string_view token) const;
  bool is_special(std::size_t id) const { return id < kNumReserved; }

 private:
  std::map<std::string, std::size_t, std::less<>> ids_;
  std::vector<std::string> tokens_;
};

struct ClinicalNote {
  std::string raw_text;
  std::vector<std::size_t> token_ids;  // CLS first, PAD-filled to max_len
  bool empty_input = false;

  /// Ids up to and including the last non-PAD token.
  std::vector<std::size_t> trimmed_ids() const;
  std::size_t content_length() const;  // non-PAD count
};

/// Total: any string yields a valid note of exactly max_len ids.
ClinicalNote tokenize(std::string_view raw, const Vocabulary& vocab, std::size_t max_len);

}  // namespace dmwat::text
