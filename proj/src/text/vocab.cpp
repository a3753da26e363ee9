#include "dmwat/text/vocab.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <set>
#include <stdexcept>

namespace dmwat::text {

std::vector<std::string> split_words(std::string_view raw) {
  std::vector<std::string> out;
  std::string cur;
  auto flush = [&] {
    if (!cur.empty()) out.push_back(std::move(cur));
    cur.clear();
  };
  for (char c : raw) {
    const auto uc = static_cast<unsigned char>(c);
    if (std::isspace(uc)) {
      flush();
    } else if (std::ispunct(uc)) {
      flush();
      out.emplace_back(1, c);
    } else {
      cur.push_back(static_cast<char>(std::tolower(uc)));
    }
  }
  flush();
  return out;
}

Vocabulary::Vocabulary() {
  for (auto t : {kPadToken, kUnkToken, kMaskToken, kClsToken}) {
    ids_.emplace(std::string(t), tokens_.size());
    tokens_.emplace_back(t);
  }
}

Vocabulary Vocabulary::build(const std::vector<std::string>& corpus) {
  std::set<std::string> words;
  for (const auto& line : corpus)
    for (auto& w : split_words(line)) words.insert(std::move(w));
  Vocabulary v;
  for (const auto& w : words) {
    if (v.ids_.count(w)) continue;
    v.ids_.emplace(w, v.tokens_.size());
    v.tokens_.push_back(w);
  }
  return v;
}

Vocabulary Vocabulary::from_json(const nlohmann::json& j) {
  std::vector<std::pair<std::size_t, std::string>> entries;
  for (const auto& [tok, id] : j.items()) entries.emplace_back(id.get<std::size_t>(), tok);
  std::sort(entries.begin(), entries.end());
  Vocabulary v;
  for (std::size_t i = 0; i < entries.size(); ++i) {
    if (entries[i].first != i) throw std::invalid_argument("vocabulary ids are not contiguous");
    if (i < kNumReserved) {
      if (entries[i].second != v.tokens_[i]) {
        throw std::invalid_argument("vocabulary reserved id mismatch at " + std::to_string(i));
      }
      continue;
    }
    v.ids_.emplace(entries[i].second, i);
    v.tokens_.push_back(entries[i].second);
  }
  if (v.tokens_.size() < kNumReserved) throw std::invalid_argument("vocabulary lacks reserved ids");
  return v;
}

nlohmann::json Vocabulary::to_json() const {
  nlohmann::json j = nlohmann::json::object();
  for (std::size_t i = 0; i < tokens_.size(); ++i) j[tokens_[i]] = i;
  return j;
}

void Vocabulary::save(const std::filesystem::path& path) const {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot write vocabulary: " + path.string());
  os << to_json().dump(1) << '\n';
}

Vocabulary Vocabulary::load(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot read vocabulary: " + path.string());
  return from_json(nlohmann::json::parse(is));
}

std::size_t Vocabulary::id(std::string_view token) const {
  const auto it = ids_.find(token);
  return it == ids_.end() ? kUnkId : it->second;
}

bool Vocabulary::contains(std::string_view token) const { return ids_.find(token) != ids_.end(); }

std::vector<std::size_t> ClinicalNote::trimmed_ids() const {
  std::size_t end = token_ids.size();
  while (end > 1 && token_ids[end - 1] == kPadId) --end;
  return {token_ids.begin(), token_ids.begin() + static_cast<long>(end)};
}

std::size_t ClinicalNote::content_length() const {
  return static_cast<std::size_t>(
      std::count_if(token_ids.begin(), token_ids.end(), [](auto id) { return id != kPadId; }));
}

ClinicalNote tokenize(std::string_view raw, const Vocabulary& vocab, std::size_t max_len) {
  if (max_len == 0) throw std::invalid_argument("max_len must be positive");
  ClinicalNote note;
  note.raw_text = std::string(raw);
  note.token_ids.reserve(max_len);
  note.token_ids.push_back(kClsId);
  const auto words = split_words(raw);
  note.empty_input = words.empty();
  for (const auto& w : words) {
    if (note.token_ids.size() >= max_len) break;
    note.token_ids.push_back(vocab.id(w));
  }
  note.token_ids.resize(max_len, kPadId);
  return note;
}

}  // namespace dmwat::text
