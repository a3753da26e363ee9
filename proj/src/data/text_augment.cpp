#include "dmwat/data/text_augment.hpp"

#include <cctype>
#include <cstdlib>
#include <map>
#include <stdexcept>

#include <httplib.h>
#include <nlohmann/json.hpp>
#include <spdlog/spdlog.h>

#include "dmwat/core/rng.hpp"

namespace dmwat::data {

namespace {

const std::map<std::string, std::vector<std::string>>& synonyms() {
  static const std::map<std::string, std::vector<std::string>> table = {
      {"patient", {"pt", "client"}},
      {"seen", {"evaluated", "assessed"}},
      {"today", {"this visit", "on this date"}},
      {"wound", {"ulcer", "lesion"}},
      {"dressing", {"bandage"}},
      {"changed", {"replaced", "renewed"}},
      {"monitor", {"observe", "keep watching"}},
      {"bed", {"base"}},
      {"edges", {"margins", "borders"}},
      {"noted", {"observed", "documented"}},
      {"present", {"seen", "visible"}},
      {"removed", {"taken down"}},
      {"assessment", {"evaluation", "inspection"}},
      {"visit", {"appointment", "review"}},
      {"review", {"check"}},
      {"covering", {"over"}},
      {"around", {"surrounding"}},
      {"tissue", {"material"}},
  };
  return table;
}

std::vector<std::string> split_sentences(const std::string& note) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : note) {
    cur.push_back(c);
    if (c == '.') {
      const auto b = cur.find_first_not_of(' ');
      if (b != std::string::npos) out.push_back(cur.substr(b));
      cur.clear();
    }
  }
  const auto b = cur.find_first_not_of(' ');
  if (b != std::string::npos) out.push_back(cur.substr(b));
  return out;
}

std::string substitute_words(const std::string& sentence, Rng& rng) {
  std::string out, word;
  auto flush = [&] {
    if (word.empty()) return;
    std::string lower;
    for (char c : word) lower.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    const auto it = synonyms().find(lower);
    if (it != synonyms().end() && rng.bernoulli(0.5)) {
      out += it->second[rng.below(it->second.size())];
    } else {
      out += word;
    }
    word.clear();
  };
  for (char c : sentence) {
    if (std::isalnum(static_cast<unsigned char>(c)) || c == '-') {
      word.push_back(c);
    } else {
      flush();
      out.push_back(c);
    }
  }
  flush();
  return out;
}

struct Endpoint {
  std::string scheme_host_port;
  std::string path;
};

Endpoint split_url(const std::string& url) {
  const auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos) throw std::invalid_argument("endpoint URL lacks a scheme: " + url);
  const auto path_start = url.find('/', scheme_end + 3);
  if (path_start == std::string::npos) return {url, "/"};
  return {url.substr(0, path_start), url.substr(path_start)};
}

std::string reply_text(const nlohmann::json& j) {
  if (j.contains("text") && j["text"].is_string()) return j["text"];
  if (j.contains("output") && j["output"].is_string()) return j["output"];
  if (j.contains("choices") && j["choices"].is_array() && !j["choices"].empty()) {
    const auto& c = j["choices"][0];
    if (c.contains("text") && c["text"].is_string()) return c["text"];
    if (c.contains("message") && c["message"].contains("content")) return c["message"]["content"];
  }
  throw std::runtime_error("reply has no text field");
}

}  // namespace

TextAugmentClient TextAugmentClient::offline() { return {}; }

TextAugmentClient TextAugmentClient::remote_from_environment() {
  TextAugmentClient c;
  c.mode = TextAugmentMode::remote_llm;
  const char* url = std::getenv("DMWAT_LLM_URL");
  if (!url || !*url) throw std::invalid_argument("DMWAT_LLM_URL is not set");
  c.endpoint = url;
  if (const char* tok = std::getenv("DMWAT_LLM_TOKEN")) c.token = tok;
  return c;
}

std::string TextAugmentClient::offline_paraphrase(const std::string& note, Rng& rng) const {
  auto sentences = split_sentences(note);
  // Keep the opener and closer in place; reorder the findings in between.
  if (sentences.size() > 3) rng.shuffle(sentences.begin() + 1, sentences.end() - 1);
  std::string out;
  for (const auto& s : sentences) {
    if (!out.empty()) out.push_back(' ');
    out += substitute_words(s, rng);
  }
  return out;
}

std::string augment_prompt(const std::string& note, const WoundCase& meta) {
  return "Rewrite the following chronic wound assessment note in different words. Keep every "
         "clinical finding and its severity unchanged. Referral category: " +
         std::to_string(to_int(meta.dec_final)) + ". Note: " + note;
}

TextAugmentResult TextAugmentClient::augment(const std::string& note, const WoundCase& meta,
                                             std::size_t n, std::uint64_t seed) const {
  if (n == 0) throw std::invalid_argument("paraphrase count must be at least 1");
  TextAugmentResult res;
  const Rng base = Rng(seed).derive("text-aug", hash_string(meta.case_id));
  if (mode == TextAugmentMode::offline_template) {
    for (std::size_t i = 0; i < n; ++i) {
      Rng rng = base.derive("paraphrase", i);
      res.texts.push_back(offline_paraphrase(note, rng));
    }
    return res;
  }

  Endpoint ep;
  try {
    ep = split_url(endpoint);
  } catch (const std::exception& e) {
    res.warnings.push_back(e.what());
    spdlog::warn("text augmentation skipped for {}: {}", meta.case_id, e.what());
    return res;
  }
  httplib::Client cli(ep.scheme_host_port);
  const auto usec = static_cast<long>(timeout_seconds * 1e6);
  cli.set_connection_timeout(usec / 1000000, usec % 1000000);
  cli.set_read_timeout(usec / 1000000, usec % 1000000);
  if (!token.empty()) cli.set_bearer_token_auth(token);
  const std::string body =
      nlohmann::json{{"prompt", augment_prompt(note, meta)}, {"max_tokens", max_tokens}}.dump();
  for (std::size_t i = 0; i < n; ++i) {
    std::string problem;
    const auto r = cli.Post(ep.path, body, "application/json");
    if (!r) {
      problem = "request failed: " + httplib::to_string(r.error());
    } else if (r->status < 200 || r->status >= 300) {
      problem = "HTTP status " + std::to_string(r->status);
    } else {
      try {
        res.texts.push_back(reply_text(nlohmann::json::parse(r->body)));
        continue;
      } catch (const std::exception& e) {
        problem = std::string("malformed reply: ") + e.what();
      }
    }
    res.warnings.push_back(problem);
    spdlog::warn("text augmentation skipped for {}: {}", meta.case_id, problem);
  }
  return res;
}

std::vector<WoundCase> augment_dataset_text(const std::vector<WoundCase>& cases,
                                            const TextAugmentClient& client, std::size_t n,
                                            std::uint64_t seed, std::vector<std::string>* warnings) {
  std::vector<WoundCase> out = cases;
  for (const auto& c : cases) {
    if (c.is_synthetic_augment) continue;
    const auto res = client.augment(c.note, c, n, seed);
    if (warnings) warnings->insert(warnings->end(), res.warnings.begin(), res.warnings.end());
    for (std::size_t i = 0; i < res.texts.size(); ++i) {
      WoundCase a = c;
      a.case_id = c.case_id + "-txt" + std::to_string(i);
      a.note = res.texts[i];
      a.parent_id = c.case_id;
      a.is_synthetic_augment = true;
      a.provenance = Provenance::text_aug;
      out.push_back(std::move(a));
    }
  }
  return out;
}

}  // namespace dmwat::data
