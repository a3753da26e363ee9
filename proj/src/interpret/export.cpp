#include "dmwat/interpret/export.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "dmwat/vision/image.hpp"

namespace dmwat::interpret {

namespace {

void write_text(const std::filesystem::path& path, const std::string& content) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot write " + path.string());
  os << content;
}

std::string escape_html(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out.push_back(c);
    }
  }
  return out;
}

}  // namespace

void write_saliency_ppm(const std::filesystem::path& path, const SaliencyMap& map) {
  vision::ImageSample img(map.height, map.width);
  for (std::size_t i = 0; i < map.values.size(); ++i)
    for (std::size_t ch = 0; ch < 3; ++ch) img.pixels[i * 3 + ch] = std::clamp(map.values[i], 0.0, 1.0);
  vision::write_ppm(path, img);
}

void write_saliency_overlay_png(const std::filesystem::path& path, const vision::ImageSample& img,
                                const SaliencyMap& map, double opacity) {
  if (img.height != map.height || img.width != map.width) throw ShapeError("overlay size mismatch");
  vision::ImageSample out = img;
  for (std::size_t i = 0; i < map.values.size(); ++i) {
    const double a = opacity * std::clamp(map.values[i], 0.0, 1.0);
    out.pixels[i * 3 + 0] = (1 - a) * img.pixels[i * 3 + 0] + a;
    out.pixels[i * 3 + 1] = (1 - a) * img.pixels[i * 3 + 1];
    out.pixels[i * 3 + 2] = (1 - a) * img.pixels[i * 3 + 2];
  }
  vision::write_png(path, out);
}

nlohmann::json to_json(const SaliencyMap& map) {
  return {{"height", map.height},
          {"width", map.width},
          {"target_class", map.target_class + 1},
          {"channels", map.channels},
          {"channel_weights", map.channel_weights},
          {"values", map.values}};
}

nlohmann::json to_json(const AttributionReport& rep) {
  nlohmann::json tokens = nlohmann::json::array();
  for (std::size_t i = 0; i < rep.tokens.size(); ++i) {
    tokens.push_back({{"token", rep.tokens[i]}, {"score", rep.scores[i]}});
  }
  return {{"target_class", rep.target_class + 1},
          {"steps", rep.steps},
          {"baseline", rep.baseline},
          {"f_input", rep.f_input},
          {"f_baseline", rep.f_baseline},
          {"completeness_gap", rep.completeness_gap},
          {"tokens", tokens}};
}

void write_attribution_json(const std::filesystem::path& path, const AttributionReport& rep) {
  write_text(path, to_json(rep).dump(2) + "\n");
}

std::string attribution_html(const AttributionReport& rep, const std::string& title) {
  double scale = 0.0;
  for (double s : rep.scores) scale = std::max(scale, std::abs(s));
  std::ostringstream os;
  os << "<!DOCTYPE html>\n<html><head><meta charset=\"utf-8\"><title>" << escape_html(title)
     << "</title>\n<style>body{font-family:sans-serif;max-width:48em;margin:2em auto}"
        "span.t{padding:0 2px;border-radius:3px}</style></head><body>\n<h1>"
     << escape_html(title) << "</h1>\n<p>Target class " << rep.target_class + 1
     << ". Green tokens support the prediction, red tokens distract from it.</p>\n<p>";
  for (std::size_t i = 0; i < rep.tokens.size(); ++i) {
    if (rep.tokens[i] == "[PAD]") continue;
    const double s = rep.scores[i];
    const double a = scale > 0 ? std::abs(s) / scale : 0.0;
    char color[64];
    std::snprintf(color, sizeof color, "rgba(%d,%d,0,%.3f)", s < 0 ? 200 : 0, s < 0 ? 0 : 160, a);
    char score[32];
    std::snprintf(score, sizeof score, "%.4g", s);
    os << "<span class=\"t\" style=\"background:" << color << "\" title=\"" << score << "\">"
       << escape_html(rep.tokens[i]) << "</span> ";
  }
  os << "</p>\n<p>f(x) = " << rep.f_input << ", f(baseline) = " << rep.f_baseline
     << ", completeness gap = " << rep.completeness_gap << " (" << rep.steps
     << " steps)</p>\n</body></html>\n";
  return os.str();
}

void write_attribution_html(const std::filesystem::path& path, const AttributionReport& rep,
                            const std::string& title) {
  write_text(path, attribution_html(rep, title));
}

}  // namespace dmwat::interpret
