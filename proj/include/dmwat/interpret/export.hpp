#pragma once

#include <filesystem>

#include <nlohmann/json.hpp>

#include "dmwat/interpret/integrated_gradients.hpp"
#include "dmwat/interpret/score_cam.hpp"

namespace dmwat::interpret {

/// Saliency as a gray image (equal RGB channels), 8-bit PPM.
void write_saliency_ppm(const std::filesystem::path& path, const SaliencyMap& map);
/// Input image with the saliency blended in red, PNG.
void write_saliency_overlay_png(const std::filesystem::path& path, const vision::ImageSample& img,
                                const SaliencyMap& map, double opacity = 0.6);

nlohmann::json to_json(const SaliencyMap& map);
nlohmann::json to_json(const AttributionReport& rep);
void write_attribution_json(const std::filesystem::path& path, const AttributionReport& rep);

/// Self-contained page: supporting tokens (positive score) in green,
/// distracting tokens (negative) in red, intensity by |score|.
std::string attribution_html(const AttributionReport& rep, const std::string& title);
void write_attribution_html(const std::filesystem::path& path, const AttributionReport& rep,
                            const std::string& title);

}  // namespace dmwat::interpret
