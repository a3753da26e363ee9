#include "dmwat/fusion/fuse.hpp"

#include <cmath>

#include "dmwat/core/tensor.hpp"

namespace dmwat::fusion {

namespace {

void append_block(std::vector<double>& out, const EmbeddingVector& e, bool normalize,
                  const char* what) {
  if (e.values.empty()) throw MissingModalityError(std::string("missing ") + what + " embedding");
  double sq = 0.0;
  for (double x : e.values) {
    if (!std::isfinite(x)) throw NumericError(std::string("non-finite ") + what + " embedding");
    sq += x * x;
  }
  const double s = normalize && sq > 0.0 ? 1.0 / std::sqrt(sq) : 1.0;
  for (double x : e.values) out.push_back(normalize ? x * s : x);
}

}  // namespace

FusedRepresentation fuse(const EmbeddingVector& image, const EmbeddingVector& text,
                         bool l2_normalize_blocks, std::string source_id) {
  FusedRepresentation f;
  f.vector.values.reserve(image.size() + text.size());
  append_block(f.vector.values, image, l2_normalize_blocks, "image");
  append_block(f.vector.values, text, l2_normalize_blocks, "text");
  f.image_width = image.size();
  f.text_width = text.size();
  f.source_id = std::move(source_id);
  return f;
}

}  // namespace dmwat::fusion
