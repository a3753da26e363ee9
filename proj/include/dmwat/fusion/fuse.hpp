#pragma once

#include <span>
#include <stdexcept>
#include <string>

#include "dmwat/types.hpp"

namespace dmwat::fusion {

class MissingModalityError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct FusedRepresentation {
  EmbeddingVector vector;  // image block, then text block
  std::size_t image_width = 0;
  std::size_t text_width = 0;
  std::string source_id;

  std::span<const double> image_block() const {
    return std::span<const double>(vector.values).first(image_width);
  }
  std::span<const double> text_block() const {
    return std::span<const double>(vector.values).subspan(image_width, text_width);
  }
};

/// Concatenates the image embedding and the text embedding, image first.
/// With `l2_normalize_blocks`, each block is scaled to unit L2 norm first.
FusedRepresentation fuse(const EmbeddingVector& image, const EmbeddingVector& text,
                         bool l2_normalize_blocks = false, std::string source_id = {});

}  // namespace dmwat::fusion
