#pragma once

// Checkpoint file layout:
//   bytes 0..7   magic "DMWATCK1"
//   bytes 8..15  header length N, uint64 little-endian
//   next N bytes JSON header: {"format":"dmwat-checkpoint","version":1,
//                "config":{...},"tensors":[{"name":..,"shape":[..]},...]}
//   then one block per header tensor, in header order: product(shape)
//   IEEE-754 binary64 values, little-endian.

#include <filesystem>
#include <string>

#include <nlohmann/json.hpp>

#include "dmwat/core/params.hpp"

namespace dmwat {

class CheckpointError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct CheckpointContents {
  nlohmann::json config;
  ParameterSet tensors;  // fresh leaves, requires_grad = false
};

void save_checkpoint(const std::filesystem::path& path, const ParameterSet& params,
                     const nlohmann::json& config);
CheckpointContents read_checkpoint(const std::filesystem::path& path);

/// Reads a checkpoint and copies tensors into `params` by name; every
/// parameter must be present with the same shape. Returns the config.
nlohmann::json load_checkpoint_into(const std::filesystem::path& path, ParameterSet& params);

}  // namespace dmwat
