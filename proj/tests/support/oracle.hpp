#pragma once

#include <fstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

namespace dmwat::testing {

// Reference values produced by tests/oracles/derive_oracles.py.
inline const nlohmann::json& oracle() {
  static const nlohmann::json j = [] {
    std::ifstream is(DMWAT_ORACLE_FILE);
    if (!is) throw std::runtime_error("cannot open oracle file " DMWAT_ORACLE_FILE);
    return nlohmann::json::parse(is);
  }();
  return j;
}

}  // namespace dmwat::testing
