#include "dmwat/core/checkpoint.hpp"

#include <array>
#include <bit>
#include <cstring>
#include <fstream>

namespace dmwat {

namespace {

constexpr std::array<char, 8> kMagic = {'D', 'M', 'W', 'A', 'T', 'C', 'K', '1'};

void put_u64(std::ostream& os, std::uint64_t v) {
  std::array<unsigned char, 8> b{};
  for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
  os.write(reinterpret_cast<const char*>(b.data()), 8);
}

std::uint64_t get_u64(std::istream& is) {
  std::array<unsigned char, 8> b{};
  if (!is.read(reinterpret_cast<char*>(b.data()), 8)) {
    throw CheckpointError("truncated checkpoint");
  }
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(b[i]) << (8 * i);
  return v;
}

}  // namespace

void save_checkpoint(const std::filesystem::path& path, const ParameterSet& params,
                     const nlohmann::json& config) {
  nlohmann::json header;
  header["format"] = "dmwat-checkpoint";
  header["version"] = 1;
  header["config"] = config;
  header["tensors"] = nlohmann::json::array();
  for (const auto& [name, t] : params.entries()) {
    header["tensors"].push_back({{"name", name}, {"shape", t.shape()}});
  }
  const std::string text = header.dump();

  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw CheckpointError("cannot open checkpoint for writing: " + path.string());
  os.write(kMagic.data(), kMagic.size());
  put_u64(os, text.size());
  os.write(text.data(), static_cast<std::streamsize>(text.size()));
  for (const auto& [name, t] : params.entries()) {
    for (double x : t.values()) put_u64(os, std::bit_cast<std::uint64_t>(x));
  }
  if (!os) throw CheckpointError("write failed: " + path.string());
}

CheckpointContents read_checkpoint(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw CheckpointError("cannot open checkpoint: " + path.string());
  std::array<char, 8> magic{};
  if (!is.read(magic.data(), 8) || magic != kMagic) {
    throw CheckpointError("not a dmwat checkpoint: " + path.string());
  }
  const auto len = get_u64(is);
  std::string text(len, '\0');
  if (!is.read(text.data(), static_cast<std::streamsize>(len))) {
    throw CheckpointError("truncated checkpoint header");
  }
  nlohmann::json header;
  try {
    header = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw CheckpointError(std::string("malformed checkpoint header: ") + e.what());
  }
  if (header.value("format", "") != "dmwat-checkpoint" || header.value("version", 0) != 1) {
    throw CheckpointError("unsupported checkpoint format/version");
  }
  CheckpointContents out;
  out.config = header.value("config", nlohmann::json::object());
  for (const auto& entry : header.at("tensors")) {
    const auto name = entry.at("name").get<std::string>();
    const auto shape = entry.at("shape").get<Shape>();
    std::vector<double> values(shape_numel(shape));
    for (auto& x : values) x = std::bit_cast<double>(get_u64(is));
    out.tensors.add(name, Tensor(shape, std::move(values)));
  }
  return out;
}

nlohmann::json load_checkpoint_into(const std::filesystem::path& path, ParameterSet& params) {
  auto contents = read_checkpoint(path);
  for (auto& [name, t] : params.entries()) {
    if (!contents.tensors.contains(name)) {
      throw CheckpointError("checkpoint is missing tensor " + name);
    }
    const Tensor& src = contents.tensors.at(name);
    if (src.shape() != t.shape()) {
      throw CheckpointError("shape mismatch for " + name + ": " + shape_str(src.shape()) +
                            " vs " + shape_str(t.shape()));
    }
    auto dst = t.values_mut();
    std::copy(src.values().begin(), src.values().end(), dst.begin());
  }
  return contents.config;
}

}  // namespace dmwat
