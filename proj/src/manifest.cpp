#include "gamelab/manifest.hpp"

#include <fstream>
#include <iomanip>
#include <sstream>

#include <nlohmann/json.hpp>

#include "gamelab/errors.hpp"

namespace gamelab::manifest {

uint64_t fnv1a64(const void* data, std::size_t size) {
  const auto* bytes = static_cast<const unsigned char*>(data);
  uint64_t hash = 0xcbf29ce484222325ull;
  for (std::size_t i = 0; i < size; ++i) {
    hash ^= bytes[i];
    hash *= 0x100000001b3ull;
  }
  return hash;
}

uint64_t fnv1a64_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open file for digest: " + path);
  uint64_t hash = 0xcbf29ce484222325ull;
  char chunk[1 << 16];
  while (in.read(chunk, sizeof(chunk)) || in.gcount() > 0) {
    const auto n = static_cast<std::size_t>(in.gcount());
    for (std::size_t i = 0; i < n; ++i) {
      hash ^= static_cast<unsigned char>(chunk[i]);
      hash *= 0x100000001b3ull;
    }
    if (!in) break;
  }
  return hash;
}

std::string file_digest(const std::string& path) {
  std::ostringstream os;
  os << "fnv1a64:" << std::hex << std::setw(16) << std::setfill('0') << fnv1a64_file(path);
  return os.str();
}

void write(const std::string& path, const RunManifest& m) {
  nlohmann::ordered_json j;
  j["tool"] = "gamelab";
  j["version"] = kVersion;
  j["subcommand"] = m.subcommand;
  j["seed"] = m.seed;
  j["config"] = m.config_json.empty() ? nlohmann::json::object()
                                      : nlohmann::json::parse(m.config_json);
  nlohmann::ordered_json inputs = nlohmann::ordered_json::object();
  for (const auto& p : m.inputs) inputs[p] = file_digest(p);
  nlohmann::ordered_json outputs = nlohmann::ordered_json::object();
  for (const auto& p : m.outputs) outputs[p] = file_digest(p);
  j["inputs"] = inputs;
  j["outputs"] = outputs;

  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open manifest for writing: " + path);
  out << j.dump(2) << '\n';
}

}  // namespace gamelab::manifest
