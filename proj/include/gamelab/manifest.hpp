#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace gamelab {

inline constexpr const char* kVersion = "0.1.0";

namespace manifest {

uint64_t fnv1a64(const void* data, std::size_t size);
uint64_t fnv1a64_file(const std::string& path);     // throws IoError
std::string file_digest(const std::string& path);   // "fnv1a64:<16 hex>"

struct RunManifest {
  std::string subcommand;
  std::string config_json;  // fully resolved configuration, serialized
  uint64_t seed = 0;
  std::vector<std::string> inputs;
  std::vector<std::string> outputs;
};

// Deterministic JSON (no timestamps): version, seed, config, path digests.
void write(const std::string& path, const RunManifest& m);

}  // namespace manifest
}  // namespace gamelab
