#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "json.hpp"

namespace twfe::cli {

inline constexpr const char* kToolVersion = "0.1.0";
inline constexpr int kSchemaVersion = 1;

struct RunManifest {
  std::string command_line;
  std::string input_digest;  // hex SHA-256 of the input file
  std::optional<std::uint64_t> seed;
  std::string version = kToolVersion;
  std::string timestamp;  // UTC, ISO 8601
};

/// Hex SHA-256 of a file's bytes. Throws IoError.
std::string sha256_file(const std::string& path);
std::string utc_timestamp();
RunManifest make_manifest(int argc, char** argv, const std::string& input_path,
                          std::optional<std::uint64_t> seed);
nlohmann::ordered_json to_json(const RunManifest& m);

}  // namespace twfe::cli
