#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>

namespace triprank::cli {

/// Record of one command execution: what went in, with which settings, and
/// what came out.
struct RunManifest {
  std::string command;
  std::map<std::string, std::string> config;
  std::uint64_t seed = 0;
  /// path -> FNV-1a-64 hex digest at execution time.
  std::map<std::string, std::string> inputs;
  std::map<std::string, std::string> outputs;
  std::string output_dir;
  std::map<std::string, std::string> results;

  /// Records the current digest of `path` under `key` (defaults to the path).
  void add_input(const std::filesystem::path& path, std::string key = {});
  void add_output(const std::filesystem::path& path, std::string key = {});
};

/// Pretty-printed JSON with sorted keys.
std::string to_json_text(const RunManifest& manifest);
RunManifest parse_manifest(const std::string& text);
void write_manifest(const std::filesystem::path& path, const RunManifest& manifest);
RunManifest read_manifest(const std::filesystem::path& path);

/// Throws InputError when a recorded digest no longer matches the file found
/// at `base / key`.
void verify_digests(const std::map<std::string, std::string>& digests,
                    const std::filesystem::path& base);

}  // namespace triprank::cli
