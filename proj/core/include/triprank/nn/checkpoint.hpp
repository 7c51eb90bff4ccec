#pragma once

#include <cstdint>
#include <filesystem>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "triprank/nn/parameters.hpp"
#include "triprank/nn/tensor.hpp"

namespace triprank::nn {

inline constexpr std::string_view kCheckpointMagic = "TRIPRANK1";

/// Layout (all integers little-endian):
///   "TRIPRANK1\n"
///   u64 schema hash
///   u32 length + config text (`key=value` lines)
///   u32 tensor count
///   per tensor: u32 name length, name, u32 rank, u64 dims[rank], f64 values
struct Checkpoint {
  std::uint64_t schema_hash = 0;
  std::map<std::string, std::string> config;
  std::vector<std::pair<std::string, Tensor>> tensors;

  const Tensor* find(const std::string& name) const noexcept;
};

Checkpoint make_checkpoint(std::uint64_t schema_hash, std::map<std::string, std::string> config,
                           const ParameterStore& store);

void write_checkpoint(std::ostream& out, const Checkpoint& checkpoint);
/// Writes to `<path>.tmp` and renames over `path`, so an interrupted write
/// never replaces a complete checkpoint.
void write_checkpoint(const std::filesystem::path& path, const Checkpoint& checkpoint);

/// Throws InputError on a malformed stream and SchemaMismatch when
/// `expected_schema_hash` is given and differs.
Checkpoint read_checkpoint(std::istream& in,
                           std::optional<std::uint64_t> expected_schema_hash = std::nullopt);
Checkpoint read_checkpoint(const std::filesystem::path& path,
                           std::optional<std::uint64_t> expected_schema_hash = std::nullopt);

/// Copies every tensor of the store from the checkpoint. Throws SchemaMismatch
/// for missing names or shape differences.
void load_parameters(const Checkpoint& checkpoint, ParameterStore& store);

std::string config_to_text(const std::map<std::string, std::string>& config);
std::map<std::string, std::string> config_from_text(std::string_view text);

}  // namespace triprank::nn
