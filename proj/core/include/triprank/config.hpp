#pragma once

#include <filesystem>
#include <istream>
#include <map>
#include <ostream>
#include <string>

#include "triprank/nn/model.hpp"
#include "triprank/train.hpp"

namespace triprank {

/// Everything one training run reads from its config file.
struct RunConfig {
  nn::ModelConfig model;
  TrainConfig train;

  /// Model and training keys merged; model keys as in ModelConfig::to_entries.
  std::map<std::string, std::string> to_entries() const;
  void validate() const;
};

/// Flat `key = value` text. Blank lines and lines starting with '#' are
/// ignored. Unknown keys, duplicate keys and unparsable values throw ConfigError.
RunConfig parse_run_config(std::istream& in);
/// Builds a config from already split entries. Unknown keys throw unless
/// `ignore_unknown` (checkpoints carry extra bookkeeping keys).
RunConfig run_config_from_entries(const std::map<std::string, std::string>& entries,
                                  bool ignore_unknown = false);
RunConfig load_run_config(const std::filesystem::path& path);
void write_run_config(std::ostream& out, const RunConfig& config);

}  // namespace triprank
