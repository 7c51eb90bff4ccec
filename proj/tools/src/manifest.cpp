#include "triprank/cli/manifest.hpp"

#include <fstream>
#include <sstream>

#include "json.hpp"
#include "triprank/error.hpp"
#include "triprank/hash.hpp"

namespace triprank::cli {

using nlohmann::json;

void RunManifest::add_input(const std::filesystem::path& path, std::string key) {
  inputs[key.empty() ? path.string() : key] = to_hex(file_digest(path));
}

void RunManifest::add_output(const std::filesystem::path& path, std::string key) {
  outputs[key.empty() ? path.string() : key] = to_hex(file_digest(path));
}

std::string to_json_text(const RunManifest& m) {
  json j;
  j["command"] = m.command;
  j["config"] = m.config;
  j["seed"] = m.seed;
  j["inputs"] = m.inputs;
  j["outputs"] = m.outputs;
  j["output_dir"] = m.output_dir;
  j["results"] = m.results;
  return j.dump(2) + "\n";
}

RunManifest parse_manifest(const std::string& text) {
  RunManifest m;
  try {
    const json j = json::parse(text);
    m.command = j.at("command").get<std::string>();
    m.config = j.at("config").get<std::map<std::string, std::string>>();
    m.seed = j.at("seed").get<std::uint64_t>();
    m.inputs = j.at("inputs").get<std::map<std::string, std::string>>();
    m.outputs = j.at("outputs").get<std::map<std::string, std::string>>();
    m.output_dir = j.at("output_dir").get<std::string>();
    m.results = j.value("results", std::map<std::string, std::string>{});
  } catch (const json::exception& e) {
    throw InputError(std::string("bad manifest: ") + e.what());
  }
  return m;
}

void write_manifest(const std::filesystem::path& path, const RunManifest& manifest) {
  const auto tmp = std::filesystem::path(path.string() + ".tmp");
  {
    std::ofstream out(tmp, std::ios::binary);
    out << to_json_text(manifest);
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

RunManifest read_manifest(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open manifest " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_manifest(buf.str());
}

void verify_digests(const std::map<std::string, std::string>& digests,
                    const std::filesystem::path& base) {
  for (const auto& [key, digest] : digests) {
    const auto path = base / key;
    if (to_hex(file_digest(path)) != digest)
      throw InputError("digest mismatch for " + path.string() + " (file changed since it was recorded)");
  }
}

}  // namespace triprank::cli
