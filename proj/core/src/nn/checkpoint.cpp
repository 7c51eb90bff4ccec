#include "triprank/nn/checkpoint.hpp"

#include <array>
#include <bit>
#include <fstream>
#include <sstream>

#include "triprank/error.hpp"

namespace triprank::nn {

namespace {

template <class T>
void put(std::ostream& out, T value) {
  std::array<char, sizeof(T)> bytes{};
  for (std::size_t i = 0; i < sizeof(T); ++i)
    bytes[i] = static_cast<char>((value >> (8 * i)) & 0xFF);
  out.write(bytes.data(), bytes.size());
}

template <class T>
T get(std::istream& in) {
  std::array<unsigned char, sizeof(T)> bytes{};
  in.read(reinterpret_cast<char*>(bytes.data()), bytes.size());
  if (!in) throw InputError("checkpoint: unexpected end of file");
  T value = 0;
  for (std::size_t i = 0; i < sizeof(T); ++i) value |= static_cast<T>(bytes[i]) << (8 * i);
  return value;
}

std::string get_string(std::istream& in, std::size_t length) {
  if (length > (std::size_t{1} << 30)) throw InputError("checkpoint: implausible string length");
  std::string s(length, '\0');
  in.read(s.data(), static_cast<std::streamsize>(length));
  if (!in) throw InputError("checkpoint: unexpected end of file");
  return s;
}

}  // namespace

const Tensor* Checkpoint::find(const std::string& name) const noexcept {
  for (const auto& [n, t] : tensors)
    if (n == name) return &t;
  return nullptr;
}

std::string config_to_text(const std::map<std::string, std::string>& config) {
  std::string text;
  for (const auto& [k, v] : config) text += k + "=" + v + "\n";
  return text;
}

std::map<std::string, std::string> config_from_text(std::string_view text) {
  std::map<std::string, std::string> out;
  std::istringstream in{std::string(text)};
  std::string line;
  while (std::getline(in, line)) {
    const auto eq = line.find('=');
    if (eq == std::string::npos) continue;
    out[line.substr(0, eq)] = line.substr(eq + 1);
  }
  return out;
}

Checkpoint make_checkpoint(std::uint64_t schema_hash, std::map<std::string, std::string> config,
                           const ParameterStore& store) {
  Checkpoint c{schema_hash, std::move(config), {}};
  for (const auto& [name, p] : store) c.tensors.emplace_back(name, p.value);
  return c;
}

void write_checkpoint(std::ostream& out, const Checkpoint& c) {
  out.write(kCheckpointMagic.data(), static_cast<std::streamsize>(kCheckpointMagic.size()));
  out.put('\n');
  put<std::uint64_t>(out, c.schema_hash);
  const std::string text = config_to_text(c.config);
  put<std::uint32_t>(out, static_cast<std::uint32_t>(text.size()));
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  put<std::uint32_t>(out, static_cast<std::uint32_t>(c.tensors.size()));
  for (const auto& [name, t] : c.tensors) {
    put<std::uint32_t>(out, static_cast<std::uint32_t>(name.size()));
    out.write(name.data(), static_cast<std::streamsize>(name.size()));
    put<std::uint32_t>(out, static_cast<std::uint32_t>(t.rank()));
    for (const auto d : t.shape()) put<std::uint64_t>(out, d);
    for (const double v : t.values()) put<std::uint64_t>(out, std::bit_cast<std::uint64_t>(v));
  }
}

void write_checkpoint(const std::filesystem::path& path, const Checkpoint& checkpoint) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw InputError("cannot write " + tmp.string());
    write_checkpoint(out, checkpoint);
    out.flush();
    if (!out) throw InputError("failed writing " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

Checkpoint read_checkpoint(std::istream& in, std::optional<std::uint64_t> expected_schema_hash) {
  const std::string magic = get_string(in, kCheckpointMagic.size() + 1);
  if (magic.substr(0, kCheckpointMagic.size()) != kCheckpointMagic || magic.back() != '\n')
    throw InputError("checkpoint: bad magic");
  Checkpoint c;
  c.schema_hash = get<std::uint64_t>(in);
  if (expected_schema_hash && *expected_schema_hash != c.schema_hash)
    throw SchemaMismatch("checkpoint schema hash does not match the data schema");
  c.config = config_from_text(get_string(in, get<std::uint32_t>(in)));
  const auto count = get<std::uint32_t>(in);
  for (std::uint32_t i = 0; i < count; ++i) {
    std::string name = get_string(in, get<std::uint32_t>(in));
    const auto rank = get<std::uint32_t>(in);
    if (rank > 8) throw InputError("checkpoint: implausible rank for " + name);
    Shape shape(rank);
    for (auto& d : shape) d = static_cast<std::size_t>(get<std::uint64_t>(in));
    if (element_count(shape) > (std::size_t{1} << 32))
      throw InputError("checkpoint: implausible tensor size for " + name);
    std::vector<double> values(element_count(shape));
    for (auto& v : values) v = std::bit_cast<double>(get<std::uint64_t>(in));
    c.tensors.emplace_back(std::move(name), Tensor(std::move(shape), std::move(values)));
  }
  return c;
}

Checkpoint read_checkpoint(const std::filesystem::path& path,
                           std::optional<std::uint64_t> expected_schema_hash) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot read checkpoint " + path.string());
  return read_checkpoint(in, expected_schema_hash);
}

void load_parameters(const Checkpoint& checkpoint, ParameterStore& store) {
  for (auto& [name, p] : store) {
    const Tensor* t = checkpoint.find(name);
    if (t == nullptr) throw SchemaMismatch("checkpoint lacks parameter '" + name + "'");
    if (!t->same_shape(p.value))
      throw SchemaMismatch("checkpoint parameter '" + name + "' has shape " +
                           to_string(t->shape()) + ", model expects " + to_string(p.value.shape()));
    p.value = *t;
  }
}

}  // namespace triprank::nn
