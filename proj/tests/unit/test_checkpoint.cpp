#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "oracles.hpp"
#include "triprank/error.hpp"
#include "triprank/nn/checkpoint.hpp"
#include "triprank/nn/model.hpp"

using namespace triprank;
using namespace triprank::nn;
namespace fs = std::filesystem;

namespace {

ModelConfig small_config() {
  ModelConfig c;
  c.city_emb_dim = 4;
  c.country_emb_dim = 3;
  c.affiliate_emb_dim = 2;
  c.trip_len = 4;
  c.model_dim = 8;
  c.n_heads = 2;
  c.n_trip_blocks = 2;
  c.max_candidates = 6;
  return c;
}

fs::path scratch_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("triprank_ckpt_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

}  // namespace

TEST(Checkpoint, StreamRoundTripIsBitExact) {
  RerankerModel model(small_config(), {10, 5, 3}, 42);
  auto config = model.config().to_entries();
  config["note"] = "a b=c";
  const Checkpoint saved = make_checkpoint(0xDEADBEEFCAFEULL, config, model.params());
  std::stringstream buf;
  write_checkpoint(buf, saved);
  const Checkpoint loaded = read_checkpoint(buf, 0xDEADBEEFCAFEULL);
  EXPECT_EQ(loaded.schema_hash, saved.schema_hash);
  EXPECT_EQ(loaded.config, saved.config);
  ASSERT_EQ(loaded.tensors.size(), model.params().size());

  RerankerModel other(ModelConfig::from_entries(loaded.config), {10, 5, 3}, 7);
  load_parameters(loaded, other.params());
  for (const auto& [name, p] : model.params()) EXPECT_EQ(other.params().at(name).value, p.value) << name;
}

TEST(Checkpoint, StartsWithMagic) {
  RerankerModel model(small_config(), {3, 3, 3}, 1);
  std::stringstream buf;
  write_checkpoint(buf, make_checkpoint(1, {}, model.params()));
  EXPECT_EQ(buf.str().substr(0, kCheckpointMagic.size()), kCheckpointMagic);
}

TEST(Checkpoint, SchemaHashMismatch) {
  RerankerModel model(small_config(), {3, 3, 3}, 1);
  std::stringstream buf;
  write_checkpoint(buf, make_checkpoint(11, {}, model.params()));
  EXPECT_THROW(read_checkpoint(buf, 12), SchemaMismatch);
}

TEST(Checkpoint, ShapeOrNameMismatchOnLoad) {
  RerankerModel model(small_config(), {10, 5, 3}, 1);
  const Checkpoint ckpt = make_checkpoint(1, {}, model.params());
  RerankerModel bigger_vocab(small_config(), {11, 5, 3}, 1);
  EXPECT_THROW(load_parameters(ckpt, bigger_vocab.params()), SchemaMismatch);
  ModelConfig deeper = small_config();
  deeper.n_trip_blocks = 3;
  RerankerModel more_blocks(deeper, {10, 5, 3}, 1);
  EXPECT_THROW(load_parameters(ckpt, more_blocks.params()), SchemaMismatch);
}

TEST(Checkpoint, MalformedStreams) {
  std::stringstream wrong_magic("NOTACKPT\n");
  EXPECT_THROW(read_checkpoint(wrong_magic), InputError);
  RerankerModel model(small_config(), {3, 3, 3}, 1);
  std::stringstream buf;
  write_checkpoint(buf, make_checkpoint(1, {}, model.params()));
  const std::string full = buf.str();
  for (const std::size_t cut : {std::size_t{12}, full.size() / 2, full.size() - 1}) {
    std::stringstream truncated(full.substr(0, cut));
    EXPECT_THROW(read_checkpoint(truncated), InputError) << "cut at " << cut;
  }
  EXPECT_THROW(read_checkpoint(fs::path("/nonexistent/dir/x.ckpt")), InputError);
}

TEST(Checkpoint, FileWriteReplacesAtomically) {
  const fs::path dir = scratch_dir("atomic");
  const fs::path path = dir / "best.ckpt";
  RerankerModel first(small_config(), {3, 3, 3}, 1);
  RerankerModel second(small_config(), {3, 3, 3}, 2);
  write_checkpoint(path, make_checkpoint(5, {{"epoch", "1"}}, first.params()));
  write_checkpoint(path, make_checkpoint(5, {{"epoch", "2"}}, second.params()));
  EXPECT_FALSE(fs::exists(dir / "best.ckpt.tmp"));
  const Checkpoint loaded = read_checkpoint(path, 5);
  EXPECT_EQ(loaded.config.at("epoch"), "2");
  EXPECT_EQ(*loaded.find("trip_input.weight"), second.params().at("trip_input.weight").value);
  EXPECT_EQ(loaded.find("missing"), nullptr);

  // An interrupted write leaves only the temp file; the old checkpoint survives.
  { std::ofstream partial(dir / "best.ckpt.tmp", std::ios::binary); partial << "TRIPRANK1\n\x01"; }
  EXPECT_EQ(read_checkpoint(path, 5).config.at("epoch"), "2");
  fs::remove_all(dir);
}

TEST(Checkpoint, ConfigText) {
  const std::map<std::string, std::string> entries = {{"a", "1"}, {"lr", "0.001"}, {"z", ""}};
  EXPECT_EQ(config_from_text(config_to_text(entries)), entries);
}
