#include "../support/models.hpp"

#include <deflab/error.hpp>
#include <deflab/fixtures.hpp>
#include <deflab/tree_io.hpp>

#include <gtest/gtest.h>

#include <filesystem>

using namespace deflab;

namespace {

const char* kBinomial = R"({
  "horizon": 1,
  "asset_dim": 1,
  "nodes": [
    {"id": 0, "time": 0, "parent": null},
    {"id": 1, "time": 1, "parent": 0},
    {"id": 2, "time": 1, "parent": 0}
  ],
  "P": {"1": "1/2", "2": "1/2"},
  "processes": {"S": {"0": ["1"], "1": ["2"], "2": ["1/2"]}}
})";

std::string error_of(const std::string& text) {
  try {
    parse_tree_file(text);
  } catch (const ValidationError& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST(TreeIo, ParsesBinomial) {
  const TreeFile f = parse_tree_file(kBinomial);
  EXPECT_EQ(f.tree.size(), 3u);
  EXPECT_EQ(f.measure().leaf_mass(1), make_rational(1, 2));
  EXPECT_EQ(f.process("S").scalar_at(2), make_rational(1, 2));
  EXPECT_THROW(f.process("Z"), ValidationError);
}

TEST(TreeIo, CanonicalRoundTripIsByteIdentical) {
  for (const auto& name : fixtures::names()) {
    const auto fx = fixtures::make(name);
    if (!fx.file) continue;
    const std::string text = serialize_tree_file(*fx.file);
    EXPECT_EQ(serialize_tree_file(parse_tree_file(text)), text) << name;
  }
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const auto m = testkit::random_model(seed, {3, 3, 2, 4});
    TreeFile f{m.tree, m.P, {{"S", m.S}}, {}};
    const std::string text = serialize_tree_file(f);
    const TreeFile back = parse_tree_file(text);
    EXPECT_EQ(back.process("S"), m.S);
    EXPECT_EQ(serialize_tree_file(back), text);
  }
}

TEST(TreeIo, ErrorsNameTheField) {
  std::string bad = kBinomial;
  bad.replace(bad.find("\"1/2\", \"2\""), 5, "\"0.5\"");
  EXPECT_NE(error_of(bad).find("P"), std::string::npos) << error_of(bad);

  std::string bad_price = kBinomial;
  bad_price.replace(bad_price.find("[\"2\"]"), 5, "[\"2/4\"]");
  EXPECT_NE(error_of(bad_price).find("processes"), std::string::npos) << error_of(bad_price);

  EXPECT_THROW(parse_tree_file("{"), ParseError);
  EXPECT_THROW(parse_tree_file("[]"), ParseError);

  std::string missing_leaf = kBinomial;
  missing_leaf.replace(missing_leaf.find(", \"2\": [\"1/2\"]"), 14, "");
  EXPECT_THROW(parse_tree_file(missing_leaf), ValidationError);
}

TEST(TreeIo, LabelMapRoundTrip) {
  const TreeFile f = parse_tree_file(kBinomial);
  const std::vector<std::string> labels{"up", "down"};
  const std::string text = serialize_label_map(f.tree, labels);
  EXPECT_EQ(parse_label_map(text, f.tree), labels);
  EXPECT_THROW(parse_label_map(R"({"1": "up"})", f.tree), ValidationError);
  EXPECT_THROW(parse_label_map(R"({"0": "up", "1": "x", "2": "y"})", f.tree), ValidationError);
}

TEST(TreeIo, FilesAndIoErrors) {
  const auto dir = std::filesystem::temp_directory_path() / "deflab_tree_io_test";
  std::filesystem::create_directories(dir);
  const std::string path = (dir / "t.json").string();
  write_text_file_atomic(path, kBinomial);
  EXPECT_EQ(read_text_file(path), kBinomial);
  EXPECT_THROW(read_text_file((dir / "missing.json").string()), IoError);
  EXPECT_THROW(write_text_file_atomic((dir / "no" / "such" / "dir.json").string(), "x"), IoError);
  std::filesystem::remove_all(dir);
}
