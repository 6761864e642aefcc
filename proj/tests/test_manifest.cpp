#include "lfa/manifest.hpp"

#include <gtest/gtest.h>

#include "lfa/errors.hpp"

namespace lfa {
namespace {

RunManifest sample_manifest() {
  RunManifest m;
  m.dataset = "/data/ratings.tsv";
  m.name = "ml1m_shape";
  m.delimiter = Delimiter::Tab;
  m.split_fraction = 0.8;
  m.split_seed = 17;
  m.output_dir = "/tmp/out";
  m.train.optimizer = Optimizer::Acrslf;
  m.train.rank = 20;
  m.train.reg_strength = 0.02;
  m.train.seed = 4;
  m.train.deterministic = true;
  m.train.cg = {.max_iterations = 25, .rel_tolerance = 0.05};
  m.train.cubic_m = 0.7;
  return m;
}

TEST(Manifest, JsonRoundTrip) {
  const RunManifest m = sample_manifest();
  const RunManifest back = manifest_from_json(manifest_to_json(m));
  EXPECT_EQ(back.dataset, m.dataset);
  EXPECT_EQ(back.name, m.name);
  EXPECT_EQ(back.delimiter, m.delimiter);
  EXPECT_DOUBLE_EQ(back.split_fraction, m.split_fraction);
  EXPECT_EQ(back.split_seed, m.split_seed);
  EXPECT_EQ(back.output_dir, m.output_dir);
  EXPECT_EQ(back.train.optimizer, m.train.optimizer);
  EXPECT_EQ(back.train.rank, m.train.rank);
  EXPECT_EQ(back.train.deterministic, m.train.deterministic);
  EXPECT_EQ(back.train.cg.max_iterations, m.train.cg.max_iterations);
  EXPECT_DOUBLE_EQ(back.train.cg.rel_tolerance, m.train.cg.rel_tolerance);
  ASSERT_TRUE(back.train.cubic_m.has_value());
  EXPECT_DOUBLE_EQ(*back.train.cubic_m, 0.7);
  EXPECT_FALSE(back.train.learning_rate.has_value());
  EXPECT_FALSE(back.train.fixed_damping.has_value());
}

TEST(Manifest, UnsetOptionalsStayAbsentInJson) {
  const std::string text = manifest_to_json(sample_manifest());
  EXPECT_EQ(text.find("learning_rate"), std::string::npos);
  EXPECT_EQ(text.find("gamma"), std::string::npos);
  EXPECT_NE(text.find("cubic_m"), std::string::npos);
}

TEST(Manifest, RejectsGarbageAndMissingFields) {
  EXPECT_THROW(manifest_from_json("not json"), DataError);
  EXPECT_THROW(manifest_from_json("{}"), DataError);
  EXPECT_THROW(manifest_from_json(R"({"dataset": "x", "train": {}})"), DataError);
  EXPECT_THROW(manifest_from_json(R"({"dataset": "x", "train": {"optimizer": "bogus"}})"),
               DataError);
}

TEST(Manifest, SaveLoadFile) {
  const auto path = std::filesystem::temp_directory_path() / "lfa_manifest_test.json";
  const RunManifest m = sample_manifest();
  save_manifest(m, path);
  const RunManifest back = load_manifest(path);
  EXPECT_EQ(back.dataset, m.dataset);
  EXPECT_EQ(manifest_to_json(back), manifest_to_json(m));
  std::filesystem::remove(path);
  EXPECT_THROW(load_manifest(path), DataError);
}

TEST(Manifest, DelimiterNamesRoundTrip) {
  for (const Delimiter d :
       {Delimiter::Auto, Delimiter::Tab, Delimiter::Comma, Delimiter::Whitespace}) {
    EXPECT_EQ(parse_delimiter(delimiter_name(d)), d);
  }
  EXPECT_FALSE(parse_delimiter("pipe").has_value());
}

TEST(Manifest, DatasetStem) {
  EXPECT_EQ(dataset_stem("/a/b/ratings.tsv"), "ratings");
  EXPECT_EQ(dataset_stem("plain"), "plain");
}

}  // namespace
}  // namespace lfa
