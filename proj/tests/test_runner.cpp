#include "lfa/runner.hpp"

#include <gtest/gtest.h>

#include <fstream>
#include <sstream>

#include "lfa/errors.hpp"
#include "support/synthetic.hpp"

namespace lfa {
namespace {

namespace fs = std::filesystem;

class RunnerTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() / ("lfa_runner_" + std::to_string(::getpid()));
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  fs::path write_dataset(const std::string& name, std::int64_t entries, double noise,
                         std::uint64_t seed) {
    testsupport::SyntheticSpec spec;
    spec.num_users = 25;
    spec.num_items = 20;
    spec.num_entries = entries;
    spec.truth_rank = 2;
    spec.noise_sigma = noise;
    spec.seed = seed;
    const auto path = dir_ / name;
    testsupport::write_ratings_file(path, testsupport::make_synthetic_ratings(spec));
    return path;
  }

  RunManifest base_manifest(const fs::path& dataset, const std::string& out_name) {
    RunManifest m;
    m.dataset = dataset.string();
    m.name = dataset_stem(m.dataset);
    m.split_fraction = 0.8;
    m.split_seed = 3;
    m.output_dir = (dir_ / out_name).string();
    m.train.optimizer = Optimizer::Acrslf;
    m.train.rank = 2;
    m.train.max_epochs = 5;
    m.train.patience = 5;
    m.train.seed = 3;
    m.train.deterministic = true;
    m.train.cg = {.max_iterations = 10, .rel_tolerance = 1e-4};
    m.train.cubic_m = 1.0;
    return m;
  }

  static std::string slurp(const fs::path& path) {
    std::ifstream in(path);
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
  }

  fs::path dir_;
};

TEST_F(RunnerTest, StatsLineForSmallMatrices) {
  // Full 2x2 matrix: density 100.00.
  const auto full = dir_ / "full.tsv";
  std::ofstream(full) << "0\t0\t1\n0\t1\t2\n1\t0\t3\n1\t1\t4\n";
  EXPECT_EQ(stats_csv_line(compute_stats(full, Delimiter::Auto)), "full,2,2,4,100.00");

  const auto empty = dir_ / "empty.tsv";
  std::ofstream(empty) << "";
  EXPECT_EQ(stats_csv_line(compute_stats(empty, Delimiter::Auto)), "empty,0,0,0,0.00");

  EXPECT_EQ(stats_csv_line(compute_stats(full, Delimiter::Auto, "renamed")).substr(0, 8),
            "renamed,");
}

TEST_F(RunnerTest, StatsPropagatesFileContext) {
  try {
    compute_stats(dir_ / "missing.tsv", Delimiter::Auto);
    FAIL() << "expected DataError";
  } catch (const DataError& err) {
    EXPECT_NE(std::string(err.what()).find("missing.tsv"), std::string::npos);
  }
}

TEST_F(RunnerTest, TrainWritesAllArtifacts) {
  const auto dataset = write_dataset("train.tsv", 150, 0.1, 21);
  RunManifest manifest = base_manifest(dataset, "run");
  manifest.train.max_epochs = 1;
  const RunSummary summary = run_train(manifest);
  EXPECT_FALSE(summary.failed);
  EXPECT_EQ(summary.epochs_run, 1);

  const fs::path out(manifest.output_dir);
  EXPECT_TRUE(fs::exists(out / "epochs.csv"));
  EXPECT_TRUE(fs::exists(out / "summary.csv"));
  EXPECT_TRUE(fs::exists(out / "manifest.json"));
  EXPECT_TRUE(fs::exists(out / "ids.csv"));

  // --max-epochs 1: exactly one data row after the header.
  const std::string epochs = slurp(out / "epochs.csv");
  EXPECT_EQ(std::count(epochs.begin(), epochs.end(), '\n'), 2);
  EXPECT_EQ(epochs.substr(0, epochs.find('\n')),
            "epoch,rmse,objective,wall_seconds,cg_iters,grad_norm,damping");

  const std::string summary_text = slurp(out / "summary.csv");
  EXPECT_EQ(summary_text.substr(0, summary_text.find('\n')),
            "optimizer,best_rmse,total_seconds,epochs_run,best_epoch");
}

TEST_F(RunnerTest, CsvFieldsParseBack) {
  const auto dataset = write_dataset("csv.tsv", 150, 0.1, 22);
  const RunManifest manifest = base_manifest(dataset, "csv_run");
  run_train(manifest);
  std::ifstream in(fs::path(manifest.output_dir) / "epochs.csv");
  std::string line;
  std::getline(in, line);  // header
  int rows = 0;
  while (std::getline(in, line)) {
    std::stringstream fields(line);
    std::string field;
    int count = 0;
    while (std::getline(fields, field, ',')) {
      EXPECT_NO_THROW((void)std::stod(field)) << line;
      ++count;
    }
    EXPECT_EQ(count, 7) << line;
    ++rows;
  }
  EXPECT_GT(rows, 0);
}

TEST_F(RunnerTest, ReplayReproducesOutputsByteForByte) {
  const auto dataset = write_dataset("replay.tsv", 200, 0.2, 23);
  const RunManifest manifest = base_manifest(dataset, "first");
  run_train(manifest);

  RunManifest replay = load_manifest(fs::path(manifest.output_dir) / "manifest.json");
  replay.output_dir = (dir_ / "second").string();
  run_train(replay);

  EXPECT_EQ(slurp(fs::path(manifest.output_dir) / "epochs.csv"),
            slurp(dir_ / "second" / "epochs.csv"));
  EXPECT_EQ(slurp(fs::path(manifest.output_dir) / "summary.csv"),
            slurp(dir_ / "second" / "summary.csv"));
}

TEST_F(RunnerTest, IdMappingIsPersisted) {
  const auto dataset = dir_ / "ids.tsv";
  std::ofstream(dataset) << "500\t900\t3\n500\t901\t4\n501\t900\t2\n501\t901\t5\n";
  RunManifest manifest = base_manifest(dataset, "ids_run");
  manifest.split_fraction = 0.75;
  manifest.train.rank = 1;
  run_train(manifest);
  const std::string ids = slurp(fs::path(manifest.output_dir) / "ids.csv");
  EXPECT_NE(ids.find("user,0,500"), std::string::npos);
  EXPECT_NE(ids.find("item,1,901"), std::string::npos);
}

TEST_F(RunnerTest, CompareEmitsOneRowPerOptimizer) {
  const auto dataset = write_dataset("compare.tsv", 200, 0.3, 24);
  std::vector<RunManifest> manifests;
  for (const char* name : {"sgd_momentum", "adam", "slf_fixed", "acrslf"}) {
    RunManifest m = base_manifest(dataset, std::string("cmp_") + name);
    m.train.optimizer = *parse_optimizer(name);
    m.train.cubic_m.reset();
    m.train.max_epochs = 3;
    switch (m.train.optimizer) {
      case Optimizer::SgdMomentum:
      case Optimizer::Adam:
        m.train.learning_rate = 0.01;
        break;
      case Optimizer::SlfFixed:
        m.train.fixed_damping = 1.0;
        break;
      case Optimizer::Acrslf:
        m.train.cubic_m = 1.0;
        break;
    }
    apply_defaults(m.train);
    manifests.push_back(m);
  }

  std::ostringstream table;
  const auto rows = run_compare(manifests, table);
  ASSERT_EQ(rows.size(), 4u);
  const std::string text = table.str();
  EXPECT_EQ(text.substr(0, text.find('\n')), "dataset,model,rmse,time_sec,epoch");
  EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 5);
  EXPECT_NE(text.find("acrslf"), std::string::npos);
  EXPECT_NE(text.find("sgd_momentum"), std::string::npos);
}

TEST_F(RunnerTest, CompareRejectsMismatchedSplits) {
  const auto dataset = write_dataset("mismatch.tsv", 150, 0.1, 25);
  RunManifest a = base_manifest(dataset, "a");
  RunManifest b = base_manifest(dataset, "b");
  b.split_seed = 99;
  std::ostringstream sink;
  EXPECT_THROW(run_compare({a, b}, sink), std::invalid_argument);

  b = base_manifest(dataset, "b2");
  b.split_fraction = 0.5;
  EXPECT_THROW(run_compare({a, b}, sink), std::invalid_argument);
}

TEST_F(RunnerTest, TrainRejectsMissingOutputDir) {
  const auto dataset = write_dataset("noout.tsv", 150, 0.1, 26);
  RunManifest manifest = base_manifest(dataset, "x");
  manifest.output_dir.clear();
  EXPECT_THROW(run_train(manifest), std::invalid_argument);
}

}  // namespace
}  // namespace lfa
