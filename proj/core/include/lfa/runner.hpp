#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "lfa/manifest.hpp"

namespace lfa {

struct DatasetStats {
  std::string name;
  std::int64_t users = 0;
  std::int64_t items = 0;
  std::int64_t known = 0;
  double density_percent = 0.0;
};

DatasetStats compute_stats(const std::filesystem::path& dataset, Delimiter delimiter,
                           const std::string& name_override = {});

// `name,users,items,known,density_percent` with density to two decimals.
std::string stats_csv_line(const DatasetStats& stats);

struct RunSummary {
  std::string optimizer;
  double best_rmse = 0.0;
  double total_seconds = 0.0;
  int epochs_run = 0;
  int best_epoch = 0;
  bool failed = false;
  std::string failure_reason;
  std::filesystem::path run_dir;
};

// Executes one manifest end to end: load, split, train, and write
// epochs.csv, summary.csv, manifest.json, and ids.csv into the manifest's
// output directory.
RunSummary run_train(const RunManifest& manifest);

struct CompareRow {
  std::string dataset;
  std::string model;
  double rmse = 0.0;
  double time_sec = 0.0;
  int epoch = 0;
};

// Runs the manifests sequentially (they must share dataset, split, and
// seed), writes each run's artifacts, and emits a
// `dataset,model,rmse,time_sec,epoch` table. Throws NumericalError if a run
// aborts.
std::vector<CompareRow> run_compare(const std::vector<RunManifest>& manifests,
                                    std::ostream& table_out);

}  // namespace lfa
