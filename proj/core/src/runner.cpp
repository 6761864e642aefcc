#include "lfa/runner.hpp"

#include <cinttypes>
#include <cstdio>
#include <fstream>
#include <ostream>
#include <stdexcept>

#include "lfa/errors.hpp"

namespace lfa {

namespace {

std::string format(const char* fmt, double value) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), fmt, value);
  return buf;
}

LoadResult load_dataset(const std::filesystem::path& path, Delimiter delimiter) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open dataset " + path.string());
  try {
    return load_ratings(in, delimiter);
  } catch (const DataError& err) {
    throw DataError(path.string() + ": " + err.what());
  }
}

void write_epochs_csv(const std::filesystem::path& path, const std::vector<EpochRecord>& history) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path.string());
  out << "epoch,rmse,objective,wall_seconds,cg_iters,grad_norm,damping\n";
  for (const EpochRecord& r : history) {
    out << r.epoch << ',' << format("%.17g", r.rmse_eval) << ','
        << format("%.17g", r.objective_train) << ',' << format("%.3f", r.wall_seconds) << ','
        << r.cg_iterations << ',' << format("%.17g", r.gradient_norm) << ','
        << format("%.17g", r.damping_value) << '\n';
  }
}

void write_summary_csv(const std::filesystem::path& path, const RunSummary& summary) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path.string());
  out << "optimizer,best_rmse,total_seconds,epochs_run,best_epoch\n";
  out << summary.optimizer << ',' << format("%.17g", summary.best_rmse) << ','
      << format("%.3f", summary.total_seconds) << ',' << summary.epochs_run << ','
      << summary.best_epoch << '\n';
}

void write_ids_csv(const std::filesystem::path& path, const LoadResult& loaded) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path.string());
  out << "kind,internal,external\n";
  for (std::size_t u = 0; u < loaded.user_ids.size(); ++u) {
    out << "user," << u << ',' << loaded.user_ids[u] << '\n';
  }
  for (std::size_t i = 0; i < loaded.item_ids.size(); ++i) {
    out << "item," << i << ',' << loaded.item_ids[i] << '\n';
  }
}

}  // namespace

DatasetStats compute_stats(const std::filesystem::path& dataset, Delimiter delimiter,
                           const std::string& name_override) {
  const LoadResult loaded = load_dataset(dataset, delimiter);
  DatasetStats stats;
  stats.name = name_override.empty() ? dataset_stem(dataset.string()) : name_override;
  stats.users = loaded.num_users();
  stats.items = loaded.num_items();
  stats.known = static_cast<std::int64_t>(loaded.triples.size());
  const double cells = static_cast<double>(stats.users) * static_cast<double>(stats.items);
  stats.density_percent = cells > 0.0 ? 100.0 * static_cast<double>(stats.known) / cells : 0.0;
  return stats;
}

std::string stats_csv_line(const DatasetStats& stats) {
  char buf[256];
  std::snprintf(buf, sizeof(buf), "%s,%" PRId64 ",%" PRId64 ",%" PRId64 ",%.2f",
                stats.name.c_str(), stats.users, stats.items, stats.known,
                stats.density_percent);
  return buf;
}

RunSummary run_train(const RunManifest& manifest) {
  if (manifest.output_dir.empty()) throw std::invalid_argument("manifest needs an output_dir");
  TrainConfig config = manifest.train;
  apply_defaults(config);
  validate(config);

  const LoadResult loaded = load_dataset(manifest.dataset, manifest.delimiter);
  if (loaded.triples.empty()) throw DataError(manifest.dataset + ": dataset is empty");
  const SplitResult parts = split(loaded.triples, manifest.split_fraction, manifest.split_seed);
  if (parts.test.empty()) {
    throw DataError(manifest.dataset + ": split leaves no evaluation entries");
  }
  const HdiMatrix train_matrix =
      build_matrix(parts.train, loaded.num_users(), loaded.num_items());

  LatentState initial = init_uniform(loaded.num_users(), loaded.num_items(), config.rank,
                                     config.init_hi, config.seed);
  const TrainResult result = train(initial, train_matrix, parts.test, config);

  RunSummary summary;
  summary.optimizer = std::string(optimizer_name(config.optimizer));
  summary.best_rmse = result.best_rmse;
  summary.total_seconds = result.total_seconds;
  summary.epochs_run = result.epochs_run;
  summary.best_epoch = result.best_epoch;
  summary.failed = result.failed;
  summary.failure_reason = result.failure_reason;

  const std::filesystem::path out_dir(manifest.output_dir);
  std::filesystem::create_directories(out_dir);
  summary.run_dir = out_dir;

  RunManifest replay = manifest;
  replay.train = config;  // defaults resolved, so the manifest replays as run
  save_manifest(replay, out_dir / "manifest.json");
  write_epochs_csv(out_dir / "epochs.csv", result.history);
  write_summary_csv(out_dir / "summary.csv", summary);
  write_ids_csv(out_dir / "ids.csv", loaded);
  return summary;
}

std::vector<CompareRow> run_compare(const std::vector<RunManifest>& manifests,
                                    std::ostream& table_out) {
  if (manifests.empty()) throw std::invalid_argument("compare needs at least one manifest");
  const RunManifest& first = manifests.front();
  for (const RunManifest& m : manifests) {
    if (m.dataset != first.dataset || m.delimiter != first.delimiter ||
        m.split_fraction != first.split_fraction || m.split_seed != first.split_seed ||
        m.train.seed != first.train.seed) {
      throw std::invalid_argument("compare manifests must share dataset, split, and seed");
    }
  }

  std::vector<CompareRow> rows;
  rows.reserve(manifests.size());
  for (const RunManifest& m : manifests) {
    const RunSummary summary = run_train(m);
    if (summary.failed) {
      throw NumericalError(std::string(optimizer_name(m.train.optimizer)) +
                           " run aborted: " + summary.failure_reason);
    }
    rows.push_back({m.name, summary.optimizer, summary.best_rmse, summary.total_seconds,
                    summary.epochs_run});
  }

  table_out << "dataset,model,rmse,time_sec,epoch\n";
  for (const CompareRow& row : rows) {
    table_out << row.dataset << ',' << row.model << ',' << format("%.5f", row.rmse) << ','
              << format("%.3f", row.time_sec) << ',' << row.epoch << '\n';
  }
  return rows;
}

}  // namespace lfa
