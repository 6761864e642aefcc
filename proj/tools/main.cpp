#include <cstdio>
#include <exception>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "lfa/errors.hpp"
#include "lfa/manifest.hpp"
#include "lfa/runner.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitNumerical = 3;

struct TrainFlags {
  std::string dataset;
  std::string manifest_path;
  std::string name;
  std::string delimiter = "auto";
  std::string optimizer = "acrslf";
  std::string out_dir;
  double split_fraction = 0.8;
  std::uint64_t seed = 0;
  std::uint64_t split_seed = 0;
  std::int32_t rank = 20;
  double reg_strength = 0.02;
  double init_hi = 0.004;
  int max_epochs = 500;
  int patience = 10;
  double min_improvement = 1e-5;
  int cg_max = 30;
  double cg_tol = 1e-2;
  double lr = 0.0;
  double momentum = 0.0;
  double beta1 = 0.0;
  double beta2 = 0.0;
  double eps = 0.0;
  double gamma = 0.0;
  double cubic_m = 0.0;
  bool deterministic = false;
};

// Adds the shared training flags to a subcommand and returns the option
// handles needed to tell "left at default" from "explicitly given".
struct TrainOptions {
  CLI::Option* lr = nullptr;
  CLI::Option* momentum = nullptr;
  CLI::Option* beta1 = nullptr;
  CLI::Option* beta2 = nullptr;
  CLI::Option* eps = nullptr;
  CLI::Option* gamma = nullptr;
  CLI::Option* cubic_m = nullptr;
  CLI::Option* cg_max = nullptr;
  CLI::Option* cg_tol = nullptr;
  CLI::Option* split_seed = nullptr;
};

TrainOptions add_train_flags(CLI::App* cmd, TrainFlags& flags) {
  TrainOptions opts;
  cmd->add_option("--delimiter", flags.delimiter, "Field delimiter: auto, tab, comma, space")
      ->check(CLI::IsMember({"auto", "tab", "comma", "space"}));
  cmd->add_option("--split", flags.split_fraction, "Training fraction in (0, 1)");
  cmd->add_option("--seed", flags.seed, "Seed for initialization and entry shuffles");
  opts.split_seed = cmd->add_option("--split-seed", flags.split_seed,
                                    "Seed for the train/test split (defaults to --seed)");
  cmd->add_option("--f", flags.rank, "Latent dimension f");
  cmd->add_option("--lambda", flags.reg_strength, "Regularization strength");
  cmd->add_option("--init-hi", flags.init_hi, "Upper bound of the uniform initialization");
  cmd->add_option("--max-epochs", flags.max_epochs, "Maximum training epochs");
  cmd->add_option("--patience", flags.patience, "Early-stopping patience in epochs");
  cmd->add_option("--min-improvement", flags.min_improvement,
                  "RMSE improvement that resets the patience counter");
  opts.cg_max = cmd->add_option("--cg-max", flags.cg_max, "CG iteration cap (second order)");
  opts.cg_tol = cmd->add_option("--cg-tol", flags.cg_tol,
                                "CG relative residual tolerance (second order)");
  opts.lr = cmd->add_option("--lr", flags.lr, "Learning rate (first order)");
  opts.momentum = cmd->add_option("--momentum", flags.momentum, "Momentum beta (sgd_momentum)");
  opts.beta1 = cmd->add_option("--beta1", flags.beta1, "Adam beta1");
  opts.beta2 = cmd->add_option("--beta2", flags.beta2, "Adam beta2");
  opts.eps = cmd->add_option("--eps", flags.eps, "Adam epsilon");
  opts.gamma = cmd->add_option("--gamma", flags.gamma, "Fixed damping (slf_fixed)");
  opts.cubic_m = cmd->add_option("--cubic-m", flags.cubic_m,
                                 "Cubic coefficient M (acrslf, default 1.0)");
  cmd->add_flag("--deterministic", flags.deterministic,
                "Zero wall-clock fields so outputs are byte-comparable");
  cmd->add_option("--name", flags.name, "Dataset label in reports (defaults to file stem)");
  return opts;
}

// strict = reject flags that do not apply to the optimizer (single train);
// !strict = silently keep only the applicable ones (compare shares one flag
// set across several optimizers).
lfa::RunManifest manifest_from_flags(const TrainFlags& flags, const TrainOptions& opts,
                                     const std::string& optimizer, const std::string& out_dir,
                                     bool strict) {
  lfa::RunManifest manifest;
  manifest.dataset = flags.dataset;
  manifest.name = flags.name.empty() ? lfa::dataset_stem(flags.dataset) : flags.name;
  const auto delim = lfa::parse_delimiter(flags.delimiter);
  if (!delim) throw std::invalid_argument("unknown delimiter '" + flags.delimiter + "'");
  manifest.delimiter = *delim;
  manifest.split_fraction = flags.split_fraction;
  manifest.split_seed = opts.split_seed->count() > 0 ? flags.split_seed : flags.seed;
  manifest.output_dir = out_dir;

  lfa::TrainConfig& t = manifest.train;
  const auto opt = lfa::parse_optimizer(optimizer);
  if (!opt) {
    throw std::invalid_argument("unknown optimizer '" + optimizer +
                                "' (expected sgd_momentum, adam, slf_fixed, or acrslf)");
  }
  t.optimizer = *opt;
  t.max_epochs = flags.max_epochs;
  t.patience = flags.patience;
  t.min_improvement = flags.min_improvement;
  t.rank = flags.rank;
  t.reg_strength = flags.reg_strength;
  t.init_hi = flags.init_hi;
  t.seed = flags.seed;
  t.deterministic = flags.deterministic;
  t.cg.max_iterations = flags.cg_max;
  t.cg.rel_tolerance = flags.cg_tol;

  const bool first_order =
      t.optimizer == lfa::Optimizer::SgdMomentum || t.optimizer == lfa::Optimizer::Adam;
  if (strict && first_order && (opts.cg_max->count() > 0 || opts.cg_tol->count() > 0)) {
    throw std::invalid_argument("--cg-max/--cg-tol are only valid for second-order optimizers");
  }
  const bool keep_lr = strict || first_order;
  const bool keep_momentum = strict || t.optimizer == lfa::Optimizer::SgdMomentum;
  const bool keep_adam = strict || t.optimizer == lfa::Optimizer::Adam;
  const bool keep_gamma = strict || t.optimizer == lfa::Optimizer::SlfFixed;
  const bool keep_m = strict || t.optimizer == lfa::Optimizer::Acrslf;

  if (keep_lr && opts.lr->count() > 0) t.learning_rate = flags.lr;
  if (keep_momentum && opts.momentum->count() > 0) t.momentum = flags.momentum;
  if (keep_adam && opts.beta1->count() > 0) t.adam_beta1 = flags.beta1;
  if (keep_adam && opts.beta2->count() > 0) t.adam_beta2 = flags.beta2;
  if (keep_adam && opts.eps->count() > 0) t.adam_epsilon = flags.eps;
  if (keep_gamma && opts.gamma->count() > 0) t.fixed_damping = flags.gamma;
  if (keep_m && opts.cubic_m->count() > 0) t.cubic_m = flags.cubic_m;

  lfa::apply_defaults(t);
  lfa::validate(t);
  return manifest;
}

int cmd_stats(const std::string& dataset, const std::string& delimiter,
              const std::string& name) {
  const auto delim = lfa::parse_delimiter(delimiter);
  if (!delim) throw std::invalid_argument("unknown delimiter '" + delimiter + "'");
  const lfa::DatasetStats stats = lfa::compute_stats(dataset, *delim, name);
  std::cout << lfa::stats_csv_line(stats) << '\n';
  return kExitOk;
}

int report_run(const lfa::RunSummary& summary) {
  if (summary.failed) {
    std::cerr << "run aborted: " << summary.failure_reason << '\n';
    return kExitNumerical;
  }
  std::cout << "optimizer=" << summary.optimizer << " best_rmse=" << summary.best_rmse
            << " epochs_run=" << summary.epochs_run << " best_epoch=" << summary.best_epoch
            << " total_seconds=" << summary.total_seconds << '\n';
  std::cout << "artifacts: " << summary.run_dir.string() << '\n';
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Latent factor training on sparse rating matrices"};
  app.require_subcommand(1);

  // stats
  auto* stats_cmd = app.add_subcommand("stats", "Print name,users,items,known,density for a file");
  std::string stats_dataset, stats_delimiter = "auto", stats_name;
  stats_cmd->add_option("--dataset", stats_dataset, "Rating file")->required();
  stats_cmd->add_option("--delimiter", stats_delimiter, "auto, tab, comma, space")
      ->check(CLI::IsMember({"auto", "tab", "comma", "space"}));
  stats_cmd->add_option("--name", stats_name, "Label for the report line");

  // train
  auto* train_cmd = app.add_subcommand("train", "Train one optimizer and write run artifacts");
  TrainFlags train_flags;
  std::string train_out, train_manifest;
  auto* train_dataset_opt =
      train_cmd->add_option("--dataset", train_flags.dataset, "Rating file");
  auto* train_manifest_opt = train_cmd->add_option(
      "--manifest", train_manifest, "Replay a previously emitted manifest.json");
  train_cmd->add_option("--optimizer", train_flags.optimizer,
                        "sgd_momentum, adam, slf_fixed, acrslf");
  auto* train_out_opt = train_cmd->add_option("--out", train_out, "Output directory");
  const TrainOptions train_opts = add_train_flags(train_cmd, train_flags);

  // compare
  auto* compare_cmd =
      app.add_subcommand("compare", "Run several optimizers on one dataset and tabulate");
  TrainFlags compare_flags;
  std::string compare_out;
  std::string compare_optimizers;
  std::vector<std::string> compare_manifests;
  auto* compare_dataset_opt =
      compare_cmd->add_option("--dataset", compare_flags.dataset, "Rating file");
  compare_cmd->add_option("--optimizers", compare_optimizers,
                          "Comma-separated optimizer list (default: all four)");
  auto* compare_manifest_opt = compare_cmd->add_option(
      "--manifest", compare_manifests, "Manifest files, one per optimizer (repeatable)");
  auto* compare_out_opt = compare_cmd->add_option("--out", compare_out, "Output directory");
  const TrainOptions compare_opts = add_train_flags(compare_cmd, compare_flags);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (stats_cmd->parsed()) {
      return cmd_stats(stats_dataset, stats_delimiter, stats_name);
    }

    if (train_cmd->parsed()) {
      lfa::RunManifest manifest;
      if (train_manifest_opt->count() > 0) {
        if (train_dataset_opt->count() > 0) {
          throw std::invalid_argument("--manifest replaces --dataset and the training flags");
        }
        manifest = lfa::load_manifest(train_manifest);
        if (train_out_opt->count() > 0) manifest.output_dir = train_out;
        lfa::apply_defaults(manifest.train);
        lfa::validate(manifest.train);
      } else {
        if (train_dataset_opt->count() == 0) {
          throw std::invalid_argument("train needs --dataset (or --manifest)");
        }
        if (train_out_opt->count() == 0) {
          throw std::invalid_argument("train needs --out");
        }
        manifest = manifest_from_flags(train_flags, train_opts, train_flags.optimizer, train_out,
                                       /*strict=*/true);
      }
      return report_run(lfa::run_train(manifest));
    }

    if (compare_cmd->parsed()) {
      std::vector<lfa::RunManifest> manifests;
      if (compare_manifest_opt->count() > 0) {
        if (compare_dataset_opt->count() > 0) {
          throw std::invalid_argument("--manifest replaces --dataset and the training flags");
        }
        for (const std::string& path : compare_manifests) {
          manifests.push_back(lfa::load_manifest(path));
          lfa::apply_defaults(manifests.back().train);
          lfa::validate(manifests.back().train);
        }
      } else {
        if (compare_dataset_opt->count() == 0) {
          throw std::invalid_argument("compare needs --dataset (or --manifest files)");
        }
        if (compare_out_opt->count() == 0) {
          throw std::invalid_argument("compare needs --out");
        }
        std::string list = compare_optimizers.empty()
                               ? "sgd_momentum,adam,slf_fixed,acrslf"
                               : compare_optimizers;
        std::stringstream stream(list);
        std::string optimizer;
        while (std::getline(stream, optimizer, ',')) {
          if (optimizer.empty()) continue;
          const auto out_dir = std::filesystem::path(compare_out) / optimizer;
          manifests.push_back(manifest_from_flags(compare_flags, compare_opts, optimizer,
                                                  out_dir.string(), /*strict=*/false));
        }
      }
      lfa::run_compare(manifests, std::cout);
      return kExitOk;
    }
  } catch (const lfa::DataError& err) {
    std::cerr << "data error: " << err.what() << '\n';
    return kExitData;
  } catch (const lfa::NumericalError& err) {
    std::cerr << "numerical abort: " << err.what() << '\n';
    return kExitNumerical;
  } catch (const std::invalid_argument& err) {
    std::cerr << "usage error: " << err.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& err) {
    std::cerr << "error: " << err.what() << '\n';
    return kExitData;
  }
  return kExitUsage;
}
