// eigenspec: bearing fault diagnosis from spectrogram images.
//
// Subcommands cover the whole workflow: simulate fault signals, ingest
// external recordings, build spectrogram datasets, train and evaluate the
// eigen-spectrogram ECOC-SVM classifier, export the modes as images and emit
// per-class interpretation coefficients.

#include <CLI11.hpp>
#include <cstdint>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include "eigenspec/errors.hpp"
#include "eigenspec/pipeline.hpp"

namespace fs = std::filesystem;
using namespace eigenspec;

namespace {

constexpr int kExitInvalidConfig = 2;
constexpr int kExitDataError = 3;
constexpr int kExitNonConvergence = 4;

struct CommonFlags {
  std::string config_path;
  std::string out_dir = "eigenspec-out";
  std::uint64_t seed = 0;
  bool seed_set = false;
  double snr_db = 0.0;
  bool snr_set = false;
  unsigned rank = 0;
  bool rank_set = false;
  unsigned components = 0;
  bool components_set = false;
  std::string coding;
  bool standardize = false;
};

void add_common_flags(CLI::App* cmd, CommonFlags& flags) {
  cmd->add_option("--config", flags.config_path, "JSON run configuration");
  cmd->add_option("--out", flags.out_dir, "output directory");
  cmd->add_option("--seed", flags.seed, "master seed")
      ->each([&](const std::string&) { flags.seed_set = true; });
  cmd->add_option("--snr-db", flags.snr_db, "target SNR in dB")
      ->each([&](const std::string&) { flags.snr_set = true; });
  cmd->add_option("--rank", flags.rank, "randomized SVD target rank")
      ->each([&](const std::string&) { flags.rank_set = true; });
  cmd->add_option("--components", flags.components,
                  "retained eigen-spectrogram count")
      ->each([&](const std::string&) { flags.components_set = true; });
  cmd->add_option("--coding", flags.coding,
                  "ECOC coding: one-vs-one | one-vs-all")
      ->check(CLI::IsMember({"one-vs-one", "one-vs-all"}));
  cmd->add_flag("--standardize", flags.standardize,
                "z-score features before SVM training");
}

RunConfig resolve_config(const CommonFlags& flags) {
  RunConfig cfg;
  if (!flags.config_path.empty()) {
    cfg = RunConfig::from_json_file(flags.config_path);
  }
  if (flags.seed_set) cfg.master_seed = flags.seed;
  if (flags.snr_set) cfg.snr_db = flags.snr_db;
  if (flags.rank_set) cfg.rsvd.target_rank = static_cast<int>(flags.rank);
  if (flags.components_set) {
    cfg.rsvd.retained_components = static_cast<int>(flags.components);
  }
  if (!flags.coding.empty()) {
    cfg.svm.coding = flags.coding == "one-vs-one" ? EcocCoding::OneVsOne
                                                  : EcocCoding::OneVsAll;
  }
  if (flags.standardize) cfg.svm.standardize = true;
  cfg.validate();
  return cfg;
}

void print_confusion(const std::vector<std::string>& names,
                     const std::vector<std::vector<int>>& confusion) {
  std::cout << "confusion matrix (rows = true class):\n";
  for (std::size_t r = 0; r < confusion.size(); ++r) {
    std::cout << "  " << names[r] << ":";
    for (int v : confusion[r]) std::cout << " " << v;
    std::cout << "\n";
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"eigen-spectrogram bearing fault diagnosis"};
  app.require_subcommand(1);

  CommonFlags flags;

  auto* sim = app.add_subcommand("simulate",
                                 "simulate the 12 labeled fault signals");
  add_common_flags(sim, flags);
  std::string sim_format;
  sim->add_option("--format", sim_format, "signal file format: f32 | csv")
      ->check(CLI::IsMember({"f32", "csv"}));

  auto* ingest =
      app.add_subcommand("ingest", "validate and normalize external signals");
  add_common_flags(ingest, flags);
  std::vector<std::string> ingest_inputs;
  ingest->add_option("--in", ingest_inputs, "signal files or directories")
      ->required();

  auto* build = app.add_subcommand(
      "build-dataset", "chunk signals, render images, split train/test");
  add_common_flags(build, flags);
  std::string signals_dir;
  build->add_option("--signals", signals_dir, "directory of signal files")
      ->required();

  auto* train = app.add_subcommand(
      "train", "extract eigen-spectrogram features and train the classifier");
  add_common_flags(train, flags);
  std::string train_dataset;
  train->add_option("--dataset", train_dataset,
                    "dataset directory or train.espc file")
      ->required();

  auto* evaluate = app.add_subcommand("evaluate", "score a persisted model");
  add_common_flags(evaluate, flags);
  std::string eval_model;
  std::string eval_dataset;
  evaluate->add_option("--model", eval_model,
                       "training output directory (or model dir)")
      ->required();
  evaluate->add_option("--dataset", eval_dataset,
                       "dataset directory or test.espc file")
      ->required();

  auto* modes = app.add_subcommand("export-modes",
                                   "write eigen-spectrograms as PGM images");
  add_common_flags(modes, flags);
  std::string modes_basis;
  modes->add_option("--basis", modes_basis, "basis.espb file")->required();

  auto* explain = app.add_subcommand(
      "explain", "per-class mean interpretation coefficients");
  add_common_flags(explain, flags);
  std::string explain_basis;
  std::string explain_dataset;
  int explain_samples = 300;
  explain->add_option("--basis", explain_basis, "basis.espb file")->required();
  explain->add_option("--dataset", explain_dataset,
                      "dataset directory or .espc file")
      ->required();
  explain->add_option("--samples-per-class", explain_samples,
                      "samples drawn per class");

  CLI11_PARSE(app, argc, argv);

  try {
    const fs::path out_dir = flags.out_dir;
    if (sim->parsed()) {
      RunConfig cfg = resolve_config(flags);
      if (!sim_format.empty()) cfg.signal_format = sim_format;
      StageTimings timings;
      auto files = cmd_simulate(cfg, out_dir, &timings);
      timings.write(out_dir / "timings_simulate.json");
      std::cout << "wrote " << files.size() << " signal files under "
                << (out_dir / "signals").string() << "\n";
    } else if (ingest->parsed()) {
      std::vector<fs::path> inputs;
      for (const auto& item : ingest_inputs) {
        fs::path p = item;
        if (fs::is_directory(p)) {
          for (const auto& entry : fs::directory_iterator(p)) {
            if (entry.is_regular_file() &&
                entry.path().extension() != ".meta") {
              inputs.push_back(entry.path());
            }
          }
        } else {
          inputs.push_back(p);
        }
      }
      std::sort(inputs.begin(), inputs.end());
      IngestReport report = cmd_ingest(inputs, out_dir);
      std::cout << "accepted " << report.accepted.size() << " file(s)\n";
      for (const auto& [path, reason] : report.rejected) {
        std::cerr << "rejected " << path.string() << ": " << reason << "\n";
      }
    } else if (build->parsed()) {
      RunConfig cfg = resolve_config(flags);
      StageTimings timings;
      BuildResult result = cmd_build_dataset(signals_dir, cfg, out_dir,
                                             &timings);
      timings.write(out_dir / "timings_build.json");
      for (const auto& warning : result.warnings) {
        std::cerr << "warning: " << warning << "\n";
      }
      std::cout << "dataset written to " << result.train_path.string()
                << " / " << result.test_path.string() << "\n";
      for (const auto& [name, counts] : result.per_class_counts) {
        std::cout << "  " << name << ": " << counts.first << " train / "
                  << counts.second << " test\n";
      }
    } else if (train->parsed()) {
      RunConfig cfg = resolve_config(flags);
      StageTimings timings;
      TrainResult result = cmd_train(train_dataset, cfg, out_dir, &timings);
      timings.write(out_dir / "timings_train.json");
      std::cout << "training accuracy: " << result.train_accuracy * 100.0
                << "%\n";
      std::cout << "cross-validation mean: " << result.cv_mean_accuracy * 100.0
                << "% (folds:";
      for (double f : result.cv_fold_accuracies) std::cout << " " << f * 100.0;
      std::cout << ")\n";
      std::cout << "report: " << result.report_path.string() << "\n";
    } else if (evaluate->parsed()) {
      StageTimings timings;
      EvalResult result = cmd_evaluate(eval_model, eval_dataset, out_dir,
                                       &timings);
      timings.write(out_dir / "timings_evaluate.json");
      std::cout << "test accuracy: " << result.accuracy * 100.0 << "%\n";
      print_confusion(result.class_names, result.confusion);
      std::cout << "report: " << result.report_path.string() << "\n";
    } else if (modes->parsed()) {
      auto files = cmd_export_modes(modes_basis, out_dir);
      std::cout << "wrote " << files.size() << " file(s) under "
                << out_dir.string() << "\n";
    } else if (explain->parsed()) {
      RunConfig cfg = resolve_config(flags);
      fs::path out_csv = out_dir / "interpretation.csv";
      auto warnings = cmd_explain(explain_basis, explain_dataset, out_csv,
                                  explain_samples, cfg.master_seed);
      for (const auto& warning : warnings) {
        std::cerr << "warning: " << warning << "\n";
      }
      std::cout << "wrote " << out_csv.string() << "\n";
    }
  } catch (const InvalidArgumentError& e) {
    std::cerr << "error (invalid config): " << e.what() << "\n";
    return kExitInvalidConfig;
  } catch (const ConvergenceError& e) {
    std::cerr << "error (non-convergence): " << e.what() << "\n";
    return kExitNonConvergence;
  } catch (const DataError& e) {
    std::cerr << "error (data): " << e.what() << "\n";
    return kExitDataError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
