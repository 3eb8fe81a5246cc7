#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "eigenspec/rla.hpp"
#include "eigenspec/signal_sim.hpp"
#include "eigenspec/spectrogram.hpp"
#include "eigenspec/svm.hpp"

namespace eigenspec {

// Everything one run needs; the master seed deterministically derives every
// stage's sub-seed. Loadable from JSON, overridable by CLI flags.
struct RunConfig {
  std::uint64_t master_seed = 1;
  double snr_db = 10.0;
  // measured scales the noise to the actual signal power; unit_power treats
  // the signal as carrying 0 dBW (noise power is absolute, 10^(-snr/10)).
  NoiseReference snr_reference = NoiseReference::Measured;
  std::string signal_format = "f32";  // or "csv"

  struct Simulation {
    BearingSpec bearing;
    double shaft_speed_rpm = 1000.0;
    double sample_rate_hz = 12000.0;
    double decay_beta_hz = 1200.0;
    double resonance_fn_hz = 2000.0;
    std::vector<double> amplitude_levels = {1.0, 2.0, 3.0, 4.0};
    double amplitude_jitter_frac = 0.10;
    double duration_s = 0.0;  // 0 = auto: 151 chunks' worth of samples
  } simulation;

  StftConfig stft;
  RenderWindow render;

  struct Dataset {
    double split_frac = 0.8;
    int images_per_class = 150;  // 0 = keep every chunk
  } dataset;

  RsvdConfig rsvd;
  SvmConfig svm;

  RunConfig();

  void validate() const;
  double duration_or_default() const;

  static RunConfig from_json_file(const std::filesystem::path& path);
  std::string to_json() const;
};

// Wall-clock stage timings, written to a sidecar file so reports stay
// byte-reproducible across runs.
struct StageTimings {
  std::vector<std::pair<std::string, double>> stages_ms;

  void add(const std::string& stage, double ms) {
    stages_ms.emplace_back(stage, ms);
  }
  void write(const std::filesystem::path& path) const;
};

// Simulates the 12 labeled fault signals (3 fault types x 4 amplitude
// levels) and writes them under out_dir/signals. Returns the file paths.
std::vector<std::filesystem::path> cmd_simulate(const RunConfig& cfg,
                                                const std::filesystem::path& out_dir,
                                                StageTimings* timings = nullptr);

struct IngestReport {
  std::vector<std::filesystem::path> accepted;
  std::vector<std::pair<std::filesystem::path, std::string>> rejected;
};

// Validates external CSV / raw-f32 signal files and normalizes them into the
// internal f32 format under out_dir/signals.
IngestReport cmd_ingest(const std::vector<std::filesystem::path>& inputs,
                        const std::filesystem::path& out_dir);

struct BuildResult {
  std::filesystem::path train_path;
  std::filesystem::path test_path;
  std::map<std::string, std::pair<int, int>> per_class_counts;  // train, test
  std::vector<std::string> warnings;
};

// Chunks every signal in signals_dir, renders spectrogram images, splits
// per class and persists train/test dataset matrices plus a manifest.
BuildResult cmd_build_dataset(const std::filesystem::path& signals_dir,
                              const RunConfig& cfg,
                              const std::filesystem::path& out_dir,
                              StageTimings* timings = nullptr);

struct TrainResult {
  double train_accuracy = 0.0;
  std::vector<double> cv_fold_accuracies;
  double cv_mean_accuracy = 0.0;
  std::vector<std::vector<int>> confusion;  // row = true class
  std::vector<std::string> class_names;
  std::filesystem::path basis_path;
  std::filesystem::path model_path;
  std::filesystem::path report_path;
};

// Mean-center, randomized SVD, truncate, project, ECOC train,
// cross-validate; persists the basis, the model and a deterministic JSON
// report (timings go to a sidecar).
TrainResult cmd_train(const std::filesystem::path& dataset_dir,
                      const RunConfig& cfg,
                      const std::filesystem::path& out_dir,
                      StageTimings* timings = nullptr);

struct EvalResult {
  double accuracy = 0.0;
  std::vector<std::vector<int>> confusion;
  std::vector<std::string> class_names;
  std::filesystem::path report_path;
};

// Centers the test set with the training mean, projects, predicts.
EvalResult cmd_evaluate(const std::filesystem::path& model_dir,
                        const std::filesystem::path& dataset_path,
                        const std::filesystem::path& out_dir,
                        StageTimings* timings = nullptr);

// Writes each eigen-spectrogram as a PGM image (per-mode min-max
// normalization, white = highest value) plus a singular-value CSV.
std::vector<std::filesystem::path> cmd_export_modes(
    const std::filesystem::path& basis_path,
    const std::filesystem::path& out_dir);

// Interpretation coefficients per class, written as CSV:
// class,theta_1..theta_k,mean_gamma,n_samples. Returns the warnings.
std::vector<std::string> cmd_explain(const std::filesystem::path& basis_path,
                                     const std::filesystem::path& dataset_path,
                                     const std::filesystem::path& out_csv,
                                     int samples_per_class,
                                     std::uint64_t seed);

}  // namespace eigenspec
