#include "eigenspec/pipeline.hpp"

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <fstream>
#include <map>
#include <nlohmann/json.hpp>
#include <sstream>

#include "eigenspec/errors.hpp"
#include "eigenspec/interpret.hpp"
#include "eigenspec/io.hpp"
#include "eigenspec/rng.hpp"

namespace eigenspec {

namespace {

namespace fs = std::filesystem;
using ordered_json = nlohmann::ordered_json;

class StageClock {
 public:
  explicit StageClock(StageTimings* timings) : timings_(timings) {}

  void lap(const std::string& stage) {
    auto now = std::chrono::steady_clock::now();
    if (timings_ != nullptr) {
      double ms = std::chrono::duration<double, std::milli>(now - last_).count();
      timings_->add(stage, ms);
    }
    last_ = now;
  }

 private:
  StageTimings* timings_;
  std::chrono::steady_clock::time_point last_ =
      std::chrono::steady_clock::now();
};

const std::array<std::pair<FaultType, const char*>, 3> kFaultCodes = {{
    {FaultType::RollingElement, "B"},
    {FaultType::InnerRace, "IR"},
    {FaultType::OuterRace, "OR"},
}};

std::string reference_str(NoiseReference ref) {
  return ref == NoiseReference::Measured ? "measured" : "unit_power";
}

NoiseReference reference_from_str(const std::string& s) {
  if (s == "measured") return NoiseReference::Measured;
  if (s == "unit_power") return NoiseReference::UnitPower;
  throw InvalidArgumentError("unknown snr_reference '" + s + "'");
}

std::string coding_str(EcocCoding coding) {
  return coding == EcocCoding::OneVsOne ? "one-vs-one" : "one-vs-all";
}

EcocCoding coding_from_str(const std::string& s) {
  if (s == "one-vs-one") return EcocCoding::OneVsOne;
  if (s == "one-vs-all") return EcocCoding::OneVsAll;
  throw InvalidArgumentError("unknown coding '" + s + "'");
}

std::string kernel_str(const KernelSpec& k) {
  if (k.kind == KernelKind::Linear) return "linear";
  return k.degree == 2 ? "quadratic" : "polynomial";
}

void write_text_file(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError(path.string() + ": cannot open for writing");
  out << text;
  if (!out) throw DataError(path.string() + ": write failed");
}

ordered_json config_echo(const RunConfig& cfg) {
  ordered_json j;
  j["master_seed"] = cfg.master_seed;
  j["snr_db"] = cfg.snr_db;
  j["snr_reference"] = reference_str(cfg.snr_reference);
  j["signal_format"] = cfg.signal_format;
  j["simulation"] = {
      {"bearing",
       {{"designation", cfg.simulation.bearing.designation},
        {"bpfi_mult", cfg.simulation.bearing.bpfi_mult},
        {"bpfo_mult", cfg.simulation.bearing.bpfo_mult},
        {"bsf_mult", cfg.simulation.bearing.bsf_mult}}},
      {"shaft_speed_rpm", cfg.simulation.shaft_speed_rpm},
      {"sample_rate_hz", cfg.simulation.sample_rate_hz},
      {"decay_beta_hz", cfg.simulation.decay_beta_hz},
      {"resonance_fn_hz", cfg.simulation.resonance_fn_hz},
      {"amplitude_levels", cfg.simulation.amplitude_levels},
      {"amplitude_jitter_frac", cfg.simulation.amplitude_jitter_frac},
      {"duration_s", cfg.simulation.duration_s}};
  j["stft"] = {{"window_len", cfg.stft.window_len},
               {"overlap_frac", cfg.stft.overlap_frac},
               {"chunk_len", cfg.stft.chunk_len}};
  j["render"] = {{"db_floor", cfg.render.db_floor},
                 {"db_ceiling", cfg.render.db_ceiling}};
  j["dataset"] = {{"split_frac", cfg.dataset.split_frac},
                  {"images_per_class", cfg.dataset.images_per_class}};
  j["rsvd"] = {{"rank", cfg.rsvd.target_rank},
               {"oversampling", cfg.rsvd.oversampling},
               {"power_iterations", cfg.rsvd.power_iterations},
               {"components", cfg.rsvd.retained_components}};
  j["svm"] = {{"cost", cfg.svm.cost},
              {"kernel", kernel_str(cfg.svm.kernel)},
              {"degree", cfg.svm.kernel.degree},
              {"offset", cfg.svm.kernel.offset},
              {"coding", coding_str(cfg.svm.coding)},
              {"standardize", cfg.svm.standardize},
              {"tolerance", cfg.svm.smo.tolerance},
              {"folds", cfg.svm.folds}};
  return j;
}

std::vector<fs::path> list_signal_files(const fs::path& dir) {
  if (!fs::is_directory(dir)) {
    throw DataError(dir.string() + ": not a directory");
  }
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (!entry.is_regular_file()) continue;
    auto ext = entry.path().extension().string();
    if (ext == ".csv" || ext == ".f32raw") files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  if (files.empty()) {
    throw DataError(dir.string() + ": no .csv or .f32raw signal files found");
  }
  return files;
}

Signal read_signal_any(const fs::path& path) {
  if (path.extension() == ".csv") return io::read_signal_csv(path);
  return io::read_signal_f32(path);
}

struct LoadedDataset {
  DatasetMatrix ds;
  fs::path path;
};

LoadedDataset load_dataset_file(const fs::path& dataset_path) {
  fs::path p = dataset_path;
  if (fs::is_directory(p)) p /= "test.espc";
  return {io::read_dataset(p), p};
}

std::vector<std::vector<int>> confusion_matrix(
    const std::vector<ClassLabel>& classes,
    const std::vector<ClassLabel>& truth,
    const std::vector<ClassLabel>& predicted) {
  std::map<ClassLabel, std::size_t> index;
  for (std::size_t c = 0; c < classes.size(); ++c) index[classes[c]] = c;
  std::vector<std::vector<int>> counts(classes.size(),
                                       std::vector<int>(classes.size(), 0));
  for (std::size_t i = 0; i < truth.size(); ++i) {
    counts[index.at(truth[i])][index.at(predicted[i])] += 1;
  }
  return counts;
}

double accuracy_from_confusion(const std::vector<std::vector<int>>& confusion) {
  long trace = 0;
  long total = 0;
  for (std::size_t r = 0; r < confusion.size(); ++r) {
    for (std::size_t c = 0; c < confusion[r].size(); ++c) {
      total += confusion[r][c];
      if (r == c) trace += confusion[r][c];
    }
  }
  return total == 0 ? 0.0 : static_cast<double>(trace) / total;
}

ordered_json confusion_json(const std::vector<std::vector<int>>& confusion) {
  ordered_json rows = ordered_json::array();
  for (const auto& row : confusion) rows.push_back(row);
  return rows;
}

}  // namespace

RunConfig::RunConfig() { simulation.bearing = skf22240(); }

double RunConfig::duration_or_default() const {
  if (simulation.duration_s > 0.0) return simulation.duration_s;
  // One chunk of slack beyond images_per_class so flooring can never starve
  // the requested image count.
  const int chunks =
      dataset.images_per_class > 0 ? dataset.images_per_class + 1 : 151;
  return static_cast<double>(chunks) * stft.chunk_len /
         simulation.sample_rate_hz;
}

void RunConfig::validate() const {
  simulation.bearing.validate();
  stft.validate();
  render.validate();
  if (signal_format != "f32" && signal_format != "csv") {
    throw InvalidArgumentError("signal_format must be 'f32' or 'csv'");
  }
  if (dataset.split_frac <= 0.0 || dataset.split_frac >= 1.0) {
    throw InvalidArgumentError("split_frac must lie in (0, 1)");
  }
  if (dataset.images_per_class < 0) {
    throw InvalidArgumentError("images_per_class must be non-negative");
  }
  if (simulation.amplitude_levels.empty()) {
    throw InvalidArgumentError("amplitude_levels must not be empty");
  }
  if (svm.folds < 2) {
    throw InvalidArgumentError("cross-validation needs at least 2 folds");
  }
  svm.kernel.validate();
}

RunConfig RunConfig::from_json_file(const fs::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw InvalidArgumentError(path.string() + ": cannot open config file");
  }
  ordered_json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw InvalidArgumentError(path.string() + ": " + e.what());
  }

  RunConfig cfg;
  try {
    cfg.master_seed = j.value("master_seed", cfg.master_seed);
    cfg.snr_db = j.value("snr_db", cfg.snr_db);
    if (j.contains("snr_reference")) {
      cfg.snr_reference = reference_from_str(j["snr_reference"]);
    }
    cfg.signal_format = j.value("signal_format", cfg.signal_format);
    if (j.contains("simulation")) {
      const auto& s = j["simulation"];
      if (s.contains("bearing")) {
        const auto& b = s["bearing"];
        cfg.simulation.bearing.designation =
            b.value("designation", cfg.simulation.bearing.designation);
        cfg.simulation.bearing.bpfi_mult =
            b.value("bpfi_mult", cfg.simulation.bearing.bpfi_mult);
        cfg.simulation.bearing.bpfo_mult =
            b.value("bpfo_mult", cfg.simulation.bearing.bpfo_mult);
        cfg.simulation.bearing.bsf_mult =
            b.value("bsf_mult", cfg.simulation.bearing.bsf_mult);
      }
      cfg.simulation.shaft_speed_rpm =
          s.value("shaft_speed_rpm", cfg.simulation.shaft_speed_rpm);
      cfg.simulation.sample_rate_hz =
          s.value("sample_rate_hz", cfg.simulation.sample_rate_hz);
      cfg.simulation.decay_beta_hz =
          s.value("decay_beta_hz", cfg.simulation.decay_beta_hz);
      cfg.simulation.resonance_fn_hz =
          s.value("resonance_fn_hz", cfg.simulation.resonance_fn_hz);
      if (s.contains("amplitude_levels")) {
        cfg.simulation.amplitude_levels =
            s["amplitude_levels"].get<std::vector<double>>();
      }
      cfg.simulation.amplitude_jitter_frac = s.value(
          "amplitude_jitter_frac", cfg.simulation.amplitude_jitter_frac);
      cfg.simulation.duration_s =
          s.value("duration_s", cfg.simulation.duration_s);
    }
    if (j.contains("stft")) {
      const auto& s = j["stft"];
      cfg.stft.window_len = s.value("window_len", cfg.stft.window_len);
      cfg.stft.overlap_frac = s.value("overlap_frac", cfg.stft.overlap_frac);
      cfg.stft.chunk_len = s.value("chunk_len", cfg.stft.chunk_len);
    }
    if (j.contains("render")) {
      const auto& r = j["render"];
      cfg.render.db_floor = r.value("db_floor", cfg.render.db_floor);
      cfg.render.db_ceiling = r.value("db_ceiling", cfg.render.db_ceiling);
    }
    if (j.contains("dataset")) {
      const auto& d = j["dataset"];
      cfg.dataset.split_frac = d.value("split_frac", cfg.dataset.split_frac);
      cfg.dataset.images_per_class =
          d.value("images_per_class", cfg.dataset.images_per_class);
    }
    if (j.contains("rsvd")) {
      const auto& r = j["rsvd"];
      cfg.rsvd.target_rank = r.value("rank", cfg.rsvd.target_rank);
      cfg.rsvd.oversampling = r.value("oversampling", cfg.rsvd.oversampling);
      cfg.rsvd.power_iterations =
          r.value("power_iterations", cfg.rsvd.power_iterations);
      cfg.rsvd.retained_components =
          r.value("components", cfg.rsvd.retained_components);
    }
    if (j.contains("svm")) {
      const auto& s = j["svm"];
      cfg.svm.cost = s.value("cost", cfg.svm.cost);
      if (s.contains("kernel")) {
        std::string kind = s["kernel"];
        if (kind == "linear") {
          cfg.svm.kernel.kind = KernelKind::Linear;
        } else if (kind == "quadratic") {
          cfg.svm.kernel = KernelSpec{KernelKind::Polynomial, 2, 1.0};
        } else if (kind == "polynomial") {
          cfg.svm.kernel.kind = KernelKind::Polynomial;
        } else {
          throw InvalidArgumentError("unknown kernel '" + kind + "'");
        }
      }
      cfg.svm.kernel.degree = s.value("degree", cfg.svm.kernel.degree);
      cfg.svm.kernel.offset = s.value("offset", cfg.svm.kernel.offset);
      if (s.contains("coding")) {
        cfg.svm.coding = coding_from_str(s["coding"]);
      }
      cfg.svm.standardize = s.value("standardize", cfg.svm.standardize);
      cfg.svm.smo.tolerance = s.value("tolerance", cfg.svm.smo.tolerance);
      cfg.svm.folds = s.value("folds", cfg.svm.folds);
    }
  } catch (const nlohmann::json::exception& e) {
    throw InvalidArgumentError(path.string() + ": " + e.what());
  }
  cfg.validate();
  return cfg;
}

std::string RunConfig::to_json() const { return config_echo(*this).dump(2) + "\n"; }

void StageTimings::write(const fs::path& path) const {
  ordered_json j;
  j["schema"] = "eigenspec-timings-v1";
  ordered_json stages;
  for (const auto& [stage, ms] : stages_ms) stages[stage] = ms;
  j["stages_ms"] = stages;
  write_text_file(path, j.dump(2) + "\n");
}

std::vector<fs::path> cmd_simulate(const RunConfig& cfg,
                                   const fs::path& out_dir,
                                   StageTimings* timings) {
  cfg.validate();
  StageClock clock(timings);
  const fs::path signals_dir = out_dir / "signals";
  fs::create_directories(signals_dir);

  std::vector<fs::path> written;
  std::uint64_t class_index = 0;
  for (const auto& [fault, code] : kFaultCodes) {
    for (std::size_t level = 0; level < cfg.simulation.amplitude_levels.size();
         ++level) {
      ClassLabel label{ClassLabel::parse(
          std::string(code) + std::to_string(level + 1))};

      FaultSimParams params;
      params.fault_type = fault;
      params.amplitude_mean = cfg.simulation.amplitude_levels[level];
      params.amplitude_jitter_frac = cfg.simulation.amplitude_jitter_frac;
      params.decay_beta_hz = cfg.simulation.decay_beta_hz;
      params.resonance_fn_hz = cfg.simulation.resonance_fn_hz;
      params.shaft_speed_rpm = cfg.simulation.shaft_speed_rpm;
      params.sample_rate_hz = cfg.simulation.sample_rate_hz;
      params.duration_s = cfg.duration_or_default();
      params.rng_seed = derive_seed(cfg.master_seed, "simulate", class_index);

      Signal sig = simulate_fault_signal(params, cfg.simulation.bearing);
      sig = add_awgn(sig, cfg.snr_db,
                     derive_seed(cfg.master_seed, "noise", class_index),
                     cfg.snr_reference);
      sig.label = label;

      fs::path path = signals_dir / (label.str() + (cfg.signal_format == "csv"
                                                        ? ".csv"
                                                        : ".f32raw"));
      try {
        if (cfg.signal_format == "csv") {
          io::write_signal_csv(path, sig);
        } else {
          io::write_signal_f32(path, sig);
        }
      } catch (const DataError& e) {
        throw DataError("while writing " + path.string() + ": " + e.what());
      }
      written.push_back(path);
      ++class_index;
    }
  }
  clock.lap("simulate");
  return written;
}

IngestReport cmd_ingest(const std::vector<fs::path>& inputs,
                        const fs::path& out_dir) {
  const fs::path signals_dir = out_dir / "signals";
  fs::create_directories(signals_dir);

  IngestReport report;
  std::map<std::string, int> label_counts;
  for (const auto& input : inputs) {
    try {
      Signal sig = read_signal_any(input);
      if (!sig.label) {
        throw DataError("no label metadata");
      }
      const std::string base = sig.label->str();
      const int copy = label_counts[base]++;
      fs::path path = signals_dir /
                      (base + "_" + std::to_string(copy) + ".f32raw");
      io::write_signal_f32(path, sig);
      report.accepted.push_back(path);
    } catch (const Error& e) {
      report.rejected.emplace_back(input, e.what());
    }
  }
  if (report.accepted.empty()) {
    throw DataError("ingest accepted no files");
  }
  return report;
}

BuildResult cmd_build_dataset(const fs::path& signals_dir,
                              const RunConfig& cfg, const fs::path& out_dir,
                              StageTimings* timings) {
  cfg.validate();
  StageClock clock(timings);
  auto files = list_signal_files(signals_dir);

  BuildResult result;
  std::map<ClassLabel, std::vector<SpectrogramImage>> images_by_class;
  std::map<ClassLabel, bool> class_seen;
  for (const auto& file : files) {
    std::optional<ClassLabel> label;
    try {
      Signal sig = read_signal_any(file);
      if (!sig.label) throw DataError("signal has no label metadata");
      label = sig.label;
      class_seen[*label] = true;
      auto& bucket = images_by_class[*label];
      const int cap = cfg.dataset.images_per_class;
      if (cap > 0 && bucket.size() >= static_cast<std::size_t>(cap)) {
        continue;
      }
      for (auto chunk : chunk_signal(sig, cfg.stft)) {
        if (cap > 0 && bucket.size() >= static_cast<std::size_t>(cap)) break;
        bucket.push_back(SpectrogramImage{
            render_image(stft_magnitude(chunk, cfg.stft), cfg.render),
            *label});
      }
    } catch (const Error& e) {
      result.warnings.push_back(file.string() + ": " + e.what());
      if (label && images_by_class[*label].empty()) {
        images_by_class.erase(*label);
      }
    }
  }
  clock.lap("render_images");

  for (const auto& [label, seen] : class_seen) {
    if (!images_by_class.contains(label) || images_by_class[label].empty()) {
      throw DataError("class " + label.str() +
                      " produced no images; aborting dataset build");
    }
  }
  if (images_by_class.empty()) {
    throw DataError("no class produced any image");
  }

  std::vector<SpectrogramImage> images;
  for (auto& [label, bucket] : images_by_class) {
    for (auto& img : bucket) images.push_back(std::move(img));
  }
  auto [train, test] = assemble_dataset(
      images, cfg.dataset.split_frac,
      derive_seed(cfg.master_seed, "train-test-split"));
  clock.lap("split");

  const fs::path dataset_dir = out_dir / "dataset";
  result.train_path = dataset_dir / "train.espc";
  result.test_path = dataset_dir / "test.espc";
  io::write_dataset(result.train_path, train);
  io::write_dataset(result.test_path, test);

  for (const auto& label : train.labels) {
    result.per_class_counts[label.str()].first += 1;
  }
  for (const auto& label : test.labels) {
    result.per_class_counts[label.str()].second += 1;
  }

  ordered_json manifest;
  manifest["schema"] = "eigenspec-manifest-v1";
  manifest["train_file"] = result.train_path.filename().string();
  manifest["test_file"] = result.test_path.filename().string();
  manifest["pixels_per_image"] = kImagePixels;
  manifest["n_train"] = train.labels.size();
  manifest["n_test"] = test.labels.size();
  ordered_json classes;
  for (const auto& [name, counts] : result.per_class_counts) {
    classes[name] = {{"train", counts.first}, {"test", counts.second}};
  }
  manifest["per_class_counts"] = classes;
  manifest["warnings"] = result.warnings;
  manifest["config"] = config_echo(cfg);
  write_text_file(dataset_dir / "manifest.json", manifest.dump(2) + "\n");
  clock.lap("persist");
  return result;
}

TrainResult cmd_train(const fs::path& dataset_dir, const RunConfig& cfg,
                      const fs::path& out_dir, StageTimings* timings) {
  cfg.validate();
  StageClock clock(timings);

  fs::path train_path = dataset_dir;
  if (fs::is_directory(train_path)) train_path /= "train.espc";
  DatasetMatrix train = io::read_dataset(train_path);
  clock.lap("load");

  Eigen::VectorXd mean;
  RsvdConfig rsvd_cfg = cfg.rsvd;
  rsvd_cfg.rng_seed = derive_seed(cfg.master_seed, "rsvd");
  SvdResult factorization;
  EigenBasis basis;
  FeatureMatrix features;
  try {
    mean = mean_center_inplace(train.data);
    clock.lap("center");
    factorization = rsvd(train.data, rsvd_cfg);
    clock.lap("rsvd");
    basis = truncate_basis(factorization.u, factorization.sigma, mean,
                           rsvd_cfg.retained_components);
    features = project_features(train.data, basis, train.labels);
    clock.lap("project");
  } catch (const InvalidArgumentError& e) {
    throw InvalidArgumentError(std::string("feature extraction: ") + e.what());
  }

  EcocSvmModel model = ecoc_train(features, cfg.svm);
  clock.lap("train_svm");

  std::vector<ClassLabel> predicted;
  predicted.reserve(features.labels.size());
  for (Eigen::Index i = 0; i < features.features.rows(); ++i) {
    predicted.push_back(
        ecoc_predict(model, features.features.row(i).transpose()).label);
  }
  auto confusion = confusion_matrix(model.classes, features.labels, predicted);
  clock.lap("train_accuracy");

  CvResult cv = cross_validate(features, cfg.svm, cfg.svm.folds,
                               derive_seed(cfg.master_seed, "cv"));
  clock.lap("cross_validate");

  TrainResult result;
  result.train_accuracy = accuracy_from_confusion(confusion);
  result.cv_fold_accuracies = cv.fold_accuracies;
  result.cv_mean_accuracy = cv.mean_accuracy;
  result.confusion = confusion;
  for (const auto& cls : model.classes) result.class_names.push_back(cls.str());

  const fs::path model_dir = out_dir / "model";
  result.basis_path = model_dir / "basis.espb";
  result.model_path = model_dir / "model.espm";
  io::write_basis(result.basis_path, basis);
  io::write_model(result.model_path, model);

  ordered_json report;
  report["schema"] = "eigenspec-report-v1";
  report["command"] = "train";
  report["master_seed"] = cfg.master_seed;
  report["dataset"] = {{"path", train_path.string()},
                       {"n_samples", features.labels.size()},
                       {"pixels_per_image", train.data.rows()}};
  report["config"] = config_echo(cfg);
  ordered_json results;
  results["train_accuracy"] = result.train_accuracy;
  results["cv_fold_accuracies"] = result.cv_fold_accuracies;
  results["cv_mean_accuracy"] = result.cv_mean_accuracy;
  results["classes"] = result.class_names;
  results["confusion_matrix"] = confusion_json(result.confusion);
  ordered_json sigma = ordered_json::array();
  for (Eigen::Index j = 0; j < basis.singular_values.size(); ++j) {
    sigma.push_back(basis.singular_values[j]);
  }
  results["singular_values"] = sigma;
  report["results"] = results;
  result.report_path = out_dir / "train_report.json";
  write_text_file(result.report_path, report.dump(2) + "\n");
  clock.lap("persist");
  return result;
}

EvalResult cmd_evaluate(const fs::path& model_dir, const fs::path& dataset_path,
                        const fs::path& out_dir, StageTimings* timings) {
  StageClock clock(timings);
  fs::path basis_path = model_dir;
  fs::path model_path = model_dir;
  if (fs::is_directory(model_dir)) {
    basis_path = model_dir / "model" / "basis.espb";
    if (!fs::exists(basis_path)) basis_path = model_dir / "basis.espb";
    model_path = model_dir / "model" / "model.espm";
    if (!fs::exists(model_path)) model_path = model_dir / "model.espm";
  }
  EigenBasis basis = io::read_basis(basis_path);
  EcocSvmModel model = io::read_model(model_path);
  auto [test, test_path] = load_dataset_file(dataset_path);
  clock.lap("load");

  // Test data is centered with the training mean; anything else would leak
  // test statistics into the transform.
  test.data.colwise() -= basis.mean_image;
  FeatureMatrix features = project_features(test.data, basis, test.labels);
  clock.lap("project");

  std::vector<ClassLabel> predicted;
  predicted.reserve(features.labels.size());
  for (Eigen::Index i = 0; i < features.features.rows(); ++i) {
    predicted.push_back(
        ecoc_predict(model, features.features.row(i).transpose()).label);
  }
  for (const auto& label : features.labels) {
    if (std::find(model.classes.begin(), model.classes.end(), label) ==
        model.classes.end()) {
      throw DataError("test label " + label.str() +
                      " was never seen in training");
    }
  }
  EvalResult result;
  result.confusion = confusion_matrix(model.classes, features.labels,
                                      predicted);
  result.accuracy = accuracy_from_confusion(result.confusion);
  for (const auto& cls : model.classes) result.class_names.push_back(cls.str());
  clock.lap("predict");

  ordered_json report;
  report["schema"] = "eigenspec-report-v1";
  report["command"] = "evaluate";
  report["dataset"] = {{"path", test_path.string()},
                       {"n_samples", features.labels.size()}};
  ordered_json results;
  results["test_accuracy"] = result.accuracy;
  results["classes"] = result.class_names;
  results["confusion_matrix"] = confusion_json(result.confusion);
  report["results"] = results;
  result.report_path = out_dir / "eval_report.json";
  write_text_file(result.report_path, report.dump(2) + "\n");
  clock.lap("persist");
  return result;
}

std::vector<fs::path> cmd_export_modes(const fs::path& basis_path,
                                       const fs::path& out_dir) {
  EigenBasis basis = io::read_basis(basis_path);
  if (basis.modes.rows() != kImagePixels) {
    throw DataError("basis length " + std::to_string(basis.modes.rows()) +
                    " does not match the " + std::to_string(kImageSize) + "x" +
                    std::to_string(kImageSize) + " image geometry");
  }
  fs::create_directories(out_dir);
  std::vector<fs::path> written;
  for (Eigen::Index j = 0; j < basis.modes.cols(); ++j) {
    Eigen::VectorXd mode = basis.modes.col(j);
    const double lo = mode.minCoeff();
    const double hi = mode.maxCoeff();
    if (hi > lo) {
      mode = (mode.array() - lo) / (hi - lo);
    } else {
      mode.setZero();
    }
    fs::path path = out_dir / ("mode_" + std::to_string(j + 1) + ".pgm");
    io::write_pgm(path, unflatten_image(mode));
    written.push_back(path);
  }

  std::ostringstream csv;
  csv << "component,singular_value\n";
  for (Eigen::Index j = 0; j < basis.singular_values.size(); ++j) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", basis.singular_values[j]);
    csv << (j + 1) << "," << buf << "\n";
  }
  write_text_file(out_dir / "singular_values.csv", csv.str());
  written.push_back(out_dir / "singular_values.csv");
  return written;
}

std::vector<std::string> cmd_explain(const fs::path& basis_path,
                                     const fs::path& dataset_path,
                                     const fs::path& out_csv,
                                     int samples_per_class,
                                     std::uint64_t seed) {
  EigenBasis basis = io::read_basis(basis_path);
  fs::path data_path = dataset_path;
  if (fs::is_directory(data_path)) data_path /= "train.espc";
  DatasetMatrix ds = io::read_dataset(data_path);
  if (ds.data.rows() != basis.modes.rows()) {
    throw DataError("dataset and basis disagree on pixel count");
  }
  ds.data.colwise() -= basis.mean_image;

  std::vector<InterpretationRecord> records;
  std::vector<ClassLabel> labels;
  records.reserve(ds.labels.size());
  for (Eigen::Index i = 0; i < ds.data.cols(); ++i) {
    records.push_back(
        interpret_sample(static_cast<int>(i), ds.data.col(i), basis));
    labels.push_back(ds.labels[static_cast<std::size_t>(i)]);
  }
  ClassMeanReport report = class_mean_report(
      records, labels, samples_per_class, derive_seed(seed, "explain"));

  std::ostringstream csv;
  csv << "class";
  for (int j = 1; j <= basis.component_count(); ++j) csv << ",theta_" << j;
  csv << ",mean_gamma,n_samples\n";
  for (const auto& row : report.rows) {
    csv << row.label.str();
    char buf[40];
    for (Eigen::Index j = 0; j < row.mean_thetas.size(); ++j) {
      std::snprintf(buf, sizeof buf, "%.12g", row.mean_thetas[j]);
      csv << "," << buf;
    }
    std::snprintf(buf, sizeof buf, "%.12g", row.mean_gamma);
    csv << "," << buf << "," << row.n_samples << "\n";
  }
  write_text_file(out_csv, csv.str());
  return report.warnings;
}

}  // namespace eigenspec
