#pragma once

#include <Eigen/Core>
#include <filesystem>
#include <string>

#include "eigenspec/rla.hpp"
#include "eigenspec/signal_sim.hpp"
#include "eigenspec/spectrogram.hpp"
#include "eigenspec/svm.hpp"

namespace eigenspec::io {

// --- Signals ---------------------------------------------------------------
// CSV: two header lines `sample_rate=<Hz>` and `label=<code>`, then one
// decimal float per line. Raw: little-endian f32 samples with a `<path>.meta`
// sidecar carrying the same key=value lines.

void write_signal_csv(const std::filesystem::path& path, const Signal& sig);
Signal read_signal_csv(const std::filesystem::path& path);

void write_signal_f32(const std::filesystem::path& path, const Signal& sig);
Signal read_signal_f32(const std::filesystem::path& path);

// --- Images ----------------------------------------------------------------
// Binary PGM (P5, maxval 255); pixel byte = round(value * 255).

void write_pgm(const std::filesystem::path& path,
               const Eigen::MatrixXd& pixels01);
Eigen::MatrixXd read_pgm(const std::filesystem::path& path);

// --- Dataset matrices (magic ESPC1) -----------------------------------------
// u32 n, u32 m, n*m little-endian f64 column-major, then m length-prefixed
// label strings.

void write_dataset(const std::filesystem::path& path, const DatasetMatrix& ds);
DatasetMatrix read_dataset(const std::filesystem::path& path);

// --- Eigen-spectrogram bases (magic ESPB1) ----------------------------------
// u32 n, u32 k, mean vector, then k (sigma, mode) pairs, little-endian f64.

void write_basis(const std::filesystem::path& path, const EigenBasis& basis);
EigenBasis read_basis(const std::filesystem::path& path);

// --- ECOC-SVM models (magic ESPM1) -------------------------------------------

void write_model(const std::filesystem::path& path, const EcocSvmModel& model);
EcocSvmModel read_model(const std::filesystem::path& path);

}  // namespace eigenspec::io
