#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "eigenspec/class_label.hpp"
#include "eigenspec/signal_sim.hpp"

namespace eigenspec {

// Output image side length; all spectrograms are rasterized to this size.
inline constexpr int kImageSize = 227;
inline constexpr int kImagePixels = kImageSize * kImageSize;

// STFT framing: Hamming window, fractional overlap, fixed-length chunks.
struct StftConfig {
  int window_len = 32;
  double overlap_frac = 0.5;
  int chunk_len = 2048;

  // Hop in samples; window_len * (1 - overlap_frac) must be a positive
  // integer.
  int hop() const;
  int frame_count() const { return (chunk_len - window_len) / hop() + 1; }
  int bin_count() const { return window_len / 2 + 1; }
  void validate() const;
};

// A rasterized spectrogram: kImageSize x kImageSize grayscale values in
// [0, 1], row 0 at the top of the picture (highest frequency).
struct SpectrogramImage {
  Eigen::MatrixXd pixels;
  ClassLabel label;
};

// Column-per-sample matrix of flattened images plus the label vector.
struct DatasetMatrix {
  Eigen::MatrixXd data;           // n pixel-rows x m sample-columns
  std::vector<ClassLabel> labels;  // one per column
  std::uint64_t column_order_seed = 0;
};

// Splits a signal into non-overlapping chunks of exactly chunk_len samples;
// the trailing remainder is discarded. Spans view into `sig`.
std::vector<std::span<const double>> chunk_signal(const Signal& sig,
                                                  const StftConfig& cfg);

// One-sided STFT magnitude of a chunk: bin_count rows (DC first) by
// frame_count columns. Hamming coefficients
// w[k] = 0.54 - 0.46 cos(2 pi k / (window_len - 1)).
Eigen::MatrixXd stft_magnitude(std::span<const double> chunk,
                               const StftConfig& cfg);

// Fixed decibel window mapped onto [0, 1]. An absolute reference (rather
// than per-image extremes) keeps signal level visible in the image: fault
// severities that differ only in amplitude stay distinguishable after
// rendering. Defaults suit dimensionless simulated signals; recordings in
// other units need a window matching their scale.
struct RenderWindow {
  double db_floor = -50.0;
  double db_ceiling = 30.0;

  void validate() const;
};

// Renders a magnitude matrix as a grayscale image: 20*log10(mag + 1e-10)
// clamped into the window and scaled to [0, 1], then bilinear resize to
// kImageSize^2 with frequency on the vertical axis, low frequency at the
// bottom. A gain of c dB shifts every unclamped pixel by c / window width.
Eigen::MatrixXd render_image(const Eigen::MatrixXd& mag,
                             const RenderWindow& window = {});

// Column-major flatten (top-left pixel first) and its inverse.
Eigen::VectorXd flatten_image(const Eigen::MatrixXd& pixels);
Eigen::MatrixXd unflatten_image(const Eigen::VectorXd& flat);

// Stratified random train/test split. Per class, round(split_frac * count)
// samples go to training; every class needs at least one image on each side.
std::pair<DatasetMatrix, DatasetMatrix> assemble_dataset(
    const std::vector<SpectrogramImage>& images, double split_frac,
    std::uint64_t seed);

}  // namespace eigenspec
