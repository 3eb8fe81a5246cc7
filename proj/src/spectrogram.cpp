#include "eigenspec/spectrogram.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>

#include "eigenspec/errors.hpp"
#include "eigenspec/rng.hpp"

namespace eigenspec {

std::string_view fault_code_str(FaultCode code) {
  switch (code) {
    case FaultCode::B:
      return "B";
    case FaultCode::IR:
      return "IR";
    case FaultCode::OR:
      return "OR";
    case FaultCode::Normal:
      return "Normal";
  }
  return "?";
}

std::string ClassLabel::str() const {
  return std::string(fault_code_str(fault_code)) + severity_code;
}

std::optional<ClassLabel> ClassLabel::try_parse(std::string_view text) {
  // Longest prefix first so "Normal" is never read as something else.
  if (text.starts_with("Normal")) {
    return ClassLabel{FaultCode::Normal, std::string(text.substr(6))};
  }
  if (text.starts_with("IR") && text.size() > 2) {
    return ClassLabel{FaultCode::IR, std::string(text.substr(2))};
  }
  if (text.starts_with("OR") && text.size() > 2) {
    return ClassLabel{FaultCode::OR, std::string(text.substr(2))};
  }
  if (text.starts_with("B") && text.size() > 1) {
    return ClassLabel{FaultCode::B, std::string(text.substr(1))};
  }
  return std::nullopt;
}

ClassLabel ClassLabel::parse(std::string_view text) {
  auto label = try_parse(text);
  if (!label) {
    throw DataError("unrecognized class label '" + std::string(text) + "'");
  }
  return *label;
}

int StftConfig::hop() const {
  double hop_real = window_len * (1.0 - overlap_frac);
  auto hop_int = static_cast<int>(std::llround(hop_real));
  if (hop_int <= 0 || std::fabs(hop_real - hop_int) > 1e-9) {
    throw InvalidArgumentError(
        "window_len * (1 - overlap_frac) must be a positive integer");
  }
  return hop_int;
}

void StftConfig::validate() const {
  if (overlap_frac < 0.0 || overlap_frac >= 1.0) {
    throw InvalidArgumentError("overlap_frac must lie in [0, 1)");
  }
  if (window_len < 2) {
    throw InvalidArgumentError("window_len must be at least 2");
  }
  if (window_len > chunk_len) {
    throw InvalidArgumentError("window_len must not exceed chunk_len");
  }
  (void)hop();
}

std::vector<std::span<const double>> chunk_signal(const Signal& sig,
                                                  const StftConfig& cfg) {
  cfg.validate();
  const auto chunk_len = static_cast<std::size_t>(cfg.chunk_len);
  if (sig.samples.size() < chunk_len) {
    throw DataError("signal of " + std::to_string(sig.samples.size()) +
                    " samples is shorter than one chunk (" +
                    std::to_string(chunk_len) + ")");
  }
  std::vector<std::span<const double>> chunks;
  chunks.reserve(sig.samples.size() / chunk_len);
  for (std::size_t start = 0; start + chunk_len <= sig.samples.size();
       start += chunk_len) {
    chunks.emplace_back(sig.samples.data() + start, chunk_len);
  }
  return chunks;
}

Eigen::MatrixXd stft_magnitude(std::span<const double> chunk,
                               const StftConfig& cfg) {
  cfg.validate();
  if (chunk.size() != static_cast<std::size_t>(cfg.chunk_len)) {
    throw InvalidArgumentError("chunk length " + std::to_string(chunk.size()) +
                               " does not match configured chunk_len " +
                               std::to_string(cfg.chunk_len));
  }
  const int nw = cfg.window_len;
  const int hop = cfg.hop();
  const int frames = cfg.frame_count();
  const int bins = cfg.bin_count();

  Eigen::VectorXd window(nw);
  for (int k = 0; k < nw; ++k) {
    window[k] = 0.54 - 0.46 * std::cos(2.0 * std::numbers::pi * k / (nw - 1));
  }

  // Direct real DFT; with 32-sample windows a matrix product beats FFT
  // bookkeeping.
  Eigen::MatrixXd dft_cos(bins, nw);
  Eigen::MatrixXd dft_sin(bins, nw);
  for (int f = 0; f < bins; ++f) {
    for (int k = 0; k < nw; ++k) {
      double phase = 2.0 * std::numbers::pi * f * k / nw;
      dft_cos(f, k) = std::cos(phase);
      dft_sin(f, k) = -std::sin(phase);
    }
  }

  Eigen::MatrixXd windowed(nw, frames);
  for (int t = 0; t < frames; ++t) {
    for (int k = 0; k < nw; ++k) {
      windowed(k, t) = window[k] * chunk[static_cast<std::size_t>(t) * hop + k];
    }
  }

  Eigen::MatrixXd re = dft_cos * windowed;
  Eigen::MatrixXd im = dft_sin * windowed;
  return (re.array().square() + im.array().square()).sqrt();
}

namespace {

// Bilinear sampling with corner alignment; optionally flips the vertical axis
// so input row 0 lands at the bottom of the output.
Eigen::MatrixXd resize_bilinear(const Eigen::MatrixXd& in, int out_rows,
                                int out_cols, bool flip_vertical) {
  const auto in_rows = in.rows();
  const auto in_cols = in.cols();
  Eigen::MatrixXd out(out_rows, out_cols);
  const double row_scale =
      out_rows > 1 ? static_cast<double>(in_rows - 1) / (out_rows - 1) : 0.0;
  const double col_scale =
      out_cols > 1 ? static_cast<double>(in_cols - 1) / (out_cols - 1) : 0.0;
  for (int i = 0; i < out_rows; ++i) {
    const int src_row_pos = flip_vertical ? (out_rows - 1 - i) : i;
    const double fy = src_row_pos * row_scale;
    const auto y0 = static_cast<Eigen::Index>(std::floor(fy));
    const auto y1 = std::min(y0 + 1, in_rows - 1);
    const double wy = fy - static_cast<double>(y0);
    for (int j = 0; j < out_cols; ++j) {
      const double fx = j * col_scale;
      const auto x0 = static_cast<Eigen::Index>(std::floor(fx));
      const auto x1 = std::min(x0 + 1, in_cols - 1);
      const double wx = fx - static_cast<double>(x0);
      const double top = (1.0 - wx) * in(y0, x0) + wx * in(y0, x1);
      const double bottom = (1.0 - wx) * in(y1, x0) + wx * in(y1, x1);
      out(i, j) = (1.0 - wy) * top + wy * bottom;
    }
  }
  return out;
}

}  // namespace

void RenderWindow::validate() const {
  if (!(db_floor < db_ceiling)) {
    throw InvalidArgumentError("render window floor must lie below ceiling");
  }
}

Eigen::MatrixXd render_image(const Eigen::MatrixXd& mag,
                             const RenderWindow& window) {
  if (mag.size() == 0) {
    throw InvalidArgumentError("cannot render an empty magnitude matrix");
  }
  window.validate();
  constexpr double kLogFloor = 1e-10;
  Eigen::MatrixXd db =
      ((20.0 * (mag.array() + kLogFloor).log10() - window.db_floor) /
       (window.db_ceiling - window.db_floor))
          .cwiseMax(0.0)
          .cwiseMin(1.0);
  return resize_bilinear(db, kImageSize, kImageSize, /*flip_vertical=*/true);
}

Eigen::VectorXd flatten_image(const Eigen::MatrixXd& pixels) {
  return Eigen::Map<const Eigen::VectorXd>(pixels.data(), pixels.size());
}

Eigen::MatrixXd unflatten_image(const Eigen::VectorXd& flat) {
  if (flat.size() != kImagePixels) {
    throw InvalidArgumentError("expected " + std::to_string(kImagePixels) +
                               " pixels, got " + std::to_string(flat.size()));
  }
  return Eigen::Map<const Eigen::MatrixXd>(flat.data(), kImageSize,
                                           kImageSize);
}

std::pair<DatasetMatrix, DatasetMatrix> assemble_dataset(
    const std::vector<SpectrogramImage>& images, double split_frac,
    std::uint64_t seed) {
  if (split_frac <= 0.0 || split_frac >= 1.0) {
    throw InvalidArgumentError("split_frac must lie in (0, 1)");
  }
  if (images.empty()) {
    throw DataError("cannot assemble a dataset from zero images");
  }
  const auto pixel_count = images.front().pixels.size();
  for (const auto& img : images) {
    if (img.pixels.size() != pixel_count) {
      throw DataError("images disagree on pixel count");
    }
  }

  std::map<ClassLabel, std::vector<std::size_t>> by_class;
  for (std::size_t i = 0; i < images.size(); ++i) {
    by_class[images[i].label].push_back(i);
  }

  std::vector<std::size_t> train_idx;
  std::vector<std::size_t> test_idx;
  std::uint64_t class_index = 0;
  for (auto& [label, indices] : by_class) {
    if (indices.size() < 2) {
      throw DataError("class " + label.str() + " has " +
                      std::to_string(indices.size()) +
                      " image(s); at least 2 are needed to split");
    }
    Rng rng(derive_seed(seed, "stratified-split", class_index++));
    rng.shuffle(indices);
    auto n_train = static_cast<std::size_t>(
        std::llround(split_frac * static_cast<double>(indices.size())));
    n_train = std::clamp<std::size_t>(n_train, 1, indices.size() - 1);
    train_idx.insert(train_idx.end(), indices.begin(),
                     indices.begin() + static_cast<std::ptrdiff_t>(n_train));
    test_idx.insert(test_idx.end(),
                    indices.begin() + static_cast<std::ptrdiff_t>(n_train),
                    indices.end());
  }

  auto build = [&](const std::vector<std::size_t>& idx) {
    DatasetMatrix out;
    out.column_order_seed = seed;
    out.data.resize(pixel_count, static_cast<Eigen::Index>(idx.size()));
    out.labels.reserve(idx.size());
    for (std::size_t c = 0; c < idx.size(); ++c) {
      out.data.col(static_cast<Eigen::Index>(c)) =
          flatten_image(images[idx[c]].pixels);
      out.labels.push_back(images[idx[c]].label);
    }
    return out;
  };

  return {build(train_idx), build(test_idx)};
}

}  // namespace eigenspec
