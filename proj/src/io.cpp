#include "eigenspec/io.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include "eigenspec/errors.hpp"

namespace eigenspec::io {

namespace {

namespace fs = std::filesystem;

[[noreturn]] void fail_io(const fs::path& path, const std::string& what) {
  throw DataError(path.string() + ": " + what);
}

std::ofstream open_out(const fs::path& path, std::ios::openmode mode) {
  if (path.has_parent_path()) {
    fs::create_directories(path.parent_path());
  }
  std::ofstream out(path, mode);
  if (!out) fail_io(path, "cannot open for writing");
  return out;
}

std::ifstream open_in(const fs::path& path, std::ios::openmode mode) {
  std::ifstream in(path, mode);
  if (!in) fail_io(path, "cannot open for reading");
  return in;
}

// Little-endian scalar I/O, independent of host byte order.
template <typename T>
void put_le(std::ostream& out, T value) {
  auto bits = std::bit_cast<std::array<unsigned char, sizeof(T)>>(value);
  if constexpr (std::endian::native == std::endian::big) {
    std::reverse(bits.begin(), bits.end());
  }
  out.write(reinterpret_cast<const char*>(bits.data()), sizeof(T));
}

template <typename T>
T get_le(std::istream& in, const fs::path& path) {
  std::array<unsigned char, sizeof(T)> bits;
  if (!in.read(reinterpret_cast<char*>(bits.data()), sizeof(T))) {
    fail_io(path, "truncated file");
  }
  if constexpr (std::endian::native == std::endian::big) {
    std::reverse(bits.begin(), bits.end());
  }
  return std::bit_cast<T>(bits);
}

void put_string(std::ostream& out, const std::string& s) {
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(s.size()));
  out.write(s.data(), static_cast<std::streamsize>(s.size()));
}

std::string get_string(std::istream& in, const fs::path& path) {
  auto len = get_le<std::uint32_t>(in, path);
  std::string s(len, '\0');
  if (!in.read(s.data(), len)) fail_io(path, "truncated string");
  return s;
}

void put_magic(std::ostream& out, const char (&magic)[6]) {
  out.write(magic, 5);
}

void check_magic(std::istream& in, const fs::path& path,
                 const char (&magic)[6]) {
  char buf[5];
  if (!in.read(buf, 5) || std::memcmp(buf, magic, 5) != 0) {
    fail_io(path, std::string("bad magic, expected ") + magic);
  }
}

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

// key=value header lines shared by the CSV and sidecar formats.
struct SignalMeta {
  double sample_rate = 0.0;
  std::optional<ClassLabel> label;
};

void write_meta_lines(std::ostream& out, const Signal& sig) {
  out << "sample_rate=" << format_double(sig.sample_rate_hz) << "\n";
  out << "label=" << (sig.label ? sig.label->str() : "") << "\n";
}

SignalMeta parse_meta_lines(std::istream& in, const fs::path& path) {
  SignalMeta meta;
  bool have_rate = false;
  for (int i = 0; i < 2; ++i) {
    std::string line;
    if (!std::getline(in, line)) fail_io(path, "missing metadata header");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    auto eq = line.find('=');
    if (eq == std::string::npos) {
      fail_io(path, "metadata line lacks key=value form: '" + line + "'");
    }
    std::string key = line.substr(0, eq);
    std::string value = line.substr(eq + 1);
    if (key == "sample_rate") {
      try {
        meta.sample_rate = std::stod(value);
      } catch (const std::exception&) {
        fail_io(path, "unparseable sample_rate '" + value + "'");
      }
      have_rate = true;
    } else if (key == "label") {
      if (!value.empty()) {
        auto parsed = ClassLabel::try_parse(value);
        if (!parsed) fail_io(path, "unrecognized label '" + value + "'");
        meta.label = *parsed;
      }
    } else {
      fail_io(path, "unknown metadata key '" + key + "'");
    }
  }
  if (!have_rate || meta.sample_rate <= 0.0) {
    fail_io(path, "missing or invalid sample_rate metadata");
  }
  return meta;
}

}  // namespace

void write_signal_csv(const fs::path& path, const Signal& sig) {
  auto out = open_out(path, std::ios::out);
  write_meta_lines(out, sig);
  for (double v : sig.samples) out << format_double(v) << "\n";
  if (!out) fail_io(path, "write failed");
}

Signal read_signal_csv(const fs::path& path) {
  auto in = open_in(path, std::ios::in);
  SignalMeta meta = parse_meta_lines(in, path);
  Signal sig;
  sig.sample_rate_hz = meta.sample_rate;
  sig.label = meta.label;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    try {
      sig.samples.push_back(std::stod(line));
    } catch (const std::exception&) {
      fail_io(path, "unparseable sample '" + line + "'");
    }
  }
  if (sig.samples.empty()) fail_io(path, "signal contains no samples");
  return sig;
}

void write_signal_f32(const fs::path& path, const Signal& sig) {
  auto out = open_out(path, std::ios::binary);
  for (double v : sig.samples) put_le<float>(out, static_cast<float>(v));
  if (!out) fail_io(path, "write failed");
  auto meta = open_out(path.string() + ".meta", std::ios::out);
  write_meta_lines(meta, sig);
}

Signal read_signal_f32(const fs::path& path) {
  fs::path meta_path = path.string() + ".meta";
  if (!fs::exists(meta_path)) fail_io(path, "missing sidecar " +
                                                meta_path.filename().string());
  auto meta_in = open_in(meta_path, std::ios::in);
  SignalMeta meta = parse_meta_lines(meta_in, meta_path);

  auto in = open_in(path, std::ios::binary);
  Signal sig;
  sig.sample_rate_hz = meta.sample_rate;
  sig.label = meta.label;
  const auto bytes = fs::file_size(path);
  if (bytes % 4 != 0) fail_io(path, "size is not a multiple of 4 bytes");
  sig.samples.reserve(bytes / 4);
  for (std::uintmax_t i = 0; i < bytes / 4; ++i) {
    sig.samples.push_back(get_le<float>(in, path));
  }
  if (sig.samples.empty()) fail_io(path, "signal contains no samples");
  return sig;
}

void write_pgm(const fs::path& path, const Eigen::MatrixXd& pixels01) {
  auto out = open_out(path, std::ios::binary);
  out << "P5\n" << pixels01.cols() << " " << pixels01.rows() << "\n255\n";
  for (Eigen::Index r = 0; r < pixels01.rows(); ++r) {
    for (Eigen::Index c = 0; c < pixels01.cols(); ++c) {
      double v = std::clamp(pixels01(r, c), 0.0, 1.0);
      out.put(static_cast<char>(
          static_cast<unsigned char>(std::lround(v * 255.0))));
    }
  }
  if (!out) fail_io(path, "write failed");
}

Eigen::MatrixXd read_pgm(const fs::path& path) {
  auto in = open_in(path, std::ios::binary);
  std::string magic;
  in >> magic;
  if (magic != "P5") fail_io(path, "not a binary PGM (P5) file");
  long cols = 0;
  long rows = 0;
  long maxval = 0;
  in >> cols >> rows >> maxval;
  if (!in || cols <= 0 || rows <= 0 || maxval != 255) {
    fail_io(path, "unsupported PGM header");
  }
  in.get();  // single whitespace after maxval
  Eigen::MatrixXd pixels(rows, cols);
  for (long r = 0; r < rows; ++r) {
    for (long c = 0; c < cols; ++c) {
      int byte = in.get();
      if (byte == EOF) fail_io(path, "truncated pixel data");
      pixels(r, c) = static_cast<double>(byte) / 255.0;
    }
  }
  return pixels;
}

void write_dataset(const fs::path& path, const DatasetMatrix& ds) {
  if (ds.labels.size() != static_cast<std::size_t>(ds.data.cols())) {
    throw InvalidArgumentError("dataset labels do not match column count");
  }
  auto out = open_out(path, std::ios::binary);
  put_magic(out, "ESPC1");
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(ds.data.rows()));
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(ds.data.cols()));
  for (Eigen::Index c = 0; c < ds.data.cols(); ++c) {
    for (Eigen::Index r = 0; r < ds.data.rows(); ++r) {
      put_le<double>(out, ds.data(r, c));
    }
  }
  for (const auto& label : ds.labels) put_string(out, label.str());
  if (!out) fail_io(path, "write failed");
}

DatasetMatrix read_dataset(const fs::path& path) {
  auto in = open_in(path, std::ios::binary);
  check_magic(in, path, "ESPC1");
  auto n = get_le<std::uint32_t>(in, path);
  auto m = get_le<std::uint32_t>(in, path);
  DatasetMatrix ds;
  ds.data.resize(n, m);
  for (std::uint32_t c = 0; c < m; ++c) {
    for (std::uint32_t r = 0; r < n; ++r) {
      ds.data(r, c) = get_le<double>(in, path);
    }
  }
  ds.labels.reserve(m);
  for (std::uint32_t c = 0; c < m; ++c) {
    ds.labels.push_back(ClassLabel::parse(get_string(in, path)));
  }
  return ds;
}

void write_basis(const fs::path& path, const EigenBasis& basis) {
  basis.validate();
  auto out = open_out(path, std::ios::binary);
  put_magic(out, "ESPB1");
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(basis.modes.rows()));
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(basis.modes.cols()));
  for (Eigen::Index i = 0; i < basis.mean_image.size(); ++i) {
    put_le<double>(out, basis.mean_image[i]);
  }
  for (Eigen::Index j = 0; j < basis.modes.cols(); ++j) {
    put_le<double>(out, basis.singular_values[j]);
    for (Eigen::Index i = 0; i < basis.modes.rows(); ++i) {
      put_le<double>(out, basis.modes(i, j));
    }
  }
  if (!out) fail_io(path, "write failed");
}

EigenBasis read_basis(const fs::path& path) {
  auto in = open_in(path, std::ios::binary);
  check_magic(in, path, "ESPB1");
  auto n = get_le<std::uint32_t>(in, path);
  auto k = get_le<std::uint32_t>(in, path);
  EigenBasis basis;
  basis.mean_image.resize(n);
  basis.modes.resize(n, k);
  basis.singular_values.resize(k);
  for (std::uint32_t i = 0; i < n; ++i) {
    basis.mean_image[i] = get_le<double>(in, path);
  }
  for (std::uint32_t j = 0; j < k; ++j) {
    basis.singular_values[j] = get_le<double>(in, path);
    for (std::uint32_t i = 0; i < n; ++i) {
      basis.modes(i, j) = get_le<double>(in, path);
    }
  }
  basis.validate();
  return basis;
}

void write_model(const fs::path& path, const EcocSvmModel& model) {
  model.validate();
  auto out = open_out(path, std::ios::binary);
  put_magic(out, "ESPM1");
  const auto& kernel = model.learners.empty() ? KernelSpec{}
                                              : model.learners.front().kernel;
  put_le<std::uint8_t>(out, kernel.kind == KernelKind::Linear ? 0 : 1);
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(kernel.degree));
  put_le<double>(out, kernel.offset);
  const double cost =
      model.learners.empty() ? 1.0 : model.learners.front().cost;
  put_le<double>(out, cost);

  put_le<std::uint8_t>(out, model.standardize ? 1 : 0);
  const auto dim = model.learners.empty()
                       ? Eigen::Index{0}
                       : model.learners.front().support_vectors.cols();
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(dim));
  if (model.standardize) {
    for (Eigen::Index i = 0; i < dim; ++i) {
      put_le<double>(out, model.feature_mean[i]);
    }
    for (Eigen::Index i = 0; i < dim; ++i) {
      put_le<double>(out, model.feature_scale[i]);
    }
  }

  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(model.classes.size()));
  for (const auto& cls : model.classes) put_string(out, cls.str());

  put_le<std::uint32_t>(out,
                        static_cast<std::uint32_t>(model.learners.size()));
  for (Eigen::Index r = 0; r < model.coding.rows(); ++r) {
    for (Eigen::Index c = 0; c < model.coding.cols(); ++c) {
      put_le<std::int8_t>(out, static_cast<std::int8_t>(model.coding(r, c)));
    }
  }
  for (const auto& learner : model.learners) {
    put_le<std::uint32_t>(
        out, static_cast<std::uint32_t>(learner.support_vectors.rows()));
    put_le<double>(out, learner.bias);
    for (Eigen::Index i = 0; i < learner.support_vectors.rows(); ++i) {
      put_le<double>(out, learner.dual_coeffs[i]);
      for (Eigen::Index j = 0; j < learner.support_vectors.cols(); ++j) {
        put_le<double>(out, learner.support_vectors(i, j));
      }
    }
  }
  if (!out) fail_io(path, "write failed");
}

EcocSvmModel read_model(const fs::path& path) {
  auto in = open_in(path, std::ios::binary);
  check_magic(in, path, "ESPM1");
  KernelSpec kernel;
  kernel.kind =
      get_le<std::uint8_t>(in, path) == 0 ? KernelKind::Linear
                                          : KernelKind::Polynomial;
  kernel.degree = static_cast<int>(get_le<std::uint32_t>(in, path));
  kernel.offset = get_le<double>(in, path);
  const double cost = get_le<double>(in, path);

  EcocSvmModel model;
  model.standardize = get_le<std::uint8_t>(in, path) != 0;
  auto dim = get_le<std::uint32_t>(in, path);
  if (model.standardize) {
    model.feature_mean.resize(dim);
    model.feature_scale.resize(dim);
    for (std::uint32_t i = 0; i < dim; ++i) {
      model.feature_mean[i] = get_le<double>(in, path);
    }
    for (std::uint32_t i = 0; i < dim; ++i) {
      model.feature_scale[i] = get_le<double>(in, path);
    }
  }

  auto n_classes = get_le<std::uint32_t>(in, path);
  model.classes.reserve(n_classes);
  for (std::uint32_t c = 0; c < n_classes; ++c) {
    model.classes.push_back(ClassLabel::parse(get_string(in, path)));
  }
  auto n_learners = get_le<std::uint32_t>(in, path);
  model.coding.resize(n_classes, n_learners);
  for (std::uint32_t r = 0; r < n_classes; ++r) {
    for (std::uint32_t c = 0; c < n_learners; ++c) {
      model.coding(r, c) = get_le<std::int8_t>(in, path);
    }
  }
  model.learners.reserve(n_learners);
  for (std::uint32_t l = 0; l < n_learners; ++l) {
    BinarySvmModel learner;
    learner.kernel = kernel;
    learner.cost = cost;
    auto n_sv = get_le<std::uint32_t>(in, path);
    learner.bias = get_le<double>(in, path);
    learner.support_vectors.resize(n_sv, dim);
    learner.dual_coeffs.resize(n_sv);
    for (std::uint32_t i = 0; i < n_sv; ++i) {
      learner.dual_coeffs[i] = get_le<double>(in, path);
      for (std::uint32_t j = 0; j < dim; ++j) {
        learner.support_vectors(i, j) = get_le<double>(in, path);
      }
    }
    model.learners.push_back(std::move(learner));
  }
  model.validate();
  return model;
}

}  // namespace eigenspec::io
