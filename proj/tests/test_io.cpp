#include <doctest.h>

#include <Eigen/Dense>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <unistd.h>

#include "eigenspec/errors.hpp"
#include "eigenspec/io.hpp"
#include "eigenspec/rng.hpp"

using namespace eigenspec;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& tag) {
    path = fs::temp_directory_path() /
           ("eigenspec_io_" + tag + "_" + std::to_string(::getpid()));
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

Signal make_signal(std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  Signal sig;
  sig.sample_rate_hz = 12000.0;
  sig.label = ClassLabel::parse("IR2");
  sig.samples.resize(n);
  for (double& v : sig.samples) v = rng.uniform(-1.0, 1.0);
  return sig;
}

}  // namespace

TEST_CASE("csv signals round-trip exactly") {
  TempDir tmp("csv");
  Signal sig = make_signal(500, 1);
  fs::path path = tmp.path / "sig.csv";
  io::write_signal_csv(path, sig);
  Signal back = io::read_signal_csv(path);
  CHECK(back.sample_rate_hz == sig.sample_rate_hz);
  REQUIRE(back.label.has_value());
  CHECK(back.label->str() == "IR2");
  CHECK(back.samples == sig.samples);  // %.17g preserves doubles
}

TEST_CASE("f32 signals round-trip to float precision") {
  TempDir tmp("f32");
  Signal sig = make_signal(500, 2);
  fs::path path = tmp.path / "sig.f32raw";
  io::write_signal_f32(path, sig);
  CHECK(fs::exists(tmp.path / "sig.f32raw.meta"));
  Signal back = io::read_signal_f32(path);
  CHECK(back.samples.size() == sig.samples.size());
  for (std::size_t i = 0; i < sig.samples.size(); ++i) {
    CHECK(back.samples[i] ==
          doctest::Approx(sig.samples[i]).epsilon(1e-7));
  }
}

TEST_CASE("signals with missing metadata are rejected") {
  TempDir tmp("meta");
  fs::path path = tmp.path / "bad.csv";
  {
    std::ofstream out(path);
    out << "0.5\n0.25\n";  // no header lines at all
  }
  CHECK_THROWS_AS(io::read_signal_csv(path), DataError);

  fs::path orphan = tmp.path / "orphan.f32raw";
  {
    std::ofstream out(orphan, std::ios::binary);
    out << "xxxx";
  }
  CHECK_THROWS_AS(io::read_signal_f32(orphan), DataError);

  fs::path unlabeled = tmp.path / "nolabel.csv";
  {
    std::ofstream out(unlabeled);
    out << "sample_rate=48000\nlabel=\n1.0\n2.0\n";
  }
  Signal sig = io::read_signal_csv(unlabeled);
  CHECK(!sig.label.has_value());  // parses, but carries no label
  CHECK(sig.sample_rate_hz == 48000.0);
}

TEST_CASE("pgm quantization stays within one gray level") {
  TempDir tmp("pgm");
  Rng rng(3);
  Eigen::MatrixXd img(64, 48);
  for (Eigen::Index c = 0; c < img.cols(); ++c) {
    for (Eigen::Index r = 0; r < img.rows(); ++r) {
      img(r, c) = rng.uniform();
    }
  }
  fs::path path = tmp.path / "img.pgm";
  io::write_pgm(path, img);
  Eigen::MatrixXd back = io::read_pgm(path);
  CHECK(back.rows() == img.rows());
  CHECK(back.cols() == img.cols());
  CHECK((back - img).cwiseAbs().maxCoeff() <= 0.5 / 255.0 + 1e-12);
}

TEST_CASE("dataset matrices round-trip bit-exactly") {
  TempDir tmp("dataset");
  Rng rng(4);
  DatasetMatrix ds;
  ds.data.resize(20, 6);
  for (Eigen::Index c = 0; c < 6; ++c) {
    for (Eigen::Index r = 0; r < 20; ++r) ds.data(r, c) = rng.normal();
  }
  for (int i = 0; i < 6; ++i) {
    ds.labels.push_back(ClassLabel::parse(i % 2 == 0 ? "B1" : "OR3"));
  }
  fs::path path = tmp.path / "data.espc";
  io::write_dataset(path, ds);
  DatasetMatrix back = io::read_dataset(path);
  CHECK((back.data - ds.data).cwiseAbs().maxCoeff() == 0.0);
  CHECK(back.labels == ds.labels);
}

TEST_CASE("bases round-trip and reject corrupted files") {
  TempDir tmp("basis");
  Rng rng(5);
  Eigen::MatrixXd m(30, 8);
  for (Eigen::Index c = 0; c < 8; ++c) {
    for (Eigen::Index r = 0; r < 30; ++r) m(r, c) = rng.normal();
  }
  auto [b, mean] = mean_center(m);
  SvdResult f = svd_deterministic(b);
  EigenBasis basis = truncate_basis(f.u, f.sigma, mean, 4);

  fs::path path = tmp.path / "basis.espb";
  io::write_basis(path, basis);
  EigenBasis back = io::read_basis(path);
  CHECK((back.modes - basis.modes).cwiseAbs().maxCoeff() == 0.0);
  CHECK((back.mean_image - basis.mean_image).cwiseAbs().maxCoeff() == 0.0);
  CHECK((back.singular_values - basis.singular_values).cwiseAbs().maxCoeff() ==
        0.0);

  // Wrong magic is a data error.
  fs::path bogus = tmp.path / "bogus.espb";
  {
    std::ofstream out(bogus, std::ios::binary);
    out << "NOPE!doesnotmatter";
  }
  CHECK_THROWS_AS(io::read_basis(bogus), DataError);
}

TEST_CASE("models round-trip with identical decisions") {
  TempDir tmp("model");
  Rng rng(6);
  FeatureMatrix fm;
  fm.features.resize(30, 3);
  for (Eigen::Index r = 0; r < 30; ++r) {
    const int cls = static_cast<int>(r) / 10;
    for (Eigen::Index c = 0; c < 3; ++c) {
      fm.features(r, c) = 4.0 * cls + 0.3 * rng.normal();
    }
    fm.labels.push_back(
        ClassLabel::parse(cls == 0 ? "B1" : (cls == 1 ? "IR1" : "OR1")));
  }
  SvmConfig cfg;
  cfg.standardize = true;
  EcocSvmModel model = ecoc_train(fm, cfg);

  fs::path path = tmp.path / "model.espm";
  io::write_model(path, model);
  EcocSvmModel back = io::read_model(path);

  CHECK(back.classes == model.classes);
  CHECK((back.coding - model.coding).cwiseAbs().maxCoeff() == 0);
  CHECK(back.standardize == model.standardize);
  for (Eigen::Index i = 0; i < fm.features.rows(); ++i) {
    Prediction a = ecoc_predict(model, fm.features.row(i).transpose());
    Prediction b = ecoc_predict(back, fm.features.row(i).transpose());
    CHECK(a.label == b.label);
    CHECK((a.class_losses - b.class_losses).cwiseAbs().maxCoeff() == 0.0);
  }
}
