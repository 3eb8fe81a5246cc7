#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <vector>

#include "eigenspec/errors.hpp"
#include "eigenspec/rng.hpp"
#include "eigenspec/svm.hpp"
#include "qp_oracle.hpp"

using namespace eigenspec;

namespace {

KernelSpec quadratic() { return KernelSpec{KernelKind::Polynomial, 2, 1.0}; }
KernelSpec linear() { return KernelSpec{KernelKind::Linear, 1, 0.0}; }

FeatureMatrix blob_features(int per_class, std::uint64_t seed) {
  // Three well-separated Gaussian blobs in 2D.
  const std::vector<std::pair<double, double>> centers = {
      {0.0, 0.0}, {6.0, 0.0}, {0.0, 6.0}};
  const std::vector<const char*> names = {"B1", "IR1", "OR1"};
  Rng rng(seed);
  FeatureMatrix fm;
  fm.features.resize(3 * per_class, 2);
  for (int c = 0; c < 3; ++c) {
    for (int i = 0; i < per_class; ++i) {
      const Eigen::Index row = c * per_class + i;
      fm.features(row, 0) = centers[c].first + 0.5 * rng.normal();
      fm.features(row, 1) = centers[c].second + 0.5 * rng.normal();
      fm.labels.push_back(ClassLabel::parse(names[c]));
    }
  }
  return fm;
}

}  // namespace

TEST_CASE("kernel evaluation follows the polynomial form") {
  Eigen::VectorXd x(2);
  Eigen::VectorXd z(2);
  x << 1.0, 0.0;
  z << 0.0, 1.0;
  CHECK(kernel_eval(x, z, quadratic()) == 1.0);  // orthogonal: (0 + 1)^2

  Eigen::VectorXd ones = Eigen::VectorXd::Ones(4);
  CHECK(kernel_eval(ones, ones, quadratic()) == 25.0);  // (4 + 1)^2

  CHECK(kernel_eval(x, z, linear()) == 0.0);

  Eigen::VectorXd longer = Eigen::VectorXd::Ones(3);
  CHECK_THROWS_AS(kernel_eval(x, longer, quadratic()), InvalidArgumentError);
}

TEST_CASE("kernel gram matrices are positive semidefinite") {
  Rng rng(17);
  Eigen::MatrixXd points(10, 3);
  for (Eigen::Index r = 0; r < 10; ++r) {
    for (Eigen::Index c = 0; c < 3; ++c) points(r, c) = rng.normal();
  }
  for (const KernelSpec& spec : {quadratic(), linear()}) {
    Eigen::MatrixXd gram(10, 10);
    for (Eigen::Index i = 0; i < 10; ++i) {
      for (Eigen::Index j = 0; j < 10; ++j) {
        gram(i, j) = kernel_eval(points.row(i).transpose(),
                                 points.row(j).transpose(), spec);
      }
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(gram);
    CHECK(eig.eigenvalues().minCoeff() >= -1e-10);
    CHECK((gram - gram.transpose()).cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("the quadratic kernel separates XOR") {
  Eigen::MatrixXd x(4, 2);
  x << 0, 0, 1, 1, 0, 1, 1, 0;
  Eigen::VectorXi y(4);
  y << 1, 1, -1, -1;
  BinarySvmModel model = train_binary(x, y, 10.0, quadratic());
  for (int i = 0; i < 4; ++i) {
    CHECK(y[i] * model.decision(x.row(i).transpose()) > 0.0);
  }
}

TEST_CASE("the 1D four-point problem has its boundary at zero") {
  Eigen::MatrixXd x(4, 1);
  x << -2.0, -1.0, 1.0, 2.0;
  Eigen::VectorXi y(4);
  y << -1, -1, 1, 1;
  SmoOptions opts;
  opts.tolerance = 1e-8;
  Eigen::VectorXd alpha;
  BinarySvmModel model = train_binary(x, y, 100.0, linear(), opts, &alpha);

  CHECK(model.bias == doctest::Approx(0.0).epsilon(1e-6));
  Eigen::VectorXd origin = Eigen::VectorXd::Zero(1);
  CHECK(model.decision(origin) == doctest::Approx(0.0).epsilon(1e-6));

  // Support vectors are the inner pair {-1, +1} with alpha = 0.5 each.
  REQUIRE(model.support_vectors.rows() == 2);
  CHECK(std::fabs(model.support_vectors(0, 0)) ==
        doctest::Approx(1.0).epsilon(1e-9));
  CHECK(std::fabs(model.support_vectors(1, 0)) ==
        doctest::Approx(1.0).epsilon(1e-9));
  CHECK(alpha[0] == doctest::Approx(0.0).epsilon(1e-9));
  CHECK(alpha[3] == doctest::Approx(0.0).epsilon(1e-9));
  CHECK(alpha[1] == doctest::Approx(0.5).epsilon(1e-6));
  CHECK(alpha[2] == doctest::Approx(0.5).epsilon(1e-6));

  // The brute-force dual maximizer lands on the same solution.
  qp_oracle::Solution oracle = qp_oracle::solve(x, y, 100.0, linear());
  REQUIRE(oracle.found);
  for (int i = 0; i < 4; ++i) {
    CHECK(model.decision(x.row(i).transpose()) ==
          doctest::Approx(oracle.decision(x, y, linear(), x.row(i).transpose()))
              .epsilon(1e-6));
  }
}

TEST_CASE("duplicated training points leave the decision unchanged") {
  Eigen::MatrixXd x(6, 2);
  x << 0, 0, 1, 1, 2, 0, 0, 2, 1.5, 1.5, 0.5, 0.3;
  Eigen::VectorXi y(6);
  y << 1, 1, -1, -1, -1, 1;
  SmoOptions opts;
  opts.tolerance = 1e-9;
  BinarySvmModel base = train_binary(x, y, 5.0, quadratic(), opts);

  Eigen::MatrixXd x2(12, 2);
  x2 << x, x;
  Eigen::VectorXi y2(12);
  y2 << y, y;
  BinarySvmModel doubled = train_binary(x2, y2, 5.0, quadratic(), opts);

  Rng rng(3);
  for (int t = 0; t < 20; ++t) {
    Eigen::VectorXd p(2);
    p << rng.uniform(-1.0, 3.0), rng.uniform(-1.0, 3.0);
    CHECK(base.decision(p) ==
          doctest::Approx(doubled.decision(p)).epsilon(1e-6));
  }
}

TEST_CASE("single-class training is a degenerate problem") {
  Eigen::MatrixXd x(3, 1);
  x << 1, 2, 3;
  Eigen::VectorXi y(3);
  y << 1, 1, 1;
  CHECK_THROWS_AS(train_binary(x, y, 1.0, linear()), DataError);
}

TEST_CASE("smo matches the enumeration oracle on random tiny problems") {
  Rng rng(2024);
  int checked = 0;
  for (int instance = 0; instance < 12; ++instance) {
    const int n = 3 + static_cast<int>(rng.bounded(5));  // up to 7 points
    const int d = 1 + static_cast<int>(rng.bounded(3));
    Eigen::MatrixXd x(n, d);
    Eigen::VectorXi y(n);
    bool pos = false;
    bool neg = false;
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < d; ++j) x(i, j) = rng.uniform(-2.0, 2.0);
      y[i] = rng.uniform() < 0.5 ? -1 : 1;
      (y[i] == 1 ? pos : neg) = true;
    }
    if (!pos || !neg) continue;
    const double cost = (instance % 2 == 0) ? 1.0 : 10.0;
    const KernelSpec kernel = (instance % 3 == 0) ? linear() : quadratic();

    qp_oracle::Solution oracle = qp_oracle::solve(x, y, cost, kernel);
    REQUIRE(oracle.found);

    SmoOptions opts;
    opts.tolerance = 1e-8;
    Eigen::VectorXd alpha;
    BinarySvmModel model = train_binary(x, y, cost, kernel, opts, &alpha);

    for (int i = 0; i < n; ++i) {
      CHECK(model.decision(x.row(i).transpose()) ==
            doctest::Approx(
                oracle.decision(x, y, kernel, x.row(i).transpose()))
                .epsilon(1e-4));
    }
    // Dual feasibility of the SMO iterate.
    CHECK(std::fabs((alpha.array() * y.cast<double>().array()).sum()) < 1e-9);
    CHECK(alpha.minCoeff() >= 0.0);
    CHECK(alpha.maxCoeff() <= cost);
    // and the KKT certificate at the reporting tolerance.
    CHECK(kkt_max_violation(model, x, y, alpha) <= 1e-3);
    ++checked;
  }
  CHECK(checked >= 8);
}

TEST_CASE("non-convergence surfaces as a diagnostic error") {
  Eigen::MatrixXd x(4, 2);
  x << 0, 0, 1, 1, 0, 1, 1, 0;
  Eigen::VectorXi y(4);
  y << 1, 1, -1, -1;
  SmoOptions opts;
  opts.tolerance = 1e-12;
  opts.max_pair_updates = 2;  // cannot possibly finish
  try {
    train_binary(x, y, 10.0, quadratic(), opts);
    FAIL("expected ConvergenceError");
  } catch (const ConvergenceError& e) {
    CHECK(e.gap() > 0.0);
  }
}

TEST_CASE("coding matrices have the advertised shapes") {
  Eigen::MatrixXi ovo = make_coding_matrix(12, EcocCoding::OneVsOne);
  CHECK(ovo.rows() == 12);
  CHECK(ovo.cols() == 66);  // 12 * 11 / 2
  Eigen::MatrixXi ova = make_coding_matrix(12, EcocCoding::OneVsAll);
  CHECK(ova.cols() == 12);
  for (Eigen::Index c = 0; c < ovo.cols(); ++c) {
    CHECK(ovo.col(c).cwiseEqual(1).count() == 1);
    CHECK(ovo.col(c).cwiseEqual(-1).count() == 1);
  }
}

TEST_CASE("two-class ECOC reduces to the single binary learner") {
  FeatureMatrix fm;
  fm.features.resize(8, 1);
  fm.features << -2, -1.5, -1, -0.5, 0.5, 1, 1.5, 2;
  for (int i = 0; i < 4; ++i) fm.labels.push_back(ClassLabel::parse("B1"));
  for (int i = 0; i < 4; ++i) fm.labels.push_back(ClassLabel::parse("IR1"));

  SvmConfig cfg;
  cfg.kernel = linear();
  cfg.cost = 10.0;
  EcocSvmModel model = ecoc_train(fm, cfg);
  CHECK(model.learners.size() == 1);

  for (Eigen::Index i = 0; i < fm.features.rows(); ++i) {
    Prediction p = ecoc_predict(model, fm.features.row(i).transpose());
    CHECK(p.label == fm.labels[static_cast<std::size_t>(i)]);
    // The prediction flips exactly with the learner's sign.
    const double f = model.learners[0].decision(fm.features.row(i).transpose());
    CHECK((f > 0.0) == (p.label == model.classes[0]));
  }
}

TEST_CASE("three-blob classification is clean and losses are ordered") {
  FeatureMatrix fm = blob_features(20, 4);
  SvmConfig cfg;
  EcocSvmModel model = ecoc_train(fm, cfg);
  CHECK(model.learners.size() == 3);

  Eigen::VectorXd deep(2);
  deep << 0.0, 6.0;  // far inside OR1's blob
  Prediction p = ecoc_predict(model, deep);
  CHECK(p.label == ClassLabel::parse("OR1"));
  const double own = p.class_losses[2];
  CHECK(own < p.class_losses[0]);
  CHECK(own < p.class_losses[1]);

  int correct = 0;
  for (Eigen::Index i = 0; i < fm.features.rows(); ++i) {
    correct += ecoc_predict(model, fm.features.row(i).transpose()).label ==
               fm.labels[static_cast<std::size_t>(i)];
  }
  CHECK(correct == fm.features.rows());
}

TEST_CASE("decoding equals the brute-force loss formula") {
  FeatureMatrix fm = blob_features(10, 5);
  SvmConfig cfg;
  EcocSvmModel model = ecoc_train(fm, cfg);

  Rng rng(6);
  for (int t = 0; t < 10; ++t) {
    Eigen::VectorXd p(2);
    p << rng.uniform(-2.0, 8.0), rng.uniform(-2.0, 8.0);
    Prediction pred = ecoc_predict(model, p);

    // Recompute the normalized hinge decoding from scratch.
    for (Eigen::Index c = 0; c < 3; ++c) {
      double loss = 0.0;
      int nnz = 0;
      for (Eigen::Index l = 0; l < model.coding.cols(); ++l) {
        if (model.coding(c, l) == 0) continue;
        const double f = model.learners[static_cast<std::size_t>(l)].decision(p);
        loss += std::max(0.0, 1.0 - model.coding(c, l) * f);
        ++nnz;
      }
      CHECK(pred.class_losses[c] ==
            doctest::Approx(loss / nnz).epsilon(1e-12));
    }
  }
}

TEST_CASE("relabeling classes permutes predictions consistently") {
  FeatureMatrix original = blob_features(15, 7);
  // Swap two class names; the geometry is untouched.
  FeatureMatrix renamed = original;
  for (auto& label : renamed.labels) {
    if (label == ClassLabel::parse("B1")) {
      label = ClassLabel::parse("OR9");
    } else if (label == ClassLabel::parse("OR1")) {
      label = ClassLabel::parse("B9");
    }
  }
  SvmConfig cfg;
  EcocSvmModel model_a = ecoc_train(original, cfg);
  EcocSvmModel model_b = ecoc_train(renamed, cfg);

  auto map_label = [](const ClassLabel& l) {
    if (l == ClassLabel::parse("B1")) return ClassLabel::parse("OR9");
    if (l == ClassLabel::parse("OR1")) return ClassLabel::parse("B9");
    return l;
  };
  Rng rng(8);
  for (int t = 0; t < 25; ++t) {
    Eigen::VectorXd p(2);
    p << rng.uniform(-2.0, 8.0), rng.uniform(-2.0, 8.0);
    CHECK(map_label(ecoc_predict(model_a, p).label) ==
          ecoc_predict(model_b, p).label);
  }
}

TEST_CASE("cross-validation is stratified, seeded and exact on easy data") {
  FeatureMatrix fm = blob_features(25, 9);
  SvmConfig cfg;
  CvResult cv = cross_validate(fm, cfg, 5, 42);
  CHECK(cv.fold_accuracies.size() == 5);
  for (double acc : cv.fold_accuracies) CHECK(acc == 1.0);
  CHECK(cv.mean_accuracy == 1.0);

  CvResult again = cross_validate(fm, cfg, 5, 42);
  CHECK(cv.fold_accuracies == again.fold_accuracies);

  // 25 per class over 5 folds: exactly 5 per class per fold, so fold sizes
  // are all 15; with 26 the largest and smallest fold differ by one class
  // sample.
  FeatureMatrix fm2 = blob_features(26, 9);
  CHECK_NOTHROW(cross_validate(fm2, cfg, 5, 1));

  FeatureMatrix tiny = blob_features(3, 10);
  CHECK_THROWS_AS(cross_validate(tiny, cfg, 5, 1), DataError);
}

TEST_CASE("standardization is honored at train and predict time") {
  FeatureMatrix fm = blob_features(15, 11);
  // Scale one feature so raw and standardized models genuinely differ.
  fm.features.col(1) *= 1000.0;
  SvmConfig cfg;
  cfg.standardize = true;
  EcocSvmModel model = ecoc_train(fm, cfg);
  CHECK(model.standardize);
  int correct = 0;
  for (Eigen::Index i = 0; i < fm.features.rows(); ++i) {
    correct += ecoc_predict(model, fm.features.row(i).transpose()).label ==
               fm.labels[static_cast<std::size_t>(i)];
  }
  CHECK(correct == fm.features.rows());
}

TEST_CASE("ecoc validation rejects malformed coding matrices") {
  FeatureMatrix fm = blob_features(5, 12);
  SvmConfig cfg;
  EcocSvmModel model = ecoc_train(fm, cfg);
  model.coding(0, 0) = 0;
  model.coding(1, 0) = 0;
  model.coding(2, 0) = 0;
  CHECK_THROWS_AS(model.validate(), InvalidArgumentError);
}
