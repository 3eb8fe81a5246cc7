#include "eigenspec/rla.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <string>

#include "eigenspec/errors.hpp"
#include "eigenspec/rng.hpp"

namespace eigenspec {

namespace {

Eigen::MatrixXd thin_q(const Eigen::MatrixXd& a) {
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(a);
  return qr.householderQ() *
         Eigen::MatrixXd::Identity(a.rows(), std::min(a.rows(), a.cols()));
}

// SVD sign ambiguity: flip each mode so its largest-magnitude entry is
// positive, keeping U and V consistent.
void fix_signs(SvdResult& result) {
  for (Eigen::Index j = 0; j < result.u.cols(); ++j) {
    Eigen::Index idx = 0;
    result.u.col(j).cwiseAbs().maxCoeff(&idx);
    if (result.u(idx, j) < 0.0) {
      result.u.col(j) = -result.u.col(j);
      if (j < result.v.cols()) result.v.col(j) = -result.v.col(j);
    }
  }
}

}  // namespace

void RsvdConfig::validate(Eigen::Index rows, Eigen::Index cols) const {
  if (target_rank < 1) {
    throw InvalidArgumentError("target_rank must be at least 1");
  }
  if (oversampling < 0 || power_iterations < 0) {
    throw InvalidArgumentError(
        "oversampling and power_iterations must be non-negative");
  }
  if (retained_components < 1 || retained_components > target_rank) {
    throw InvalidArgumentError(
        "retained_components must lie in [1, target_rank]");
  }
  const auto min_dim = std::min(rows, cols);
  if (target_rank + oversampling > min_dim) {
    throw InvalidArgumentError(
        "target_rank + oversampling = " +
        std::to_string(target_rank + oversampling) +
        " exceeds min(n, m) = " + std::to_string(min_dim));
  }
}

Eigen::VectorXd mean_center_inplace(Eigen::MatrixXd& x) {
  if (x.cols() < 2) {
    throw InvalidArgumentError("mean centering needs at least 2 columns");
  }
  Eigen::VectorXd mean = x.rowwise().mean();
  x.colwise() -= mean;
  return mean;
}

std::pair<Eigen::MatrixXd, Eigen::VectorXd> mean_center(
    const Eigen::MatrixXd& x) {
  Eigen::MatrixXd b = x;
  Eigen::VectorXd mean = mean_center_inplace(b);
  return {std::move(b), std::move(mean)};
}

SvdResult rsvd(const Eigen::MatrixXd& b, const RsvdConfig& cfg) {
  cfg.validate(b.rows(), b.cols());
  const Eigen::Index sketch_width = cfg.target_rank + cfg.oversampling;

  Rng rng(derive_seed(cfg.rng_seed, "gaussian-sketch"));
  Eigen::MatrixXd projection(b.cols(), sketch_width);
  for (Eigen::Index j = 0; j < sketch_width; ++j) {
    for (Eigen::Index i = 0; i < b.cols(); ++i) {
      projection(i, j) = rng.normal();
    }
  }

  Eigen::MatrixXd q = thin_q(b * projection);
  for (int it = 0; it < cfg.power_iterations; ++it) {
    Eigen::MatrixXd w = thin_q(b.transpose() * q);
    q = thin_q(b * w);
  }

  Eigen::MatrixXd y = q.transpose() * b;  // sketch_width x m
  Eigen::BDCSVD<Eigen::MatrixXd> svd(y,
                                     Eigen::ComputeThinU | Eigen::ComputeThinV);

  SvdResult result;
  result.u = (q * svd.matrixU()).leftCols(cfg.target_rank);
  result.sigma = svd.singularValues().head(cfg.target_rank);
  result.v = svd.matrixV().leftCols(cfg.target_rank);
  fix_signs(result);
  return result;
}

SvdResult svd_deterministic(const Eigen::MatrixXd& b) {
  if (b.size() == 0) {
    throw InvalidArgumentError("cannot factorize an empty matrix");
  }
  const Eigen::Index n = b.rows();
  const Eigen::Index m = b.cols();
  const Eigen::Index min_dim = std::min(n, m);

  SvdResult result;
  // Dense SVD keeps full relative accuracy on small spectra; the Gram route
  // only serves strongly rectangular matrices where the dominant modes are
  // all that matters.
  if (min_dim <= 512 || std::max(n, m) < 4 * min_dim) {
    Eigen::BDCSVD<Eigen::MatrixXd> svd(
        b, Eigen::ComputeThinU | Eigen::ComputeThinV);
    result.u = svd.matrixU();
    result.sigma = svd.singularValues();
    result.v = svd.matrixV();
  } else if (m < n) {
    Eigen::MatrixXd gram = b.transpose() * b;  // m x m
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(gram);
    // Eigenvalues arrive ascending; reverse into singular-value order.
    Eigen::VectorXd values = eig.eigenvalues().reverse();
    Eigen::MatrixXd vectors = eig.eigenvectors().rowwise().reverse();
    result.sigma = values.cwiseMax(0.0).cwiseSqrt();
    result.v = vectors;
    result.u.resize(n, m);
    const double cutoff =
        result.sigma.size() > 0 ? result.sigma[0] * 1e-14 : 0.0;
    Eigen::Index usable = 0;
    while (usable < m && result.sigma[usable] > cutoff) ++usable;
    result.u.leftCols(usable) =
        (b * vectors.leftCols(usable)) *
        result.sigma.head(usable).cwiseInverse().asDiagonal();
    if (usable < m) {
      result.u.rightCols(m - usable).setZero();
      result.sigma.tail(m - usable).setZero();
    }
  } else {
    SvdResult t = svd_deterministic(b.transpose());
    result.u = std::move(t.v);
    result.sigma = std::move(t.sigma);
    result.v = std::move(t.u);
  }
  fix_signs(result);
  return result;
}

double eigenproblem_check(const Eigen::MatrixXd& b, const Eigen::MatrixXd& u,
                          const Eigen::VectorXd& sigma) {
  if (u.cols() != sigma.size()) {
    throw InvalidArgumentError("mode count and singular value count differ");
  }
  double worst = 0.0;
  for (Eigen::Index j = 0; j < u.cols(); ++j) {
    const double s2 = sigma[j] * sigma[j];
    if (s2 == 0.0) continue;
    // B (B^T u_j) avoids ever forming the n x n correlation matrix.
    Eigen::VectorXd residual = b * (b.transpose() * u.col(j)) - s2 * u.col(j);
    worst = std::max(worst, residual.norm() / s2);
  }
  return worst;
}

void EigenBasis::validate() const {
  if (modes.cols() != singular_values.size()) {
    throw InvalidArgumentError("mode count and singular value count differ");
  }
  if (modes.rows() != mean_image.size()) {
    throw InvalidArgumentError("mode length and mean image length differ");
  }
  for (Eigen::Index j = 0; j < modes.cols(); ++j) {
    if (std::fabs(modes.col(j).norm() - 1.0) > 1e-10) {
      throw DataError("eigen-spectrogram " + std::to_string(j) +
                      " is not unit norm");
    }
    for (Eigen::Index i = 0; i < j; ++i) {
      if (std::fabs(modes.col(i).dot(modes.col(j))) > 1e-8) {
        throw DataError("eigen-spectrograms " + std::to_string(i) + " and " +
                        std::to_string(j) + " are not orthogonal");
      }
    }
    if (j > 0 && singular_values[j] > singular_values[j - 1]) {
      throw DataError("singular values are not sorted non-increasing");
    }
    if (singular_values[j] < 0.0) {
      throw DataError("negative singular value");
    }
  }
}

EigenBasis truncate_basis(const Eigen::MatrixXd& u,
                          const Eigen::VectorXd& sigma,
                          const Eigen::VectorXd& mean_image, int k) {
  if (k < 1 || k > u.cols()) {
    throw InvalidArgumentError("cannot keep " + std::to_string(k) +
                               " of " + std::to_string(u.cols()) + " modes");
  }
  EigenBasis basis{mean_image, u.leftCols(k), sigma.head(k)};
  basis.validate();
  return basis;
}

FeatureMatrix project_features(const Eigen::MatrixXd& centered,
                               const EigenBasis& basis,
                               std::vector<ClassLabel> labels) {
  if (centered.rows() != basis.modes.rows()) {
    throw InvalidArgumentError(
        "sample length " + std::to_string(centered.rows()) +
        " does not match basis length " + std::to_string(basis.modes.rows()));
  }
  if (!labels.empty() &&
      labels.size() != static_cast<std::size_t>(centered.cols())) {
    throw InvalidArgumentError("label count does not match sample count");
  }
  FeatureMatrix out;
  out.features = centered.transpose() * basis.modes;  // m x k
  out.labels = std::move(labels);
  return out;
}

}  // namespace eigenspec
