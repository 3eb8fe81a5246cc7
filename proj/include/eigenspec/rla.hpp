#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <utility>
#include <vector>

#include "eigenspec/class_label.hpp"

namespace eigenspec {

// Randomized SVD configuration. The pipeline default (rank 110, no
// oversampling, no power iterations, 4 retained components) mirrors the
// published setup; oversampling and power iterations are exposed because they
// tighten subspace accuracy when needed.
struct RsvdConfig {
  int target_rank = 110;
  int oversampling = 0;
  int power_iterations = 0;
  int retained_components = 4;
  std::uint64_t rng_seed = 0;

  void validate(Eigen::Index rows, Eigen::Index cols) const;
};

// Truncated factorization B ~ U diag(sigma) V^T with column-orthonormal U, V.
struct SvdResult {
  Eigen::MatrixXd u;      // n x r
  Eigen::VectorXd sigma;  // r, non-negative, non-increasing
  Eigen::MatrixXd v;      // m x r
};

// Mean spectrogram plus the retained eigen-spectrogram modes.
struct EigenBasis {
  Eigen::VectorXd mean_image;      // length n
  Eigen::MatrixXd modes;           // n x k, column-orthonormal
  Eigen::VectorXd singular_values; // length k, non-increasing

  int component_count() const { return static_cast<int>(modes.cols()); }
  void validate() const;
};

// Per-sample coordinates in the eigen-spectrogram space: row i holds the
// scalar products of centered sample i with each retained mode.
struct FeatureMatrix {
  Eigen::MatrixXd features;        // m x k
  std::vector<ClassLabel> labels;  // length m
};

// Subtracts the row-wise mean in place and returns it. Requires >= 2 columns.
Eigen::VectorXd mean_center_inplace(Eigen::MatrixXd& x);

// Copying variant: returns (centered matrix, mean vector).
std::pair<Eigen::MatrixXd, Eigen::VectorXd> mean_center(
    const Eigen::MatrixXd& x);

// Randomized SVD: Gaussian sketch Z = B P with P ~ N(0,1)^(m x (r+p)),
// QR range finding, projection Y = Q^T B, dense SVD of Y, back-projection
// U = Q U_Y. Optional power iterations re-orthonormalize between products.
// Mode signs are fixed so each column's largest-magnitude entry is positive.
SvdResult rsvd(const Eigen::MatrixXd& b, const RsvdConfig& cfg);

// Deterministic economy SVD with the same sign convention. Strongly
// rectangular matrices go through the Gram matrix of the short side
// (eigendecomposition), which is exact for the dominant modes and avoids a
// dense bidiagonalization of the tall side; small or near-square matrices use
// a dense SVD directly.
SvdResult svd_deterministic(const Eigen::MatrixXd& b);

// Diagnostic residual of the PCA eigenproblem: max over modes of
// ||B (B^T u_j) - sigma_j^2 u_j|| / sigma_j^2. Modes with sigma_j = 0 are
// skipped; returns 0 when nothing is checkable.
double eigenproblem_check(const Eigen::MatrixXd& b, const Eigen::MatrixXd& u,
                          const Eigen::VectorXd& sigma);

// Keeps the first k modes/values and validates orthonormality.
EigenBasis truncate_basis(const Eigen::MatrixXd& u,
                          const Eigen::VectorXd& sigma,
                          const Eigen::VectorXd& mean_image, int k);

// Projects centered columns onto the basis: F = B^T U_k. Test data must be
// centered with the training mean. Row i of the result is sample i's feature
// vector.
FeatureMatrix project_features(const Eigen::MatrixXd& centered,
                               const EigenBasis& basis,
                               std::vector<ClassLabel> labels);

}  // namespace eigenspec
