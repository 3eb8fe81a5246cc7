#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <vector>

#include "eigenspec/class_label.hpp"
#include "eigenspec/rla.hpp"

namespace eigenspec {

enum class KernelKind { Linear, Polynomial };

// Kernel K(x, z) = (x.z + offset)^degree for Polynomial, x.z for Linear.
// The default is the quadratic kernel (x.z + 1)^2. A non-negative offset
// keeps the kernel positive semidefinite.
struct KernelSpec {
  KernelKind kind = KernelKind::Polynomial;
  int degree = 2;
  double offset = 1.0;

  void validate() const;
};

double kernel_eval(const Eigen::Ref<const Eigen::VectorXd>& x,
                   const Eigen::Ref<const Eigen::VectorXd>& z,
                   const KernelSpec& spec);

// Stopping tolerance and pair-update cap for the SMO dual solver.
struct SmoOptions {
  double tolerance = 1e-3;
  long max_pair_updates = 1'000'000;
};

// Soft-margin binary SVM in dual form: f(x) = sum_i c_i K(x_i, x) + bias
// with c_i = alpha_i * y_i over the support vectors.
struct BinarySvmModel {
  Eigen::MatrixXd support_vectors;  // one row per support vector
  Eigen::VectorXd dual_coeffs;      // alpha_i * y_i
  double bias = 0.0;
  KernelSpec kernel;
  double cost = 1.0;

  double decision(const Eigen::Ref<const Eigen::VectorXd>& x) const;
};

// Trains by SMO: repeatedly selects the maximal-violating pair of dual
// variables and optimizes them jointly until the KKT gap drops below
// tolerance. The bias is averaged over margin (free) support vectors, or
// taken as the midpoint of the feasible interval when none are free.
// When alpha_out is given it receives the full dual vector (one entry per
// training point), which the KKT certificate needs.
BinarySvmModel train_binary(const Eigen::MatrixXd& x,
                            const Eigen::VectorXi& y, double cost,
                            const KernelSpec& kernel,
                            const SmoOptions& options = {},
                            Eigen::VectorXd* alpha_out = nullptr);

// Largest KKT violation of a trained model over its training set; the
// convergence certificate asserts this stays within the solver tolerance.
double kkt_max_violation(const BinarySvmModel& model, const Eigen::MatrixXd& x,
                         const Eigen::VectorXi& y,
                         const Eigen::VectorXd& alpha);

enum class EcocCoding { OneVsOne, OneVsAll };

struct SvmConfig {
  double cost = 1.0;
  KernelSpec kernel;
  EcocCoding coding = EcocCoding::OneVsOne;
  bool standardize = false;
  SmoOptions smo;
  int folds = 5;
};

// Error-correcting output codes multiclass model: a {-1, 0, +1} coding matrix
// (classes x learners) and one binary learner per column. Rows with 0 exclude
// that class's samples from the learner.
struct EcocSvmModel {
  std::vector<ClassLabel> classes;  // canonical (sorted) order
  Eigen::MatrixXi coding;           // classes x learners
  std::vector<BinarySvmModel> learners;
  bool standardize = false;
  Eigen::VectorXd feature_mean;   // used only when standardize is set
  Eigen::VectorXd feature_scale;  // "

  void validate() const;
};

Eigen::MatrixXi make_coding_matrix(int n_classes, EcocCoding coding);

EcocSvmModel ecoc_train(const FeatureMatrix& fm, const SvmConfig& cfg);

struct Prediction {
  ClassLabel label;
  Eigen::VectorXd class_losses;  // aligned with model.classes
};

// Loss-based decoding: per class, mean hinge loss of the coded learner
// outputs over that class's nonzero coding entries; lowest loss wins, ties
// break toward the lowest class index.
Prediction ecoc_predict(const EcocSvmModel& model,
                        const Eigen::Ref<const Eigen::VectorXd>& x);

struct CvResult {
  std::vector<double> fold_accuracies;
  double mean_accuracy = 0.0;
};

// Stratified seeded k-fold cross-validation; per-class fold sizes differ by
// at most one. Every class must have at least `folds` samples.
CvResult cross_validate(const FeatureMatrix& fm, const SvmConfig& cfg,
                        int folds, std::uint64_t seed);

}  // namespace eigenspec
