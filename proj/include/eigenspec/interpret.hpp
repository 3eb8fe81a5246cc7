#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <string>
#include <vector>

#include "eigenspec/class_label.hpp"
#include "eigenspec/rla.hpp"

namespace eigenspec {

// Per-sample interpretation: gamma is the fraction of the sample's energy
// captured by the retained eigen-spectrograms; thetas are the relative
// contributions of each mode to that explainable part (non-negative, sum 1).
struct InterpretationRecord {
  int sample_id = 0;
  double gamma = 0.0;
  Eigen::VectorXd thetas;
};

// Explained-energy fraction Gamma = sum_j F_j^2 / ||b||^2 where F_j = b.u_j.
// Bessel's inequality keeps it in [0, 1]; rounding residue is clamped.
// A zero-norm sample has no defined interpretation.
double gamma(const Eigen::VectorXd& centered_sample, const EigenBasis& basis,
             const Eigen::VectorXd& feature_row);

// Interpretation coefficients theta_j = F_j^2 / (Gamma ||b||^2), i.e. the
// share of the explained energy carried by mode j. Undefined (error) when the
// sample is orthogonal to every retained mode.
Eigen::VectorXd thetas(const Eigen::VectorXd& centered_sample,
                       const EigenBasis& basis,
                       const Eigen::VectorXd& feature_row);

// Convenience: projects the sample and assembles the full record.
InterpretationRecord interpret_sample(int sample_id,
                                      const Eigen::VectorXd& centered_sample,
                                      const EigenBasis& basis);

struct ClassMeanRow {
  ClassLabel label;
  Eigen::VectorXd mean_thetas;
  double mean_gamma = 0.0;
  int n_samples = 0;
};

struct ClassMeanReport {
  std::vector<ClassMeanRow> rows;           // sorted by class label
  std::vector<std::string> warnings;        // clamped or skipped classes
};

// Per-class arithmetic mean of theta vectors over up to n_per_class samples
// drawn without replacement (seeded). Classes smaller than the request use
// all their samples and emit a warning.
ClassMeanReport class_mean_report(const std::vector<InterpretationRecord>& records,
                                  const std::vector<ClassLabel>& labels,
                                  int n_per_class, std::uint64_t seed);

}  // namespace eigenspec
