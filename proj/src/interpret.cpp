#include "eigenspec/interpret.hpp"

#include <algorithm>
#include <map>

#include "eigenspec/errors.hpp"
#include "eigenspec/rng.hpp"

namespace eigenspec {

double gamma(const Eigen::VectorXd& centered_sample, const EigenBasis& basis,
             const Eigen::VectorXd& feature_row) {
  if (centered_sample.size() != basis.modes.rows()) {
    throw InvalidArgumentError("sample length does not match basis length");
  }
  if (feature_row.size() != basis.modes.cols()) {
    throw InvalidArgumentError("feature row length does not match mode count");
  }
  const double energy = centered_sample.squaredNorm();
  if (energy == 0.0) {
    throw DataError("interpretation undefined for a zero-norm sample");
  }
  return std::clamp(feature_row.squaredNorm() / energy, 0.0, 1.0);
}

Eigen::VectorXd thetas(const Eigen::VectorXd& centered_sample,
                       const EigenBasis& basis,
                       const Eigen::VectorXd& feature_row) {
  // Validates dimensions and the zero-norm case.
  (void)gamma(centered_sample, basis, feature_row);
  // Gamma * ||b||^2 equals the explained energy sum_j F_j^2 identically, so
  // normalizing by the sum keeps sum(theta) = 1 to rounding.
  const double explained = feature_row.squaredNorm();
  if (explained == 0.0) {
    throw DataError(
        "interpretation undefined: sample is orthogonal to every mode");
  }
  return feature_row.array().square() / explained;
}

InterpretationRecord interpret_sample(int sample_id,
                                      const Eigen::VectorXd& centered_sample,
                                      const EigenBasis& basis) {
  Eigen::VectorXd feature_row = basis.modes.transpose() * centered_sample;
  InterpretationRecord record;
  record.sample_id = sample_id;
  record.gamma = gamma(centered_sample, basis, feature_row);
  record.thetas = thetas(centered_sample, basis, feature_row);
  return record;
}

ClassMeanReport class_mean_report(
    const std::vector<InterpretationRecord>& records,
    const std::vector<ClassLabel>& labels, int n_per_class,
    std::uint64_t seed) {
  if (records.size() != labels.size()) {
    throw InvalidArgumentError("record count does not match label count");
  }
  if (n_per_class < 1) {
    throw InvalidArgumentError("n_per_class must be at least 1");
  }

  std::map<ClassLabel, std::vector<std::size_t>> by_class;
  for (std::size_t i = 0; i < records.size(); ++i) {
    by_class[labels[i]].push_back(i);
  }

  ClassMeanReport report;
  std::uint64_t class_index = 0;
  for (auto& [label, indices] : by_class) {
    const auto requested = static_cast<std::size_t>(n_per_class);
    std::size_t take = indices.size();
    if (indices.size() > requested) {
      Rng rng(derive_seed(seed, "class-mean-sample", class_index));
      rng.shuffle(indices);
      take = requested;
    } else if (indices.size() < requested) {
      report.warnings.push_back("class " + label.str() + " has only " +
                                std::to_string(indices.size()) +
                                " samples; requested " +
                                std::to_string(requested) + ", using all");
    }
    ++class_index;

    ClassMeanRow row;
    row.label = label;
    row.n_samples = static_cast<int>(take);
    row.mean_thetas =
        Eigen::VectorXd::Zero(records[indices.front()].thetas.size());
    for (std::size_t i = 0; i < take; ++i) {
      const auto& rec = records[indices[i]];
      row.mean_thetas += rec.thetas;
      row.mean_gamma += rec.gamma;
    }
    row.mean_thetas /= static_cast<double>(take);
    row.mean_gamma /= static_cast<double>(take);
    report.rows.push_back(std::move(row));
  }
  return report;
}

}  // namespace eigenspec
