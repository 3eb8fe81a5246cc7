#include "eigenspec/svm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <set>
#include <string>

#include "eigenspec/errors.hpp"
#include "eigenspec/rng.hpp"

namespace eigenspec {

void KernelSpec::validate() const {
  if (kind == KernelKind::Polynomial) {
    if (degree < 1) {
      throw InvalidArgumentError("polynomial degree must be at least 1");
    }
    if (offset < 0.0) {
      throw InvalidArgumentError("polynomial offset must be non-negative");
    }
  }
}

double kernel_eval(const Eigen::Ref<const Eigen::VectorXd>& x,
                   const Eigen::Ref<const Eigen::VectorXd>& z,
                   const KernelSpec& spec) {
  if (x.size() != z.size()) {
    throw InvalidArgumentError("kernel arguments differ in dimension");
  }
  spec.validate();
  const double dot = x.dot(z);
  if (spec.kind == KernelKind::Linear) return dot;
  return std::pow(dot + spec.offset, spec.degree);
}

double BinarySvmModel::decision(
    const Eigen::Ref<const Eigen::VectorXd>& x) const {
  double acc = bias;
  for (Eigen::Index i = 0; i < support_vectors.rows(); ++i) {
    acc += dual_coeffs[i] *
           kernel_eval(support_vectors.row(i).transpose(), x, kernel);
  }
  return acc;
}

namespace {

// Kernel matrix access with an optional full cache. Problems above the cache
// ceiling recompute columns on demand.
class KernelTable {
 public:
  static constexpr Eigen::Index kCacheLimit = 5000;

  KernelTable(const Eigen::MatrixXd& x, const KernelSpec& spec)
      : x_(x), spec_(spec) {
    const Eigen::Index n = x.rows();
    diag_.resize(n);
    if (n <= kCacheLimit) {
      gram_ = x * x.transpose();
      if (spec.kind == KernelKind::Polynomial) {
        gram_ = (gram_.array() + spec.offset).pow(spec.degree).matrix();
      }
      diag_ = gram_.diagonal();
      cached_ = true;
    } else {
      for (Eigen::Index i = 0; i < n; ++i) {
        diag_[i] = kernel_eval(x.row(i).transpose(), x.row(i).transpose(),
                               spec_);
      }
    }
  }

  double diag(Eigen::Index i) const { return diag_[i]; }

  // K(:, i), writing into `out`.
  void column(Eigen::Index i, Eigen::VectorXd& out) const {
    if (cached_) {
      out = gram_.col(i);
      return;
    }
    Eigen::VectorXd dots = x_ * x_.row(i).transpose();
    if (spec_.kind == KernelKind::Linear) {
      out = dots;
    } else {
      out = (dots.array() + spec_.offset).pow(spec_.degree).matrix();
    }
  }

 private:
  const Eigen::MatrixXd& x_;
  KernelSpec spec_;
  Eigen::MatrixXd gram_;
  Eigen::VectorXd diag_;
  bool cached_ = false;
};

}  // namespace

BinarySvmModel train_binary(const Eigen::MatrixXd& x, const Eigen::VectorXi& y,
                            double cost, const KernelSpec& kernel,
                            const SmoOptions& options,
                            Eigen::VectorXd* alpha_out) {
  const Eigen::Index n = x.rows();
  if (y.size() != n) {
    throw InvalidArgumentError("label count does not match sample count");
  }
  if (cost <= 0.0) {
    throw InvalidArgumentError("cost must be positive");
  }
  if (options.tolerance <= 0.0) {
    throw InvalidArgumentError("tolerance must be positive");
  }
  kernel.validate();
  bool has_pos = false;
  bool has_neg = false;
  for (Eigen::Index i = 0; i < n; ++i) {
    if (y[i] == 1) {
      has_pos = true;
    } else if (y[i] == -1) {
      has_neg = true;
    } else {
      throw InvalidArgumentError("labels must be +1 or -1");
    }
  }
  if (!has_pos || !has_neg) {
    throw DataError("degenerate problem: only one class present");
  }

  KernelTable kernels(x, kernel);

  // Dual state in the y-scaled variables s_i = y_i * alpha_i, box
  // [lower_i, upper_i] = [0, C] for y = +1 and [-C, 0] for y = -1.
  // grad_i = dW/dalpha_i = 1 - y_i * sum_l s_l K_il, starts at 1.
  Eigen::VectorXd s = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd grad = Eigen::VectorXd::Ones(n);
  auto upper = [&](Eigen::Index k) { return y[k] > 0 ? cost : 0.0; };
  auto lower = [&](Eigen::Index k) { return y[k] > 0 ? 0.0 : -cost; };

  Eigen::VectorXd col_i(n);
  Eigen::VectorXd col_j(n);
  double gap = std::numeric_limits<double>::infinity();
  bool converged = false;
  constexpr double kCurvatureFloor = 1e-12;

  for (long update = 0; update < options.max_pair_updates; ++update) {
    // Second-order working-set selection: i maximizes y*grad over variables
    // that can still grow; j maximizes the quadratic gain among variables
    // that can shrink. First-order pair selection thrashes when kernel
    // values dwarf the unit gradient scale.
    Eigen::Index i = -1;
    double m_up = -std::numeric_limits<double>::infinity();
    double m_low = std::numeric_limits<double>::infinity();
    for (Eigen::Index k = 0; k < n; ++k) {
      const double yg = y[k] * grad[k];
      if (s[k] < upper(k) && yg > m_up) {
        m_up = yg;
        i = k;
      }
      if (s[k] > lower(k) && yg < m_low) {
        m_low = yg;
      }
    }
    gap = m_up - m_low;
    if (gap <= options.tolerance) {
      converged = true;
      break;
    }

    kernels.column(i, col_i);
    Eigen::Index j = -1;
    double best_gain = -std::numeric_limits<double>::infinity();
    for (Eigen::Index k = 0; k < n; ++k) {
      if (s[k] <= lower(k)) continue;
      const double diff = m_up - y[k] * grad[k];
      if (diff <= 0.0) continue;
      double curvature = kernels.diag(i) + kernels.diag(k) - 2.0 * col_i[k];
      if (curvature <= 0.0) curvature = kCurvatureFloor;
      const double gain = diff * diff / curvature;
      if (gain > best_gain) {
        best_gain = gain;
        j = k;
      }
    }

    kernels.column(j, col_j);
    double curvature = kernels.diag(i) + kernels.diag(j) - 2.0 * col_i[j];
    if (curvature <= 0.0) curvature = kCurvatureFloor;

    const double room_i = upper(i) - s[i];
    const double room_j = s[j] - lower(j);
    const double delta =
        std::min({(m_up - y[j] * grad[j]) / curvature, room_i, room_j});

    s[i] = (delta == room_i) ? upper(i) : s[i] + delta;
    s[j] = (delta == room_j) ? lower(j) : s[j] - delta;
    grad -= delta * (y.cast<double>().array() * (col_i - col_j).array())
                        .matrix();
  }

  if (!converged) {
    throw ConvergenceError(
        "SMO did not converge within " +
            std::to_string(options.max_pair_updates) +
            " pair updates (KKT gap " + std::to_string(gap) + ")",
        gap);
  }

  // Bias: for free support vectors y*grad equals the bias at optimality.
  double bias_acc = 0.0;
  int free_count = 0;
  double m_up = -std::numeric_limits<double>::infinity();
  double m_low = std::numeric_limits<double>::infinity();
  for (Eigen::Index k = 0; k < n; ++k) {
    const double yg = y[k] * grad[k];
    const double alpha = y[k] * s[k];
    if (alpha > 0.0 && alpha < cost) {
      bias_acc += yg;
      ++free_count;
    }
    if (s[k] < upper(k)) m_up = std::max(m_up, yg);
    if (s[k] > lower(k)) m_low = std::min(m_low, yg);
  }
  const double bias =
      free_count > 0 ? bias_acc / free_count : 0.5 * (m_up + m_low);

  if (alpha_out != nullptr) {
    *alpha_out = (s.array() * y.cast<double>().array()).matrix();
  }

  BinarySvmModel model;
  model.kernel = kernel;
  model.cost = cost;
  model.bias = bias;
  Eigen::Index n_sv = 0;
  for (Eigen::Index k = 0; k < n; ++k) {
    if (s[k] != 0.0) ++n_sv;
  }
  model.support_vectors.resize(n_sv, x.cols());
  model.dual_coeffs.resize(n_sv);
  Eigen::Index pos = 0;
  for (Eigen::Index k = 0; k < n; ++k) {
    if (s[k] == 0.0) continue;
    model.support_vectors.row(pos) = x.row(k);
    model.dual_coeffs[pos] = s[k];  // s_k = alpha_k * y_k
    ++pos;
  }
  return model;
}

double kkt_max_violation(const BinarySvmModel& model, const Eigen::MatrixXd& x,
                         const Eigen::VectorXi& y,
                         const Eigen::VectorXd& alpha) {
  if (x.rows() != y.size() || x.rows() != alpha.size()) {
    throw InvalidArgumentError("inconsistent KKT certificate inputs");
  }
  double worst = 0.0;
  const double c = model.cost;
  for (Eigen::Index k = 0; k < x.rows(); ++k) {
    const double margin = y[k] * model.decision(x.row(k).transpose());
    double violation = 0.0;
    if (alpha[k] <= 0.0) {
      violation = std::max(0.0, 1.0 - margin);
    } else if (alpha[k] >= c) {
      violation = std::max(0.0, margin - 1.0);
    } else {
      violation = std::fabs(margin - 1.0);
    }
    worst = std::max(worst, violation);
  }
  return worst;
}

Eigen::MatrixXi make_coding_matrix(int n_classes, EcocCoding coding) {
  if (n_classes < 2) {
    throw InvalidArgumentError("ECOC needs at least 2 classes");
  }
  if (coding == EcocCoding::OneVsOne) {
    const int learners = n_classes * (n_classes - 1) / 2;
    Eigen::MatrixXi m = Eigen::MatrixXi::Zero(n_classes, learners);
    int col = 0;
    for (int a = 0; a < n_classes; ++a) {
      for (int b = a + 1; b < n_classes; ++b) {
        m(a, col) = 1;
        m(b, col) = -1;
        ++col;
      }
    }
    return m;
  }
  Eigen::MatrixXi m = Eigen::MatrixXi::Constant(n_classes, n_classes, -1);
  m.diagonal().setOnes();
  return m;
}

void EcocSvmModel::validate() const {
  const auto n_classes = static_cast<Eigen::Index>(classes.size());
  if (coding.rows() != n_classes) {
    throw InvalidArgumentError("coding matrix row count != class count");
  }
  if (coding.cols() != static_cast<Eigen::Index>(learners.size())) {
    throw InvalidArgumentError("coding matrix column count != learner count");
  }
  for (Eigen::Index col = 0; col < coding.cols(); ++col) {
    bool pos = false;
    bool neg = false;
    for (Eigen::Index row = 0; row < n_classes; ++row) {
      if (coding(row, col) == 1) pos = true;
      if (coding(row, col) == -1) neg = true;
    }
    if (!pos || !neg) {
      throw InvalidArgumentError("coding column " + std::to_string(col) +
                                 " lacks a +1 or a -1 entry");
    }
  }
  for (Eigen::Index a = 0; a < n_classes; ++a) {
    for (Eigen::Index b = a + 1; b < n_classes; ++b) {
      if (coding.row(a) == coding.row(b)) {
        throw InvalidArgumentError("coding rows " + std::to_string(a) +
                                   " and " + std::to_string(b) +
                                   " are identical");
      }
    }
  }
}

EcocSvmModel ecoc_train(const FeatureMatrix& fm, const SvmConfig& cfg) {
  const auto m = fm.features.rows();
  if (fm.labels.size() != static_cast<std::size_t>(m)) {
    throw InvalidArgumentError("label count does not match feature row count");
  }

  std::set<ClassLabel> unique(fm.labels.begin(), fm.labels.end());
  EcocSvmModel model;
  model.classes.assign(unique.begin(), unique.end());
  const int n_classes = static_cast<int>(model.classes.size());
  if (n_classes < 2) {
    throw DataError("ECOC training needs at least 2 classes");
  }
  model.coding = make_coding_matrix(n_classes, cfg.coding);

  std::map<ClassLabel, int> class_index;
  for (int c = 0; c < n_classes; ++c) class_index[model.classes[c]] = c;
  std::vector<int> row_class(m);
  for (Eigen::Index i = 0; i < m; ++i) {
    row_class[i] = class_index[fm.labels[i]];
  }

  Eigen::MatrixXd features = fm.features;
  model.standardize = cfg.standardize;
  if (cfg.standardize) {
    model.feature_mean = features.colwise().mean().transpose();
    model.feature_scale.resize(features.cols());
    for (Eigen::Index c = 0; c < features.cols(); ++c) {
      Eigen::ArrayXd centered =
          features.col(c).array() - model.feature_mean[c];
      model.feature_scale[c] =
          std::max(std::sqrt(centered.square().mean()), 1e-300);
      features.col(c) = centered / model.feature_scale[c];
    }
  }

  for (Eigen::Index col = 0; col < model.coding.cols(); ++col) {
    std::vector<Eigen::Index> take;
    for (Eigen::Index i = 0; i < m; ++i) {
      if (model.coding(row_class[i], col) != 0) take.push_back(i);
    }
    Eigen::MatrixXd sub_x(static_cast<Eigen::Index>(take.size()),
                          features.cols());
    Eigen::VectorXi sub_y(static_cast<Eigen::Index>(take.size()));
    for (std::size_t r = 0; r < take.size(); ++r) {
      sub_x.row(static_cast<Eigen::Index>(r)) = features.row(take[r]);
      sub_y[static_cast<Eigen::Index>(r)] =
          model.coding(row_class[take[r]], col);
    }
    const std::string context = "learner " + std::to_string(col) + ": ";
    try {
      model.learners.push_back(
          train_binary(sub_x, sub_y, cfg.cost, cfg.kernel, cfg.smo));
    } catch (const ConvergenceError& e) {
      throw ConvergenceError(context + e.what(), e.gap());
    } catch (const DataError& e) {
      throw DataError(context + e.what());
    } catch (const InvalidArgumentError& e) {
      throw InvalidArgumentError(context + e.what());
    }
  }
  model.validate();
  return model;
}

Prediction ecoc_predict(const EcocSvmModel& model,
                        const Eigen::Ref<const Eigen::VectorXd>& x) {
  const auto n_classes = static_cast<Eigen::Index>(model.classes.size());
  Eigen::VectorXd sample = x;
  if (model.standardize) {
    sample = (sample - model.feature_mean).cwiseQuotient(model.feature_scale);
  }
  Eigen::VectorXd scores(static_cast<Eigen::Index>(model.learners.size()));
  for (std::size_t l = 0; l < model.learners.size(); ++l) {
    scores[static_cast<Eigen::Index>(l)] = model.learners[l].decision(sample);
  }

  auto hinge = [](double z) { return std::max(0.0, 1.0 - z); };
  Prediction out;
  out.class_losses.resize(n_classes);
  for (Eigen::Index c = 0; c < n_classes; ++c) {
    double loss = 0.0;
    int nonzero = 0;
    for (Eigen::Index l = 0; l < model.coding.cols(); ++l) {
      const int code = model.coding(c, l);
      if (code == 0) continue;
      loss += hinge(code * scores[l]);
      ++nonzero;
    }
    out.class_losses[c] = loss / nonzero;
  }
  Eigen::Index best = 0;
  out.class_losses.minCoeff(&best);  // first minimum: lowest class index
  out.label = model.classes[static_cast<std::size_t>(best)];
  return out;
}

CvResult cross_validate(const FeatureMatrix& fm, const SvmConfig& cfg,
                        int folds, std::uint64_t seed) {
  if (folds < 2) {
    throw InvalidArgumentError("cross-validation needs at least 2 folds");
  }
  const auto m = fm.features.rows();
  if (fm.labels.size() != static_cast<std::size_t>(m)) {
    throw InvalidArgumentError("label count does not match feature row count");
  }

  std::map<ClassLabel, std::vector<Eigen::Index>> by_class;
  for (Eigen::Index i = 0; i < m; ++i) by_class[fm.labels[i]].push_back(i);

  std::vector<int> fold_of(static_cast<std::size_t>(m), -1);
  std::uint64_t class_idx = 0;
  for (auto& [label, indices] : by_class) {
    if (indices.size() < static_cast<std::size_t>(folds)) {
      throw DataError("class " + label.str() + " has " +
                      std::to_string(indices.size()) +
                      " samples, fewer than " + std::to_string(folds) +
                      " folds");
    }
    Rng rng(derive_seed(seed, "cv-fold", class_idx++));
    rng.shuffle(indices);
    for (std::size_t i = 0; i < indices.size(); ++i) {
      fold_of[static_cast<std::size_t>(indices[i])] =
          static_cast<int>(i % static_cast<std::size_t>(folds));
    }
  }

  CvResult result;
  double acc_sum = 0.0;
  for (int fold = 0; fold < folds; ++fold) {
    std::vector<Eigen::Index> train_rows;
    std::vector<Eigen::Index> test_rows;
    for (Eigen::Index i = 0; i < m; ++i) {
      (fold_of[static_cast<std::size_t>(i)] == fold ? test_rows : train_rows)
          .push_back(i);
    }
    FeatureMatrix train;
    train.features.resize(static_cast<Eigen::Index>(train_rows.size()),
                          fm.features.cols());
    train.labels.reserve(train_rows.size());
    for (std::size_t r = 0; r < train_rows.size(); ++r) {
      train.features.row(static_cast<Eigen::Index>(r)) =
          fm.features.row(train_rows[r]);
      train.labels.push_back(fm.labels[static_cast<std::size_t>(train_rows[r])]);
    }
    EcocSvmModel model = ecoc_train(train, cfg);
    int correct = 0;
    for (Eigen::Index row : test_rows) {
      Prediction p = ecoc_predict(model, fm.features.row(row).transpose());
      if (p.label == fm.labels[static_cast<std::size_t>(row)]) ++correct;
    }
    const double acc =
        static_cast<double>(correct) / static_cast<double>(test_rows.size());
    result.fold_accuracies.push_back(acc);
    acc_sum += acc;
  }
  result.mean_accuracy = acc_sum / folds;
  return result;
}

}  // namespace eigenspec
