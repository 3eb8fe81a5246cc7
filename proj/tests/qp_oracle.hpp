#pragma once

// Brute-force reference solver for the soft-margin SVM dual, independent of
// the SMO implementation. Enumerates every assignment of the dual variables
// to {at zero, free, at C}, solves the KKT equality system for the free set,
// keeps feasible candidates and returns the best dual objective. Exact for
// the tiny problems the oracle suite uses.

#include <Eigen/Dense>
#include <cmath>
#include <limits>
#include <optional>
#include <vector>

#include "eigenspec/svm.hpp"

namespace qp_oracle {

struct Solution {
  Eigen::VectorXd alpha;
  double bias = 0.0;
  double objective = -std::numeric_limits<double>::infinity();
  bool found = false;

  double decision(const Eigen::MatrixXd& x, const Eigen::VectorXi& y,
                  const eigenspec::KernelSpec& kernel,
                  const Eigen::Ref<const Eigen::VectorXd>& point) const {
    double acc = bias;
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
      acc += alpha[i] * y[i] *
             eigenspec::kernel_eval(x.row(i).transpose(), point, kernel);
    }
    return acc;
  }
};

inline Solution solve(const Eigen::MatrixXd& x, const Eigen::VectorXi& y,
                      double cost, const eigenspec::KernelSpec& kernel) {
  const Eigen::Index n = x.rows();
  Eigen::MatrixXd k(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      k(i, j) = eigenspec::kernel_eval(x.row(i).transpose(),
                                       x.row(j).transpose(), kernel);
    }
  }

  constexpr double kFeasslack = 1e-9;
  Solution best;

  std::vector<int> state(static_cast<std::size_t>(n), 0);  // 0, 1=free, 2=atC
  const long combos = static_cast<long>(std::pow(3.0, n));
  for (long combo = 0; combo < combos; ++combo) {
    long rest = combo;
    for (Eigen::Index i = 0; i < n; ++i) {
      state[static_cast<std::size_t>(i)] = static_cast<int>(rest % 3);
      rest /= 3;
    }

    std::vector<Eigen::Index> free_set;
    Eigen::VectorXd alpha = Eigen::VectorXd::Zero(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      if (state[static_cast<std::size_t>(i)] == 1) free_set.push_back(i);
      if (state[static_cast<std::size_t>(i)] == 2) alpha[i] = cost;
    }

    double bias = 0.0;
    if (!free_set.empty()) {
      // Solve for the free alphas and the bias from the margin equalities
      // y_f f(x_f) = 1 plus sum alpha_i y_i = 0.
      const auto f = static_cast<Eigen::Index>(free_set.size());
      Eigen::MatrixXd a = Eigen::MatrixXd::Zero(f + 1, f + 1);
      Eigen::VectorXd rhs = Eigen::VectorXd::Zero(f + 1);
      for (Eigen::Index r = 0; r < f; ++r) {
        const Eigen::Index p = free_set[static_cast<std::size_t>(r)];
        for (Eigen::Index c = 0; c < f; ++c) {
          const Eigen::Index q = free_set[static_cast<std::size_t>(c)];
          a(r, c) = y[q] * k(p, q);
        }
        a(r, f) = 1.0;
        double fixed = 0.0;
        for (Eigen::Index q = 0; q < n; ++q) {
          if (state[static_cast<std::size_t>(q)] == 2) {
            fixed += cost * y[q] * k(p, q);
          }
        }
        rhs[r] = y[p] - fixed;
      }
      for (Eigen::Index c = 0; c < f; ++c) {
        a(f, c) = y[free_set[static_cast<std::size_t>(c)]];
      }
      double fixed_sum = 0.0;
      for (Eigen::Index q = 0; q < n; ++q) {
        if (state[static_cast<std::size_t>(q)] == 2) fixed_sum += cost * y[q];
      }
      rhs[f] = -fixed_sum;

      Eigen::VectorXd sol = a.fullPivLu().solve(rhs);
      if (!(a * sol - rhs).isZero(1e-8)) continue;  // singular/inconsistent
      bool in_box = true;
      for (Eigen::Index r = 0; r < f; ++r) {
        const double v = sol[r];
        if (!(v > kFeasslack && v < cost - kFeasslack)) {
          in_box = false;
          break;
        }
      }
      if (!in_box) continue;
      for (Eigen::Index r = 0; r < f; ++r) {
        alpha[free_set[static_cast<std::size_t>(r)]] = sol[r];
      }
      bias = sol[f];
    } else {
      // No free variables: the equality constraint must hold exactly and a
      // feasible bias interval must exist.
      double sum = 0.0;
      for (Eigen::Index i = 0; i < n; ++i) sum += alpha[i] * y[i];
      if (std::fabs(sum) > kFeasslack) continue;
      double lo = -std::numeric_limits<double>::infinity();
      double hi = std::numeric_limits<double>::infinity();
      for (Eigen::Index i = 0; i < n; ++i) {
        double margin_wo_bias = 0.0;
        for (Eigen::Index q = 0; q < n; ++q) {
          margin_wo_bias += alpha[q] * y[q] * k(i, q);
        }
        // y_i (margin + b) >= 1 at alpha = 0, <= 1 at alpha = C; solving for
        // b gives one-sided bounds whose direction depends on the label.
        if (state[static_cast<std::size_t>(i)] == 0) {
          if (y[i] > 0) {
            lo = std::max(lo, 1.0 - margin_wo_bias);
          } else {
            hi = std::min(hi, -1.0 - margin_wo_bias);
          }
        } else {
          if (y[i] > 0) {
            hi = std::min(hi, 1.0 - margin_wo_bias);
          } else {
            lo = std::max(lo, -1.0 - margin_wo_bias);
          }
        }
      }
      if (lo > hi + kFeasslack) continue;
      if (!std::isfinite(lo)) lo = hi;
      if (!std::isfinite(hi)) hi = lo;
      if (!std::isfinite(lo)) {
        lo = 0.0;
        hi = 0.0;
      }
      bias = 0.5 * (lo + hi);
    }

    // KKT inequality check for the bound variables.
    bool feasible = true;
    for (Eigen::Index i = 0; i < n && feasible; ++i) {
      double margin = bias;
      for (Eigen::Index q = 0; q < n; ++q) {
        margin += alpha[q] * y[q] * k(i, q);
      }
      const double ym = y[i] * margin;
      if (state[static_cast<std::size_t>(i)] == 0 && ym < 1.0 - 1e-7) {
        feasible = false;
      }
      if (state[static_cast<std::size_t>(i)] == 2 && ym > 1.0 + 1e-7) {
        feasible = false;
      }
    }
    if (!feasible) continue;

    const double objective =
        alpha.sum() -
        0.5 * (alpha.array() * y.cast<double>().array()).matrix().dot(
                  k * (alpha.array() * y.cast<double>().array()).matrix());
    if (objective > best.objective) {
      best.alpha = alpha;
      best.bias = bias;
      best.objective = objective;
      best.found = true;
    }
  }
  return best;
}

}  // namespace qp_oracle
