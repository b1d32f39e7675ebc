#ifndef TSMCD_FINAL_FIT_HPP
#define TSMCD_FINAL_FIT_HPP

#include <Eigen/Dense>
#include <algorithm>
#include <vector>

#include "tsmcd/gcd.hpp"
#include "tsmcd/group_design.hpp"

namespace tsmcd {

/// Subgroups induced by strictly increasing thresholds: group j holds
/// a_{j-1} < z <= a_j with a_0 = -inf and a_{s+1} = +inf.
inline std::vector<std::vector<int>> threshold_groups(const survival_dataset& data,
                                                      const std::vector<double>& a_hat) {
  for (std::size_t j = 1; j < a_hat.size(); ++j)
    if (!(a_hat[j] > a_hat[j - 1]))
      fail(errc::invalid_thresholds, "thresholds must be strictly increasing");
  std::vector<std::vector<int>> groups(a_hat.size() + 1);
  for (int i = 0; i < data.n(); ++i) {
    const auto it = std::lower_bound(a_hat.begin(), a_hat.end(), data.z[i]);
    groups[static_cast<std::size_t>(it - a_hat.begin())].push_back(i);
  }
  return groups;
}

struct final_fit_options {
  double tol = 1e-6;
  int max_iter = 1000;
};

struct final_fit_result {
  Eigen::VectorXd theta;                ///< (s+1)*p with exact zeros
  std::vector<double> objective_trace;  ///< objective after each sweep
  bool converged = false;
  int sweeps = 0;
};

/// Sparse per-subgroup fit at fixed thresholds: coordinate descent on
///   sum_j (b_j/2n) sum_{i in I_j} w (y_i - x_i'(beta_1 + sum_{k<j} d_k))^2
///     + sum_t p_{lambda,gamma}(|theta_t|),
/// an element-wise penalty on every coordinate. Initialized at the warm
/// start when given, else at the unpenalized segmented solution when the
/// design allows it.
inline final_fit_result final_penalized_fit(const survival_dataset& data,
                                            const std::vector<double>& a_hat,
                                            const penalty_spec& pen,
                                            const final_fit_options& opt = {},
                                            const Eigen::VectorXd* warm = nullptr) {
  const auto groups = threshold_groups(data, a_hat);
  for (std::size_t j = 0; j < groups.size(); ++j)
    if (groups[j].empty())
      fail(errc::invalid_thresholds, "threshold subgroup " + std::to_string(j) + " is empty");
  const group_design d = build_group_design(data, groups);
  const int p = d.p;
  const int G = d.groups;
  const int n = d.n;
  const Eigen::Index dim = static_cast<Eigen::Index>(G) * p;

  // per-coordinate curvature: squared norm of the suffix column over n
  Eigen::VectorXd curv(dim);
  for (int g = 0; g < G; ++g) {
    const int start = d.group_start[static_cast<std::size_t>(g)];
    const int len = n - start;
    for (int c = 0; c < p; ++c)
      curv[static_cast<Eigen::Index>(g) * p + c] =
          d.xs.col(c).tail(len).squaredNorm() / n;
  }
  const double bound = pen.convexity_bound() * (1.0 + 1e-8);

  final_fit_result out;
  out.theta = Eigen::VectorXd::Zero(dim);
  if (warm != nullptr) {
    if (warm->size() != dim)
      fail(errc::invalid_argument, "final_penalized_fit: warm start has wrong size");
    out.theta = *warm;
  } else {
    // start at the unpenalized segmented weighted least squares fit; the
    // block Gram assembles from suffix Grams of the shared columns
    Eigen::MatrixXd gram = Eigen::MatrixXd::Zero(dim, dim);
    Eigen::VectorXd rhs(dim);
    Eigen::MatrixXd suffix = Eigen::MatrixXd::Zero(p, p);
    for (int g = G - 1; g >= 0; --g) {
      const int start = d.group_start[static_cast<std::size_t>(g)];
      const int len = d.group_start[static_cast<std::size_t>(g) + 1] - start;
      if (len > 0) {
        const auto block = d.xs.middleRows(start, len);
        suffix.noalias() += block.transpose() * block;
      }
      for (int h = 0; h <= g; ++h) {
        gram.block(static_cast<Eigen::Index>(g) * p, static_cast<Eigen::Index>(h) * p, p, p) = suffix;
        gram.block(static_cast<Eigen::Index>(h) * p, static_cast<Eigen::Index>(g) * p, p, p) = suffix;
      }
      const int tail = n - start;
      rhs.segment(static_cast<Eigen::Index>(g) * p, p).noalias() =
          d.xs.bottomRows(tail).transpose() * d.ys.tail(tail);
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(gram, Eigen::EigenvaluesOnly);
    const double emax = es.eigenvalues().cwiseAbs().maxCoeff();
    const double emin = es.eigenvalues().cwiseAbs().minCoeff();
    if (emax > 0.0 && emin / emax >= k_singular_rcond)
      out.theta = Eigen::LDLT<Eigen::MatrixXd>(gram).solve(rhs);
  }

  Eigen::VectorXd res(n);
  detail::refresh_residual(d, out.theta, res);

  for (int sweep = 0; sweep < opt.max_iter; ++sweep) {
    double max_change = 0.0;
    for (int g = 0; g < G; ++g) {
      const int start = d.group_start[static_cast<std::size_t>(g)];
      const int len = n - start;
      for (int c = 0; c < p; ++c) {
        const Eigen::Index t = static_cast<Eigen::Index>(g) * p + c;
        const double a_raw = curv[t];
        if (a_raw <= 0.0) {
          out.theta[t] = 0.0;
          continue;
        }
        const double a = std::max(a_raw, bound);
        const auto col = d.xs.col(c).tail(len);
        const double grad = col.dot(res.tail(len));
        const double v = out.theta[t] + grad / (n * a);
        double tnew = scalar_threshold(pen, v, a);
        if (std::fabs(tnew) < k_exact_zero) tnew = 0.0;
        const double dlt = tnew - out.theta[t];
        if (dlt != 0.0) {
          res.tail(len).noalias() -= col * dlt;
          out.theta[t] = tnew;
          const double change = std::fabs(dlt);
          if (change > max_change) max_change = change;
        }
      }
    }
    detail::refresh_residual(d, out.theta, res);
    double obj = 0.5 * res.squaredNorm() / n;
    for (Eigen::Index t = 0; t < dim; ++t) obj += penalty_value(pen, std::fabs(out.theta[t]));
    out.objective_trace.push_back(obj);
    ++out.sweeps;
    if (max_change < opt.tol) {
      out.converged = true;
      break;
    }
  }
  return out;
}

/// Per-subgroup coefficients by prefix summation: column j is
/// beta_j = beta_1 + sum_{k<j} d_k, exact arithmetic on the stored values.
inline Eigen::MatrixXd subgroup_coefficients(const Eigen::VectorXd& theta, int p) {
  if (p < 1 || theta.size() % p != 0)
    fail(errc::invalid_argument, "subgroup_coefficients: size not a multiple of p");
  const int G = static_cast<int>(theta.size() / p);
  Eigen::MatrixXd beta(p, G);
  beta.col(0) = theta.head(p);
  for (int g = 1; g < G; ++g)
    beta.col(g) = beta.col(g - 1) + theta.segment(static_cast<Eigen::Index>(g) * p, p);
  return beta;
}

}  // namespace tsmcd

#endif
