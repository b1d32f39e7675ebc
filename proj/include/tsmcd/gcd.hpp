#ifndef TSMCD_GCD_HPP
#define TSMCD_GCD_HPP

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "tsmcd/group_design.hpp"
#include "tsmcd/penalty.hpp"
#include "tsmcd/wls.hpp"

namespace tsmcd {

/// Group norms below this are stored as exact zeros so the active set is
/// unambiguous.
inline constexpr double k_exact_zero = 1e-12;

struct gcd_options {
  double tol = 1e-6;   ///< max absolute coefficient change per sweep
  int max_iter = 1000; ///< sweeps
};

struct group_solution {
  Eigen::VectorXd theta;               ///< groups*p coefficients, group g at [g*p, (g+1)*p)
  std::vector<int> active;             ///< groups with nonzero 2-norm (0-based)
  std::vector<int> candidates;         ///< leading indices of active runs, >= 1
  std::vector<double> objective_trace; ///< objective after each sweep
  bool converged = false;
  int sweeps = 0;
};

/// Candidate rule: group j >= 1 is a candidate when it is active and group
/// j-1 is not. An empty result declares "no threshold".
inline std::vector<int> extract_candidates(const std::vector<int>& active, int n_groups) {
  std::vector<char> in(static_cast<std::size_t>(n_groups), 0);
  for (int j : active)
    if (0 <= j && j < n_groups) in[static_cast<std::size_t>(j)] = 1;
  std::vector<int> out;
  for (int j = 1; j < n_groups; ++j)
    if (in[static_cast<std::size_t>(j)] && !in[static_cast<std::size_t>(j) - 1]) out.push_back(j);
  return out;
}

namespace detail {

/// Residual recomputed from scratch: ys - fitted(theta), using the prefix
/// sums of the group blocks.
inline void refresh_residual(const group_design& d, const Eigen::VectorXd& theta,
                             Eigen::VectorXd& res) {
  const int p = d.p;
  Eigen::VectorXd cum = Eigen::VectorXd::Zero(p);
  res = d.ys;
  for (int g = 0; g < d.groups; ++g) {
    cum += theta.segment(static_cast<Eigen::Index>(g) * p, p);
    const int start = d.group_start[static_cast<std::size_t>(g)];
    const int len = d.group_start[static_cast<std::size_t>(g) + 1] - start;
    if (len > 0) res.segment(start, len).noalias() -= d.xs.middleRows(start, len) * cum;
  }
}

}  // namespace detail

/// Group coordinate descent for the splitting-stage objective
///   (1/2n) ||ys - X theta||^2 + sum_{j>=1} p_{lambda,gamma}(||theta_j||).
/// Group 0 (the baseline coefficients) is unpenalized and updated by exact
/// weighted least squares within each sweep; penalized groups take a
/// majorized gradient step through the group thresholding operator. The
/// majorization constant is the largest eigenvalue of the block Gram over n,
/// lifted to the penalty's convexity bound when smaller so every subproblem
/// stays convex.
inline group_solution group_coordinate_descent(const group_design& d, const penalty_spec& pen,
                                               const gcd_options& opt = {},
                                               const Eigen::VectorXd* warm = nullptr) {
  const int p = d.p;
  const int G = d.groups;
  const int n = d.n;
  if (n < 1 || G < 1) fail(errc::invalid_argument, "group_coordinate_descent: empty design");

  // Suffix Gram matrices G_j = B_j'B_j drive everything: the group-0 normal
  // equations, the majorization constants, and the in-sweep gradient updates.
  // When group g changes by delta, every suffix gradient moves by
  //   S_j -= G_{max(j,g)} * delta,
  // so a sweep never touches the n-row residual.
  std::vector<Eigen::MatrixXd> suffix_gram(static_cast<std::size_t>(G));
  std::vector<double> a_eff(static_cast<std::size_t>(G), 0.0);
  std::vector<char> zero_block(static_cast<std::size_t>(G), 0);
  {
    const double bound = pen.convexity_bound() * (1.0 + 1e-8);
    Eigen::MatrixXd gram = Eigen::MatrixXd::Zero(p, p);
    for (int g = G - 1; g >= 0; --g) {
      const int start = d.group_start[static_cast<std::size_t>(g)];
      const int len = d.group_start[static_cast<std::size_t>(g) + 1] - start;
      if (len > 0) {
        const auto block = d.xs.middleRows(start, len);
        gram.noalias() += block.transpose() * block;
      }
      suffix_gram[static_cast<std::size_t>(g)] = gram;
      if (g >= 1) {
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(gram, Eigen::EigenvaluesOnly);
        const double amax = es.eigenvalues().maxCoeff() / n;
        if (amax <= 0.0) {
          zero_block[static_cast<std::size_t>(g)] = 1;
          a_eff[static_cast<std::size_t>(g)] = bound;
        } else {
          a_eff[static_cast<std::size_t>(g)] = std::max(amax, bound);
        }
      }
    }
  }
  const Eigen::MatrixXd& gram_full = suffix_gram[0];
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es0(gram_full, Eigen::EigenvaluesOnly);
  const double emax = es0.eigenvalues().cwiseAbs().maxCoeff();
  const double emin = es0.eigenvalues().cwiseAbs().minCoeff();
  if (emax <= 0.0 || emin / emax < k_singular_rcond)
    fail(errc::singular_design, "group_coordinate_descent: singular baseline Gram matrix");
  const Eigen::LDLT<Eigen::MatrixXd> gram0(gram_full);

  group_solution sol;
  sol.theta = warm != nullptr ? *warm
                              : Eigen::VectorXd::Zero(static_cast<Eigen::Index>(G) * p);
  if (sol.theta.size() != static_cast<Eigen::Index>(G) * p)
    fail(errc::invalid_argument, "group_coordinate_descent: warm start has wrong size");

  Eigen::VectorXd res(n);
  detail::refresh_residual(d, sol.theta, res);

  // suffix gradients S_j = B_j' res, refreshed from the exact residual at
  // every sweep start by one backward pass
  Eigen::MatrixXd sgrad(p, G);
  const auto refresh_sgrad = [&] {
    Eigen::VectorXd acc = Eigen::VectorXd::Zero(p);
    for (int g = G - 1; g >= 0; --g) {
      const int start = d.group_start[static_cast<std::size_t>(g)];
      const int len = d.group_start[static_cast<std::size_t>(g) + 1] - start;
      if (len > 0) acc.noalias() += d.xs.middleRows(start, len).transpose() * res.segment(start, len);
      sgrad.col(g) = acc;
    }
  };

  Eigen::VectorXd v(p), tnew(p), delta(p);
  for (int sweep = 0; sweep < opt.max_iter; ++sweep) {
    refresh_sgrad();
    double max_change = 0.0;

    const auto apply_update = [&](int g, const Eigen::VectorXd& dlt) {
      for (int j = 0; j < G; ++j)
        sgrad.col(j).noalias() -= suffix_gram[static_cast<std::size_t>(std::max(j, g))] * dlt;
    };

    // group 0: exact weighted least-squares step
    delta = gram0.solve(sgrad.col(0));
    sol.theta.head(p) += delta;
    apply_update(0, delta);
    max_change = delta.cwiseAbs().maxCoeff();

    for (int g = 1; g < G; ++g) {
      auto theta_g = sol.theta.segment(static_cast<Eigen::Index>(g) * p, p);
      if (zero_block[static_cast<std::size_t>(g)]) {
        theta_g.setZero();
        continue;
      }
      const double a = a_eff[static_cast<std::size_t>(g)];
      v = theta_g + sgrad.col(g) / (n * a);
      tnew = group_threshold(pen, v, a);
      if (tnew.norm() < k_exact_zero) tnew.setZero();
      delta = tnew - theta_g;
      const double change = delta.cwiseAbs().maxCoeff();
      if (change > 0.0) {
        theta_g = tnew;
        apply_update(g, delta);
        if (change > max_change) max_change = change;
      }
    }

    // exact residual each sweep keeps the objective trace honest and bounds
    // incremental drift
    detail::refresh_residual(d, sol.theta, res);
    double obj = 0.5 * res.squaredNorm() / n;
    for (int g = 1; g < G; ++g)
      obj += penalty_value(pen, sol.theta.segment(static_cast<Eigen::Index>(g) * p, p).norm());
    sol.objective_trace.push_back(obj);
    ++sol.sweeps;

    if (max_change < opt.tol) {
      sol.converged = true;
      break;
    }
  }

  for (int g = 0; g < G; ++g)
    if (sol.theta.segment(static_cast<Eigen::Index>(g) * p, p).norm() > 0.0) sol.active.push_back(g);
  sol.candidates = extract_candidates(sol.active, G);
  return sol;
}

/// Gradient norms ||(1/n) B_j' r|| of the zero groups at theta, the quantity
/// bounded by lambda in the solver's stationarity condition.
inline std::vector<std::pair<int, double>> zero_group_gradients(const group_design& d,
                                                                const Eigen::VectorXd& theta) {
  const int p = d.p;
  Eigen::VectorXd res;
  detail::refresh_residual(d, theta, res);
  std::vector<std::pair<int, double>> out;
  for (int g = 1; g < d.groups; ++g) {
    if (theta.segment(static_cast<Eigen::Index>(g) * p, p).norm() != 0.0) continue;
    const int start = d.group_start[static_cast<std::size_t>(g)];
    const int len = d.n - start;
    const Eigen::VectorXd grad = d.xs.bottomRows(len).transpose() * res.tail(len) / d.n;
    out.emplace_back(g, grad.norm());
  }
  return out;
}

}  // namespace tsmcd

#endif
