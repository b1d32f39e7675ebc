#ifndef TSMCD_WLS_HPP
#define TSMCD_WLS_HPP

#include <Eigen/Dense>
#include <span>
#include <string>

#include "tsmcd/kaplan_meier.hpp"

namespace tsmcd {

/// Reciprocal-condition-number floor below which a weighted Gram matrix is
/// treated as singular. No ridge jitter is applied anywhere; ill-posed
/// subsets are reported, not silently regularized.
inline constexpr double k_singular_rcond = 1e-10;

struct wls_fit {
  Eigen::VectorXd beta;
  double weighted_rss = 0.0;
  int n_events = 0;
};

/// Stute weighted least squares on a subset: minimizes
///   sum_l w_l (y_(l) - x_(l)' beta)^2
/// over beta, with Kaplan-Meier weights from the subset's own y-ordering.
/// Solved by a rank-revealing QR of the sqrt-weighted rows.
inline wls_fit stute_wls(const survival_dataset& data, std::span<const int> idx) {
  const ordered_subset os = order_subset(data, idx);
  const int p = data.p();
  const int b = os.size();

  int positive = 0;
  int events = 0;
  for (int l = 0; l < b; ++l) {
    if (os.weights[static_cast<std::size_t>(l)] > 0.0) ++positive;
    events += data.delta[os.order[static_cast<std::size_t>(l)]];
  }
  if (positive < p)
    fail(errc::insufficient_events,
         "stute_wls: only " + std::to_string(positive) +
             " positively weighted observations for p = " + std::to_string(p));

  Eigen::MatrixXd gram = Eigen::MatrixXd::Zero(p, p);
  for (int l = 0; l < b; ++l) {
    const double w = os.weights[static_cast<std::size_t>(l)];
    if (w == 0.0) continue;
    const auto x = data.X.row(os.order[static_cast<std::size_t>(l)]);
    gram.noalias() += w * x.transpose() * x;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(gram, Eigen::EigenvaluesOnly);
  const double emax = es.eigenvalues().cwiseAbs().maxCoeff();
  const double emin = es.eigenvalues().cwiseAbs().minCoeff();
  if (emax <= 0.0 || emin / emax < k_singular_rcond)
    fail(errc::singular_design,
         "stute_wls: singular weighted design on subset of size " + std::to_string(b));

  Eigen::MatrixXd A(positive, p);
  Eigen::VectorXd rhs(positive);
  int r = 0;
  for (int l = 0; l < b; ++l) {
    const double w = os.weights[static_cast<std::size_t>(l)];
    if (w == 0.0) continue;
    const double s = std::sqrt(w);
    const int row = os.order[static_cast<std::size_t>(l)];
    A.row(r) = s * data.X.row(row);
    rhs[r] = s * data.y[row];
    ++r;
  }

  wls_fit fit;
  fit.beta = A.colPivHouseholderQr().solve(rhs);
  fit.n_events = events;
  fit.weighted_rss = 0.0;
  for (int l = 0; l < b; ++l) {
    const double w = os.weights[static_cast<std::size_t>(l)];
    if (w == 0.0) continue;
    const int row = os.order[static_cast<std::size_t>(l)];
    const double resid = data.y[row] - data.X.row(row).dot(fit.beta);
    fit.weighted_rss += w * resid * resid;
  }
  return fit;
}

}  // namespace tsmcd

#endif
