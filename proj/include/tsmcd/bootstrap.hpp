#ifndef TSMCD_BOOTSTRAP_HPP
#define TSMCD_BOOTSTRAP_HPP

#include <algorithm>
#include <cmath>
#include <vector>

#include "tsmcd/final_fit.hpp"
#include "tsmcd/parallel.hpp"
#include "tsmcd/rng.hpp"

namespace tsmcd {

inline double normal_cdf(double x) { return 0.5 * std::erfc(-x * 0.70710678118654752440); }

/// Quantile of a sorted sample by linear interpolation of order statistics.
inline double sorted_quantile(const std::vector<double>& sorted, double prob) {
  const std::size_t n = sorted.size();
  if (n == 1) return sorted[0];
  const double h = prob * static_cast<double>(n - 1);
  const std::size_t lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, n - 1);
  const double frac = h - static_cast<double>(lo);
  return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

struct bootstrap_result {
  Eigen::MatrixXd draws;  ///< b_effective x (s+1)p refitted coefficients
  Eigen::VectorXd se;
  Eigen::VectorXd ci_low;   ///< 2.5% percentile
  Eigen::VectorXd ci_high;  ///< 97.5% percentile
  Eigen::VectorXd wald_p;   ///< two-sided normal approximation at theta_hat
  int b_requested = 0;
  int b_effective = 0;
  int skipped = 0;
};

/// Nonparametric bootstrap of the coefficient estimates at fixed thresholds:
/// rows are resampled with replacement and the penalized refit repeated per
/// resample. A resample whose fit fails (an empty subgroup, too few events)
/// is redrawn up to 10 times, then skipped.
inline bootstrap_result bootstrap_se(const survival_dataset& data,
                                     const std::vector<double>& a_hat, const penalty_spec& pen,
                                     const Eigen::VectorXd& theta_hat, int B, std::uint64_t seed,
                                     const final_fit_options& opt = {}, int threads = 1) {
  if (B < 2) fail(errc::invalid_argument, "bootstrap_se: need B >= 2 resamples");
  data.validate();
  const int n = data.n();
  const Eigen::Index dim = theta_hat.size();

  bootstrap_result out;
  out.b_requested = B;
  std::vector<Eigen::VectorXd> draws(static_cast<std::size_t>(B));
  std::vector<char> ok(static_cast<std::size_t>(B), 0);

  parallel_for(B, threads, [&](int b) {
    rng g(rng::stream_seed(seed, static_cast<std::uint64_t>(b)));
    for (int attempt = 0; attempt < 10; ++attempt) {
      survival_dataset sample;
      sample.y.resize(n);
      sample.delta.resize(n);
      sample.X.resize(n, data.p());
      sample.z.resize(n);
      for (int i = 0; i < n; ++i) {
        const int row = static_cast<int>(g.next_below(static_cast<std::uint64_t>(n)));
        sample.y[i] = data.y[row];
        sample.delta[i] = data.delta[row];
        sample.X.row(i) = data.X.row(row);
        sample.z[i] = data.z[row];
      }
      try {
        sample.validate();
        const final_fit_result fit = final_penalized_fit(sample, a_hat, pen, opt);
        draws[static_cast<std::size_t>(b)] = fit.theta;
        ok[static_cast<std::size_t>(b)] = 1;
        return;
      } catch (const error&) {
        continue;  // degenerate resample: redraw
      }
    }
  });

  int kept = 0;
  for (char c : ok) kept += c;
  out.skipped = B - kept;
  out.b_effective = kept;
  if (kept < 2)
    fail(errc::insufficient_events, "bootstrap_se: fewer than 2 usable resamples");

  out.draws.resize(kept, dim);
  int r = 0;
  for (int b = 0; b < B; ++b)
    if (ok[static_cast<std::size_t>(b)]) out.draws.row(r++) = draws[static_cast<std::size_t>(b)];

  out.se.resize(dim);
  out.ci_low.resize(dim);
  out.ci_high.resize(dim);
  out.wald_p.resize(dim);
  std::vector<double> column(static_cast<std::size_t>(kept));
  for (Eigen::Index t = 0; t < dim; ++t) {
    const double mean = out.draws.col(t).mean();
    double ss = 0.0;
    for (int b = 0; b < kept; ++b) {
      const double d = out.draws(b, t) - mean;
      ss += d * d;
    }
    out.se[t] = std::sqrt(ss / (kept - 1));
    for (int b = 0; b < kept; ++b) column[static_cast<std::size_t>(b)] = out.draws(b, t);
    std::sort(column.begin(), column.end());
    out.ci_low[t] = sorted_quantile(column, 0.025);
    out.ci_high[t] = sorted_quantile(column, 0.975);
    if (out.se[t] > 0.0) {
      out.wald_p[t] = 2.0 * (1.0 - normal_cdf(std::fabs(theta_hat[t]) / out.se[t]));
    } else {
      out.wald_p[t] = theta_hat[t] != 0.0 ? 0.0 : 1.0;
    }
  }
  return out;
}

}  // namespace tsmcd

#endif
