// Independent reference implementations used only by the tests. They share
// no code with the library paths they check: the product-limit oracle builds
// survival curves by at-risk subtraction, the least-squares oracle assembles
// and solves normal equations by Gaussian elimination, and the grid oracle
// minimizes one-dimensional objectives by exhaustive stepping.
#ifndef TSMCD_TESTS_ORACLES_HPP
#define TSMCD_TESTS_ORACLES_HPP

#include <algorithm>
#include <cmath>
#include <functional>
#include <random>
#include <stdexcept>
#include <vector>

namespace oracle {

/// Product-limit estimator evaluated per ordered position: survival[l] is
/// S(y_(l)) and jump[l] = S(y_(l-1)) - S(y_(l)), computed as
/// S_l = S_{l-1} * (1 - delta_l / (b - l + 1)).
struct product_limit {
  std::vector<double> survival;
  std::vector<double> jumps;
};

inline product_limit product_limit_ordered(const std::vector<int>& delta_ordered) {
  const int b = static_cast<int>(delta_ordered.size());
  product_limit out;
  out.survival.resize(b);
  out.jumps.resize(b);
  double s = 1.0;
  for (int l = 0; l < b; ++l) {
    const double prev = s;
    if (delta_ordered[l] == 1) s = s * (1.0 - 1.0 / (b - l));
    out.survival[l] = s;
    out.jumps[l] = prev - s;
  }
  return out;
}

/// Ordering rule shared with the library contract: ascending y, events first
/// at ties, then original position.
inline std::vector<int> order_by_y(const std::vector<double>& y, const std::vector<int>& delta) {
  std::vector<int> ord(y.size());
  for (std::size_t i = 0; i < y.size(); ++i) ord[i] = static_cast<int>(i);
  std::sort(ord.begin(), ord.end(), [&](int a, int b) {
    if (y[a] != y[b]) return y[a] < y[b];
    if (delta[a] != delta[b]) return delta[a] > delta[b];
    return a < b;
  });
  return ord;
}

/// Solves A x = b by Gaussian elimination with partial pivoting.
inline std::vector<double> solve_dense(std::vector<std::vector<double>> a, std::vector<double> b) {
  const int n = static_cast<int>(b.size());
  for (int col = 0; col < n; ++col) {
    int piv = col;
    for (int r = col + 1; r < n; ++r)
      if (std::fabs(a[r][col]) > std::fabs(a[piv][col])) piv = r;
    if (a[piv][col] == 0.0) throw std::runtime_error("oracle solve: singular system");
    std::swap(a[piv], a[col]);
    std::swap(b[piv], b[col]);
    for (int r = 0; r < n; ++r) {
      if (r == col) continue;
      const double f = a[r][col] / a[col][col];
      if (f == 0.0) continue;
      for (int c = col; c < n; ++c) a[r][c] -= f * a[col][c];
      b[r] -= f * b[col];
    }
  }
  std::vector<double> x(n);
  for (int i = 0; i < n; ++i) x[i] = b[i] / a[i][i];
  return x;
}

struct wls_solution {
  std::vector<double> beta;
  double weighted_rss = 0.0;
};

/// Weighted least squares by direct normal equations with product-limit
/// weights computed on the subset's own ordering.
inline wls_solution stute_wls_oracle(const std::vector<double>& y, const std::vector<int>& delta,
                                     const std::vector<std::vector<double>>& x,
                                     const std::vector<int>& idx) {
  std::vector<double> ys;
  std::vector<int> ds;
  std::vector<std::vector<double>> xs;
  for (int i : idx) {
    ys.push_back(y[i]);
    ds.push_back(delta[i]);
    xs.push_back(x[i]);
  }
  const std::vector<int> ord = order_by_y(ys, ds);
  std::vector<int> dord(ord.size());
  for (std::size_t l = 0; l < ord.size(); ++l) dord[l] = ds[ord[l]];
  const product_limit pl = product_limit_ordered(dord);

  const int p = static_cast<int>(xs[0].size());
  std::vector<std::vector<double>> gram(p, std::vector<double>(p, 0.0));
  std::vector<double> rhs(p, 0.0);
  for (std::size_t l = 0; l < ord.size(); ++l) {
    const double w = pl.jumps[l];
    if (w == 0.0) continue;
    const auto& row = xs[ord[l]];
    for (int a = 0; a < p; ++a) {
      rhs[a] += w * row[a] * ys[ord[l]];
      for (int b = 0; b < p; ++b) gram[a][b] += w * row[a] * row[b];
    }
  }
  wls_solution sol;
  sol.beta = solve_dense(gram, rhs);
  for (std::size_t l = 0; l < ord.size(); ++l) {
    const double w = pl.jumps[l];
    if (w == 0.0) continue;
    double fit = 0.0;
    for (int a = 0; a < p; ++a) fit += xs[ord[l]][a] * sol.beta[a];
    const double r = ys[ord[l]] - fit;
    sol.weighted_rss += w * r * r;
  }
  return sol;
}

/// Exhaustive 1-D minimization over [lo, hi] with the given step.
inline double grid_minimize(const std::function<double(double)>& f, double lo, double hi,
                            double step) {
  double best_x = lo;
  double best_v = f(lo);
  for (double x = lo + step; x <= hi; x += step) {
    const double v = f(x);
    if (v < best_v) {
      best_v = v;
      best_x = x;
    }
  }
  return best_x;
}

}  // namespace oracle

#endif
