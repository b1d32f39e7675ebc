#ifndef TSMCD_REFINE_HPP
#define TSMCD_REFINE_HPP

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "tsmcd/segmentation.hpp"
#include "tsmcd/wls.hpp"

namespace tsmcd {

/// Two-segment search window around a candidate segment. Split points are the
/// observed z values inside (lower, upper] that leave at least
/// min_side_events events on each side.
struct refine_window {
  double lower = 0.0;
  double upper = 0.0;
  bool has_lower = false;  ///< false: window extends to -inf
  bool has_upper = false;  ///< false: window extends to +inf
  std::vector<int> rows;              ///< dataset rows inside the window, z-ascending
  std::vector<double> candidate_zs;   ///< admissible split points, ascending
};

inline int default_min_side_events(int p) { return std::max(p + 2, 5); }

/// Window for candidate segment k (0-based): the interval
///   ( z~_(n* - (q-k+2)m), z~_(n* - (q-k)m) ]
/// of event z-order statistics, clamped to the sample's z-range at the edges.
inline refine_window make_refine_window(const survival_dataset& data, const segmentation& seg,
                                        int k, int min_side_events) {
  const int q = seg.q;
  const int m = seg.m;
  if (k < 1 || k > q) fail(errc::invalid_argument, "make_refine_window: candidate out of range");

  std::vector<double> event_z;
  event_z.reserve(static_cast<std::size_t>(data.n()));
  for (int i = 0; i < data.n(); ++i)
    if (data.delta[i] == 1) event_z.push_back(data.z[i]);
  std::sort(event_z.begin(), event_z.end());
  const int nstar = static_cast<int>(event_z.size());

  refine_window w;
  const int lo_rank = nstar - (q - k + 2) * m;  // 1-based order-statistic ranks
  const int hi_rank = nstar - (q - k) * m;
  if (lo_rank >= 1) {
    w.has_lower = true;
    w.lower = event_z[static_cast<std::size_t>(lo_rank - 1)];
  }
  if (k < q && hi_rank <= nstar) {
    w.has_upper = true;
    w.upper = event_z[static_cast<std::size_t>(hi_rank - 1)];
  }

  for (int i = 0; i < data.n(); ++i) {
    const double z = data.z[i];
    if (w.has_lower && !(z > w.lower)) continue;
    if (w.has_upper && !(z <= w.upper)) continue;
    w.rows.push_back(i);
  }
  std::sort(w.rows.begin(), w.rows.end(), [&](int a, int b) {
    if (data.z[a] != data.z[b]) return data.z[a] < data.z[b];
    return a < b;
  });

  // admissible split values: distinct z with enough events strictly on each side
  const int total_events = [&] {
    int c = 0;
    for (int i : w.rows) c += data.delta[i];
    return c;
  }();
  int left_events = 0;
  for (std::size_t i = 0; i < w.rows.size();) {
    const double z = data.z[w.rows[i]];
    std::size_t j = i;
    while (j < w.rows.size() && data.z[w.rows[j]] == z) {
      left_events += data.delta[w.rows[j]];
      ++j;
    }
    if (left_events >= min_side_events && total_events - left_events >= min_side_events)
      w.candidate_zs.push_back(z);
    i = j;
  }
  return w;
}

struct refine_result {
  double a_hat = 0.0;
  double q_min = 0.0;
};

/// Exhaustive scan of the window: for each admissible split value the two
/// sides are fit by Stute weighted least squares with side-local weights and
/// their errors combined with side-share scaling,
///   Q(s) = (#left/#window) rss_left + (#right/#window) rss_right.
/// Sides whose weighted Gram matrix is singular score +inf. Ties break toward
/// the smaller split value.
inline refine_result refine_threshold(const survival_dataset& data, const refine_window& w) {
  if (w.candidate_zs.empty())
    fail(errc::degenerate_window, "refine_threshold: no admissible split point");
  const double win = static_cast<double>(w.rows.size());
  double best_q = std::numeric_limits<double>::infinity();
  double best_z = 0.0;
  bool found = false;
  for (const double cand : w.candidate_zs) {
    // rows are z-sorted: the left side is a prefix
    const auto split = std::upper_bound(w.rows.begin(), w.rows.end(), cand,
                                        [&](double v, int row) { return v < data.z[row]; });
    const std::size_t nl = static_cast<std::size_t>(split - w.rows.begin());
    const std::size_t nr = w.rows.size() - nl;
    if (nl == 0 || nr == 0) continue;
    double qval;
    try {
      const wls_fit left = stute_wls(data, std::span<const int>(w.rows.data(), nl));
      const wls_fit right = stute_wls(data, std::span<const int>(w.rows.data() + nl, nr));
      qval = (nl / win) * left.weighted_rss + (nr / win) * right.weighted_rss;
    } catch (const error&) {
      continue;  // singular or underdetermined side: score +inf
    }
    if (qval < best_q) {
      best_q = qval;
      best_z = cand;
      found = true;
    }
  }
  if (!found)
    fail(errc::degenerate_window, "refine_threshold: every admissible split was singular");
  return {best_z, best_q};
}

}  // namespace tsmcd

#endif
