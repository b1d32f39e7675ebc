#ifndef TSMCD_KM_CURVE_HPP
#define TSMCD_KM_CURVE_HPP

#include <algorithm>
#include <vector>

#include "tsmcd/survival_data.hpp"

namespace tsmcd {

struct km_curve_point {
  double time = 0.0;
  double survival = 1.0;
};

struct km_curve_group {
  int group = 0;
  int size = 0;
  bool empty = false;
  std::vector<km_curve_point> steps;         ///< survival after each distinct event time
  std::vector<km_curve_point> censor_ticks;  ///< censoring marks at the current level
};

/// Product-limit survival step data per group. Events at a tied time are
/// processed before censorings at that time, the usual Kaplan-Meier
/// convention. Empty groups come back flagged so callers can warn and omit.
inline std::vector<km_curve_group> km_curves(const survival_dataset& data,
                                             const std::vector<int>& assignment, int n_groups) {
  if (static_cast<int>(assignment.size()) != data.n())
    fail(errc::invalid_argument, "km_curves: assignment length mismatch");
  if (n_groups < 1) fail(errc::invalid_argument, "km_curves: need at least one group");
  for (int g : assignment)
    if (g < 0 || g >= n_groups)
      fail(errc::invalid_argument, "km_curves: assignment outside [0, n_groups)");

  std::vector<km_curve_group> out(static_cast<std::size_t>(n_groups));
  for (int g = 0; g < n_groups; ++g) {
    auto& curve = out[static_cast<std::size_t>(g)];
    curve.group = g;
    std::vector<int> rows;
    for (int i = 0; i < data.n(); ++i)
      if (assignment[static_cast<std::size_t>(i)] == g) rows.push_back(i);
    curve.size = static_cast<int>(rows.size());
    if (rows.empty()) {
      curve.empty = true;
      continue;
    }
    std::sort(rows.begin(), rows.end(), [&](int a, int b) {
      if (data.y[a] != data.y[b]) return data.y[a] < data.y[b];
      if (data.delta[a] != data.delta[b]) return data.delta[a] > data.delta[b];
      return a < b;
    });
    double surv = 1.0;
    int at_risk = curve.size;
    std::size_t i = 0;
    while (i < rows.size()) {
      const double t = data.y[rows[i]];
      int events = 0;
      int censored = 0;
      std::size_t j = i;
      while (j < rows.size() && data.y[rows[j]] == t) {
        if (data.delta[rows[j]] == 1)
          ++events;
        else
          ++censored;
        ++j;
      }
      if (events > 0) {
        surv *= 1.0 - static_cast<double>(events) / at_risk;
        curve.steps.push_back({t, surv});
      }
      for (int c = 0; c < censored; ++c) curve.censor_ticks.push_back({t, surv});
      at_risk -= events + censored;
      i = j;
    }
  }
  return out;
}

}  // namespace tsmcd

#endif
