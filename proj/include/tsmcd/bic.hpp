#ifndef TSMCD_BIC_HPP
#define TSMCD_BIC_HPP

#include <cmath>
#include <vector>

#include "tsmcd/final_fit.hpp"
#include "tsmcd/wls.hpp"

namespace tsmcd {

/// Bayesian information criterion of a threshold set:
///   n* log( sum_j (#I_j/n) min_beta sum_{i in I_j} w (y_i - x_i'beta)^2 )
///     + p (s+1) log n*,
/// with unpenalized Stute fits per subgroup. The complexity weight is p, the
/// coefficients contributed by each subgroup. Both scale factors use the
/// event count n*: censored observations carry no jump mass, so the fit term
/// aggregates at most n* informative residuals, and an n-scaled version
/// over-rewards tiny event-starved subgroups that a six-parameter fit can
/// interpolate.
inline double bic_for_thresholds(const survival_dataset& data, const std::vector<double>& a_hat,
                                 double* total_out = nullptr) {
  const auto groups = threshold_groups(data, a_hat);
  const double n = static_cast<double>(data.n());
  double total = 0.0;
  for (std::size_t j = 0; j < groups.size(); ++j) {
    if (groups[j].empty())
      fail(errc::invalid_thresholds, "bic: threshold subgroup " + std::to_string(j) + " is empty");
    try {
      const wls_fit fit = stute_wls(data, groups[j]);
      total += (static_cast<double>(groups[j].size()) / n) * fit.weighted_rss;
    } catch (const error& e) {
      fail(errc::invalid_thresholds,
           "bic: subgroup " + std::to_string(j) + " fit failed (" + e.what() + ")");
    }
  }
  if (total_out != nullptr) *total_out = total;
  const double s_hat = static_cast<double>(a_hat.size());
  const double ne = static_cast<double>(data.n_events());
  return ne * std::log(total) + data.p() * (s_hat + 1.0) * std::log(ne);
}

}  // namespace tsmcd

#endif
