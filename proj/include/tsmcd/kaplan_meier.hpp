#ifndef TSMCD_KAPLAN_MEIER_HPP
#define TSMCD_KAPLAN_MEIER_HPP

#include <algorithm>
#include <span>
#include <vector>

#include "tsmcd/survival_data.hpp"

namespace tsmcd {

/// Kaplan-Meier jump weights for a subset already sorted by ascending y.
/// With b observations,
///   w_1 = delta_1 / b,
///   w_l = delta_l / (b - l + 1) * prod_{k<l} ((b-k)/(b-k+1))^{delta_k},
/// i.e. the jump of the product-limit estimator at the l-th ordered
/// observation. Censored positions get weight zero; a fully uncensored
/// subset carries exactly uniform mass 1/b.
inline std::vector<double> km_weights(std::span<const int> delta_ordered) {
  const int b = static_cast<int>(delta_ordered.size());
  if (b == 0) fail(errc::invalid_subset, "km_weights: empty subset");
  std::vector<double> w(static_cast<std::size_t>(b));
  const bool any_censored =
      std::any_of(delta_ordered.begin(), delta_ordered.end(), [](int d) { return d == 0; });
  if (!any_censored) {
    std::fill(w.begin(), w.end(), 1.0 / b);
    return w;
  }
  double surv = 1.0;  // running product-limit survival just before position l
  for (int l = 0; l < b; ++l) {
    const int at_risk = b - l;
    if (delta_ordered[static_cast<std::size_t>(l)] == 1) {
      w[static_cast<std::size_t>(l)] = surv / at_risk;
      surv *= static_cast<double>(at_risk - 1) / at_risk;
    } else {
      w[static_cast<std::size_t>(l)] = 0.0;
    }
  }
  return w;
}

/// A subset ordered by ascending y together with its Kaplan-Meier weights.
/// Ties in y put events before censored observations; among equal (y, delta)
/// pairs the original index order decides.
struct ordered_subset {
  std::vector<int> order;       ///< dataset row of the l-th ordered observation
  std::vector<double> weights;  ///< Kaplan-Meier weight per ordered position

  int size() const { return static_cast<int>(order.size()); }
};

inline ordered_subset order_subset(const survival_dataset& data, std::span<const int> idx) {
  if (idx.empty()) fail(errc::invalid_subset, "order_subset: empty subset");
  ordered_subset out;
  out.order.assign(idx.begin(), idx.end());
  for (int i : out.order)
    if (i < 0 || i >= data.n()) fail(errc::invalid_subset, "order_subset: index out of range");
  std::sort(out.order.begin(), out.order.end(), [&](int a, int b) {
    if (data.y[a] != data.y[b]) return data.y[a] < data.y[b];
    if (data.delta[a] != data.delta[b]) return data.delta[a] > data.delta[b];
    return a < b;
  });
  std::vector<int> delta_ordered(out.order.size());
  for (std::size_t l = 0; l < out.order.size(); ++l)
    delta_ordered[l] = data.delta[out.order[l]];
  out.weights = km_weights(delta_ordered);
  return out;
}

}  // namespace tsmcd

#endif
