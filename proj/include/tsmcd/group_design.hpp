#ifndef TSMCD_GROUP_DESIGN_HPP
#define TSMCD_GROUP_DESIGN_HPP

#include <Eigen/Dense>
#include <vector>

#include "tsmcd/kaplan_meier.hpp"
#include "tsmcd/segmentation.hpp"

namespace tsmcd {

/// Weighted block design shared by the splitting-stage group solver and the
/// final penalized fit. Rows are grouped by segment and scaled by
/// sqrt(b_j * w) with segment-local Kaplan-Meier weights w; block column j
/// applies to all rows of segments j..G-1, encoding the cumulative
/// parameterization beta_seg(g) = theta_0 + ... + theta_g.
struct group_design {
  Eigen::MatrixXd xs;           ///< n x p scaled regressor rows, segment-ordered
  Eigen::VectorXd ys;           ///< scaled responses
  std::vector<int> row_of;      ///< design row -> dataset row
  std::vector<int> group_start; ///< size groups+1; rows of group g are [start[g], start[g+1])
  int n = 0;
  int p = 0;
  int groups = 0;

  int rows_from(int g) const { return n - group_start[static_cast<std::size_t>(g)]; }

  /// Dense n x (groups*p) zero-padded block matrix; rows in group g have zero
  /// entries in block columns g+1..groups-1. Intended for tests and small
  /// direct solves.
  Eigen::MatrixXd dense() const {
    Eigen::MatrixXd out = Eigen::MatrixXd::Zero(n, static_cast<Eigen::Index>(groups) * p);
    for (int g = 0; g < groups; ++g) {
      const int start = group_start[static_cast<std::size_t>(g)];
      const int len = group_start[static_cast<std::size_t>(g) + 1] - start;
      for (int j = 0; j <= g; ++j)
        out.block(start, static_cast<Eigen::Index>(j) * p, len, p) = xs.middleRows(start, len);
    }
    return out;
  }
};

/// Build the weighted block design from arbitrary disjoint index sets, one
/// per group, ordered by the grouping variable.
inline group_design build_group_design(const survival_dataset& data,
                                       const std::vector<std::vector<int>>& index_sets) {
  group_design d;
  d.p = data.p();
  d.groups = static_cast<int>(index_sets.size());
  int total = 0;
  for (const auto& set : index_sets) total += static_cast<int>(set.size());
  d.n = total;
  d.xs.resize(total, d.p);
  d.ys.resize(total);
  d.row_of.resize(static_cast<std::size_t>(total));
  d.group_start.assign(static_cast<std::size_t>(d.groups) + 1, 0);

  int r = 0;
  for (int g = 0; g < d.groups; ++g) {
    d.group_start[static_cast<std::size_t>(g)] = r;
    const auto& set = index_sets[static_cast<std::size_t>(g)];
    if (set.empty()) continue;
    const ordered_subset os = order_subset(data, set);
    const double b = static_cast<double>(set.size());
    std::vector<double> row_weight(set.size());
    // map ordered weights back to the set's own storage order
    std::vector<int> pos_in_set(set.size());
    {
      std::vector<std::pair<int, int>> where(set.size());
      for (std::size_t k = 0; k < set.size(); ++k) where[k] = {set[k], static_cast<int>(k)};
      std::sort(where.begin(), where.end());
      for (std::size_t l = 0; l < os.order.size(); ++l) {
        const auto it = std::lower_bound(where.begin(), where.end(),
                                         std::make_pair(os.order[l], -1));
        row_weight[static_cast<std::size_t>(it->second)] = os.weights[l];
      }
    }
    for (std::size_t k = 0; k < set.size(); ++k) {
      const int row = set[k];
      const double s = std::sqrt(b * row_weight[k]);
      d.xs.row(r) = s * data.X.row(row);
      d.ys[r] = s * data.y[row];
      d.row_of[static_cast<std::size_t>(r)] = row;
      ++r;
    }
  }
  d.group_start[static_cast<std::size_t>(d.groups)] = r;
  return d;
}

inline group_design build_group_design(const survival_dataset& data, const segmentation& seg) {
  return build_group_design(data, seg.index_sets);
}

}  // namespace tsmcd

#endif
