#ifndef TSMCD_SURVIVAL_DATA_HPP
#define TSMCD_SURVIVAL_DATA_HPP

#include <Eigen/Dense>
#include <numeric>
#include <vector>

#include "tsmcd/errors.hpp"

namespace tsmcd {

/// Right-censored regression sample: y holds log follow-up times, delta the
/// event indicators (1 = event, 0 = censored), X the regressors and z the
/// thresholding variable (usually one column of X).
struct survival_dataset {
  Eigen::VectorXd y;
  Eigen::VectorXi delta;
  Eigen::MatrixXd X;
  Eigen::VectorXd z;

  int n() const { return static_cast<int>(y.size()); }
  int p() const { return static_cast<int>(X.cols()); }
  int n_events() const { return delta.sum(); }

  void validate() const {
    const Eigen::Index nn = y.size();
    if (nn < 1) fail(errc::invalid_argument, "dataset is empty");
    if (delta.size() != nn || z.size() != nn || X.rows() != nn)
      fail(errc::invalid_argument, "y, delta, z and rows of X must have equal length");
    if (X.cols() < 1) fail(errc::invalid_argument, "X needs at least one column");
    if (!y.allFinite() || !X.allFinite() || !z.allFinite())
      fail(errc::invalid_argument, "non-finite value in dataset");
    int events = 0;
    for (Eigen::Index i = 0; i < nn; ++i) {
      if (delta[i] != 0 && delta[i] != 1)
        fail(errc::invalid_argument, "delta entries must be 0 or 1");
      events += delta[i];
    }
    if (events == 0) fail(errc::invalid_argument, "dataset contains no events");
  }
};

inline std::vector<int> all_indices(int n) {
  std::vector<int> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  return idx;
}

}  // namespace tsmcd

#endif
