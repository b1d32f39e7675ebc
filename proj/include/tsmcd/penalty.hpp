#ifndef TSMCD_PENALTY_HPP
#define TSMCD_PENALTY_HPP

#include <Eigen/Dense>
#include <cmath>

#include "tsmcd/errors.hpp"

namespace tsmcd {

enum class penalty_kind { mcp, scad };

inline const char* penalty_name(penalty_kind k) {
  return k == penalty_kind::mcp ? "mcp" : "scad";
}

/// Concave penalty p_{lambda,gamma}(|u|), either MCP (gamma > 2) or SCAD
/// (gamma > 1). Both are linear with slope lambda near zero and flat beyond
/// gamma * lambda.
struct penalty_spec {
  penalty_kind kind;
  double lambda;
  double gamma;

  penalty_spec(penalty_kind k, double lam, double gam) : kind(k), lambda(lam), gamma(gam) {
    if (!(lambda >= 0.0)) fail(errc::invalid_argument, "penalty: lambda must be >= 0");
    if (kind == penalty_kind::mcp && !(gamma > 2.0))
      fail(errc::invalid_argument, "penalty: MCP requires gamma > 2");
    if (kind == penalty_kind::scad && !(gamma > 1.0))
      fail(errc::invalid_argument, "penalty: SCAD requires gamma > 1");
  }

  /// The quadratic weight a of the thresholding subproblem
  /// 0.5*a*(theta - v)^2 + p(|theta|) must exceed this bound for the
  /// subproblem to be convex: 1/gamma for MCP, 1/(gamma-1) for SCAD.
  double convexity_bound() const {
    return kind == penalty_kind::mcp ? 1.0 / gamma : 1.0 / (gamma - 1.0);
  }
};

inline double penalty_value(const penalty_spec& s, double u) {
  if (u < 0.0) fail(errc::invalid_argument, "penalty_value: negative argument");
  const double l = s.lambda;
  const double g = s.gamma;
  if (s.kind == penalty_kind::mcp) {
    if (u <= g * l) return l * u - u * u / (2.0 * g);
    return 0.5 * g * l * l;
  }
  if (u <= l) return l * u;
  if (u <= g * l) return (g * l * u - 0.5 * (u * u + l * l)) / (g - 1.0);
  return l * l * (g * g - 1.0) / (2.0 * (g - 1.0));
}

/// Right derivative of penalty_value; equals lambda at 0 and vanishes beyond
/// gamma * lambda.
inline double penalty_derivative(const penalty_spec& s, double u) {
  if (u < 0.0) fail(errc::invalid_argument, "penalty_derivative: negative argument");
  const double l = s.lambda;
  const double g = s.gamma;
  if (s.kind == penalty_kind::mcp) return u < g * l ? l - u / g : 0.0;
  if (u < l) return l;
  if (u < g * l) return (g * l - u) / (g - 1.0);
  return 0.0;
}

inline double soft_threshold(double v, double t) {
  if (v > t) return v - t;
  if (v < -t) return v + t;
  return 0.0;
}

/// Global minimizer of 0.5*a*(theta - v)^2 + p_{lambda,gamma}(|theta|).
/// Firm thresholding for MCP, the three-segment rule for SCAD. Requires a
/// above the convexity bound so the subproblem has a unique minimum.
inline double scalar_threshold(const penalty_spec& s, double v, double a) {
  if (!(a > 0.0)) fail(errc::invalid_argument, "scalar_threshold: a must be positive");
  if (!(a > s.convexity_bound()))
    fail(errc::nonconvex_subproblem,
         "scalar_threshold: quadratic weight below the convexity bound");
  const double l = s.lambda;
  const double g = s.gamma;
  const double av = std::fabs(v);
  if (av > g * l) return v;
  if (s.kind == penalty_kind::mcp) return soft_threshold(v, l / a) / (1.0 - 1.0 / (a * g));
  if (av <= l * (1.0 + 1.0 / a)) return soft_threshold(v, l / a);
  const double shrink = 1.0 - 1.0 / ((g - 1.0) * a);
  return soft_threshold(v, g * l / ((g - 1.0) * a)) / shrink;
}

/// 2-norm group analogue: minimizer of 0.5*a*||theta - v||^2 + p(||theta||).
/// Scales v by scalar_threshold(||v||)/||v||, preserving its direction.
inline Eigen::VectorXd group_threshold(const penalty_spec& s, const Eigen::VectorXd& v, double a) {
  const double nrm = v.norm();
  if (nrm == 0.0) {
    // validate a even for the trivial input
    scalar_threshold(s, 0.0, a);
    return Eigen::VectorXd::Zero(v.size());
  }
  const double t = scalar_threshold(s, nrm, a);
  if (t == 0.0) return Eigen::VectorXd::Zero(v.size());
  return v * (t / nrm);
}

}  // namespace tsmcd

#endif
