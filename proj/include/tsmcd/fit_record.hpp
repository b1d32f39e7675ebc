#ifndef TSMCD_FIT_RECORD_HPP
#define TSMCD_FIT_RECORD_HPP

#include <json.hpp>
#include <limits>
#include <string>
#include <vector>

#include "tsmcd/bootstrap.hpp"
#include "tsmcd/pipeline.hpp"
#include "tsmcd/version.hpp"

namespace tsmcd {

using json = nlohmann::ordered_json;

/// FNV-1a digest of a byte string, used to tag results with their input.
inline std::string fnv1a_digest(const std::string& bytes) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

namespace detail {

inline json vec_to_json(const Eigen::VectorXd& v) {
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

inline json mat_to_json(const Eigen::MatrixXd& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

inline Eigen::VectorXd vec_from_json(const json& a) {
  Eigen::VectorXd v(static_cast<Eigen::Index>(a.size()));
  for (std::size_t i = 0; i < a.size(); ++i) v[static_cast<Eigen::Index>(i)] = a[i].get<double>();
  return v;
}

inline Eigen::MatrixXd mat_from_json(const json& rows) {
  const Eigen::Index r = static_cast<Eigen::Index>(rows.size());
  const Eigen::Index c = r > 0 ? static_cast<Eigen::Index>(rows[0].size()) : 0;
  Eigen::MatrixXd m(r, c);
  for (Eigen::Index i = 0; i < r; ++i)
    for (Eigen::Index j = 0; j < c; ++j)
      m(i, j) = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)].get<double>();
  return m;
}

}  // namespace detail

/// Self-describing result document for one fitted model. Serializes to JSON
/// and parses back losslessly; the per-group table mirrors the usual
/// coefficient / standard error / p-value layout when bootstrap results are
/// attached.
struct fit_record {
  std::string software_version = version;
  std::string input_digest;
  std::vector<std::string> covariate_names;
  int z_index = 0;
  penalty_kind kind = penalty_kind::mcp;
  double gamma = 2.4;
  threshold_fit fit;

  bool has_bootstrap = false;
  int bootstrap_b = 0;
  std::uint64_t bootstrap_seed = 0;
  Eigen::VectorXd theta_se, theta_ci_low, theta_ci_high, theta_p;
  Eigen::MatrixXd group_se, group_p;  ///< p x (s+1), derived from group draws

  json to_json() const {
    json j;
    j["software_version"] = software_version;
    j["input_digest"] = input_digest;
    j["covariates"] = covariate_names;
    j["z_index"] = z_index;
    j["penalty"] = penalty_name(kind);
    j["gamma"] = gamma;
    j["s_hat"] = fit.s_hat;
    j["thresholds"] = fit.a_hat;
    j["theta_star"] = detail::vec_to_json(fit.theta_star);
    j["beta_by_group"] = detail::mat_to_json(fit.beta_by_group);
    j["bic"] = fit.bic;
    j["m_used"] = fit.m_used;
    j["lambda_used"] = fit.lambda_used;
    j["final_lambda_used"] = fit.final_lambda_used;
    j["kappa_used"] = fit.kappa_used;
    j["final_converged"] = fit.final_converged;
    if (has_bootstrap) {
      json b;
      b["b"] = bootstrap_b;
      b["seed"] = bootstrap_seed;
      b["theta_se"] = detail::vec_to_json(theta_se);
      b["theta_ci_low"] = detail::vec_to_json(theta_ci_low);
      b["theta_ci_high"] = detail::vec_to_json(theta_ci_high);
      b["theta_p"] = detail::vec_to_json(theta_p);
      b["group_se"] = detail::mat_to_json(group_se);
      b["group_p"] = detail::mat_to_json(group_p);
      j["bootstrap"] = std::move(b);
    }
    return j;
  }

  static fit_record from_json(const json& j) {
    fit_record r;
    r.software_version = j.at("software_version").get<std::string>();
    r.input_digest = j.at("input_digest").get<std::string>();
    r.covariate_names = j.at("covariates").get<std::vector<std::string>>();
    r.z_index = j.at("z_index").get<int>();
    r.kind = j.at("penalty").get<std::string>() == "scad" ? penalty_kind::scad
                                                          : penalty_kind::mcp;
    r.gamma = j.at("gamma").get<double>();
    r.fit.s_hat = j.at("s_hat").get<int>();
    r.fit.a_hat = j.at("thresholds").get<std::vector<double>>();
    r.fit.theta_star = detail::vec_from_json(j.at("theta_star"));
    r.fit.beta_by_group = detail::mat_from_json(j.at("beta_by_group"));
    // non-finite BIC (a perfect fit) serializes as null
    r.fit.bic = j.at("bic").is_null() ? -std::numeric_limits<double>::infinity()
                                      : j.at("bic").get<double>();
    r.fit.m_used = j.at("m_used").get<int>();
    r.fit.lambda_used = j.at("lambda_used").get<double>();
    r.fit.final_lambda_used = j.at("final_lambda_used").get<double>();
    r.fit.kappa_used = j.at("kappa_used").get<double>();
    r.fit.final_converged = j.at("final_converged").get<bool>();
    if (j.contains("bootstrap")) {
      const json& b = j.at("bootstrap");
      r.has_bootstrap = true;
      r.bootstrap_b = b.at("b").get<int>();
      r.bootstrap_seed = b.at("seed").get<std::uint64_t>();
      r.theta_se = detail::vec_from_json(b.at("theta_se"));
      r.theta_ci_low = detail::vec_from_json(b.at("theta_ci_low"));
      r.theta_ci_high = detail::vec_from_json(b.at("theta_ci_high"));
      r.theta_p = detail::vec_from_json(b.at("theta_p"));
      r.group_se = detail::mat_from_json(b.at("group_se"));
      r.group_p = detail::mat_from_json(b.at("group_p"));
    }
    return r;
  }

  std::string serialize() const { return to_json().dump(2) + "\n"; }

  static fit_record parse(const std::string& text) { return from_json(json::parse(text)); }
};

}  // namespace tsmcd

#endif
