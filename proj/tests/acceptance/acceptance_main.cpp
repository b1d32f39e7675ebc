// End-to-end acceptance suite. Each criterion prints one pass/fail line;
// the exit code is the number of failures.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <random>
#include <sstream>
#include <string>

#include "tsmcd/tsmcd.hpp"

#include "oracles.hpp"
#include "refine_oracle.hpp"
#include "test_data.hpp"

namespace {

int failures = 0;

void report(int idx, const std::string& name, bool pass, const std::string& detail) {
  std::printf("[%s] criterion %02d: %s — %s\n", pass ? "PASS" : "FAIL", idx, name.c_str(),
              detail.c_str());
  std::fflush(stdout);
  if (!pass) ++failures;
}

std::string fmt(const char* pattern, double a, double b = 0.0, double c = 0.0) {
  char buf[256];
  std::snprintf(buf, sizeof(buf), pattern, a, b, c);
  return buf;
}

double s_hat_share(const tsmcd::simulation_report& rep, int s) {
  if (rep.completed == 0) return 0.0;
  const auto it = rep.s_hat_frequency.find(s);
  const int hits = it == rep.s_hat_frequency.end() ? 0 : it->second;
  return static_cast<double>(hits) / rep.completed;
}

}  // namespace

int main() {
  const int threads = tsmcd::effective_threads(0);
  std::printf("running acceptance suite with %d worker thread(s)\n", threads);

  tsmcd::tuning_config mcp_cfg;
  mcp_cfg.threads = threads;
  tsmcd::tuning_config scad_cfg = mcp_cfg;
  scad_cfg.kind = tsmcd::penalty_kind::scad;

  // ---- criteria 1, 2, 5: Example 2 Monte Carlo at desk scale --------------
  const auto t0 = std::chrono::steady_clock::now();
  const auto ex2 = tsmcd::sim_design::example(tsmcd::example_id::ex2, 20240601);
  const auto ex2_mcp = tsmcd::run_monte_carlo(ex2, 200, mcp_cfg);
  const auto ex2_scad = tsmcd::run_monte_carlo(ex2, 200, scad_cfg);
  const double minutes =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count() / 60.0;

  const double freq_mcp = s_hat_share(ex2_mcp, 2);
  const double freq_scad = s_hat_share(ex2_scad, 2);
  report(1, "example 2 threshold-count recovery",
         freq_mcp >= 0.85 && freq_scad >= 0.80,
         fmt("mcp %.3f (need >= 0.85), scad %.3f (need >= 0.80), ", freq_mcp, freq_scad) +
             fmt("%.1f min for 400 replications", minutes));

  {
    const double bias1 = ex2_mcp.threshold_bias[0];
    const double mse1 = ex2_mcp.threshold_rmse[0];
    const double mse2 = ex2_mcp.threshold_rmse[1];
    report(2, "example 2 threshold accuracy",
           std::fabs(bias1) <= 0.03 && mse1 <= 0.03 && mse2 <= 0.35,
           fmt("bias(a1) %.4f (|.| <= 0.03), mse(a1) %.4f (<= 0.03), mse(a2) %.4f (<= 0.35)",
               bias1, mse1, mse2));
  }

  // ---- criterion 3: smaller sample degrades, but stays useful -------------
  {
    const auto ex1 = tsmcd::sim_design::example(tsmcd::example_id::ex1, 20240601);
    const auto ex1_mcp = tsmcd::run_monte_carlo(ex1, 200, mcp_cfg);
    const double freq_ex1 = s_hat_share(ex1_mcp, 2);
    report(3, "example 1 sample-size trend", freq_ex1 >= 0.65 && freq_ex1 < freq_mcp,
           fmt("n=150 frequency %.3f (need >= 0.65 and < %.3f)", freq_ex1, freq_mcp));
  }

  // ---- criterion 4: censoring calibration ----------------------------------
  {
    bool pass = true;
    std::ostringstream detail;
    for (const auto id :
         {tsmcd::example_id::ex1, tsmcd::example_id::ex2, tsmcd::example_id::ex3}) {
      double censored = 0.0;
      long rows = 0;
      for (int r = 0; r < 1000; ++r) {
        auto d = tsmcd::sim_design::example(id, 20240604);
        d.seed = tsmcd::rng::stream_seed(20240604, static_cast<std::uint64_t>(r));
        const auto data = tsmcd::generate(d);
        censored += data.n() - data.n_events();
        rows += data.n();
      }
      const double rate = censored / rows;
      pass = pass && rate >= 0.35 && rate <= 0.45;
      detail << tsmcd::example_name(id) << " " << fmt("%.3f ", rate);
    }
    report(4, "censoring rate 40% +- 5% over 1000 datasets each", pass, detail.str());
  }

  // ---- criterion 5: exact-zero recovery of the true zero coordinates ------
  {
    const int zero_idx[] = {7, 8, 12, 15, 16, 17};
    int matched = 0;
    int counts[6] = {0, 0, 0, 0, 0, 0};
    for (const auto& rec : ex2_mcp.records) {
      if (!rec.ok || rec.s_hat != 2) continue;
      ++matched;
      for (int k = 0; k < 6; ++k)
        if (rec.theta_star[zero_idx[k]] == 0.0) ++counts[k];
    }
    double worst = 1.0;
    for (int k = 0; k < 6; ++k)
      worst = std::min(worst, matched > 0 ? static_cast<double>(counts[k]) / matched : 0.0);
    report(5, "true zero coefficients estimated as exact zeros",
           matched > 0 && worst >= 0.70,
           fmt("worst coordinate share %.3f over %g matching replications (need >= 0.70)", worst,
               static_cast<double>(matched)));
  }

  // ---- criterion 6: oracle recovery on a noiseless instance ---------------
  {
    const int n = 120;
    const int m = 10;
    auto data = testdata::noiseless_piecewise(n, {0.0, 0.5},
                                              {{1.0, 2.0}, {3.0, 2.0}, {0.5, 3.5}});
    const auto seg0 = tsmcd::build_segments(data, m);
    const double b1 = seg0.boundaries[1];
    const double b2 = seg0.boundaries[6];
    // one increment coordinate is exactly zero, so the restricted fit is a
    // genuine sparse oracle
    data = testdata::noiseless_piecewise(n, {b1, b2}, {{1.0, 2.0}, {3.0, 2.0}, {0.5, 3.5}});

    tsmcd::tuning_config cfg;
    cfg.kappa_grid = {(m + 0.5) / std::sqrt(static_cast<double>(n))};
    bool pass = false;
    std::string detail;
    try {
      const auto fit = tsmcd::tsmcd_fit(data, cfg);
      Eigen::VectorXd truth(6);
      truth << 1.0, 2.0, 2.0, 0.0, -2.5, 1.5;
      if (fit.s_hat == 2 && fit.a_hat[0] == b1 && fit.a_hat[1] == b2 &&
          fit.theta_star.size() == 6) {
        const double max_err = (fit.theta_star - truth).cwiseAbs().maxCoeff();
        pass = max_err <= 1e-6 && fit.theta_star[3] == 0.0;
        detail = fmt("thresholds exact, max coefficient error %.2e (need <= 1e-6)", max_err);
      } else {
        detail = fmt("wrong model: s_hat %g", static_cast<double>(fit.s_hat));
      }
    } catch (const std::exception& e) {
      detail = std::string("pipeline failed: ") + e.what();
    }
    report(6, "noiseless oracle recovery", pass, detail);
  }

  // ---- criterion 7: Kaplan-Meier weights against the product-limit oracle -
  {
    std::mt19937 gen(909);
    std::uniform_int_distribution<int> size_dist(1, 50);
    std::bernoulli_distribution censor(0.4);
    int bad = 0;
    for (int rep = 0; rep < 1000; ++rep) {
      const int b = size_dist(gen);
      std::vector<int> delta(static_cast<std::size_t>(b));
      bool any = false;
      for (auto& d : delta) {
        d = censor(gen) ? 0 : 1;
        any = any || d == 1;
      }
      if (!any) delta[static_cast<std::size_t>(b - 1)] = 1;
      const auto w = tsmcd::km_weights(delta);
      const auto pl = oracle::product_limit_ordered(delta);
      for (int l = 0; l < b; ++l)
        if (std::fabs(w[static_cast<std::size_t>(l)] - pl.jumps[static_cast<std::size_t>(l)]) >
            1e-12)
          ++bad;
      // all-event subsets must be exactly uniform
      const std::vector<int> all(static_cast<std::size_t>(b), 1);
      for (const double v : tsmcd::km_weights(all))
        if (v != 1.0 / b) ++bad;
    }
    report(7, "Kaplan-Meier weight oracle suite (1000 instances)", bad == 0,
           fmt("%g mismatches beyond 1e-12", static_cast<double>(bad)));
  }

  // ---- criterion 8: solver certificates ------------------------------------
  {
    std::mt19937 gen(808);
    std::uniform_real_distribution<double> ld(0.02, 0.4);
    int trace_bad = 0, kkt_bad = 0, nonconv = 0;
    for (int rep = 0; rep < 100; ++rep) {
      const auto data = testdata::random_censored(60 + (rep % 5) * 20,
                                                  static_cast<std::uint32_t>(1000 + rep), 0.3);
      const auto seg = tsmcd::build_segments(data, 6 + rep % 7);
      const auto design = tsmcd::build_group_design(data, seg);
      const double lambda = ld(gen);
      const tsmcd::penalty_spec pen(
          rep % 2 == 0 ? tsmcd::penalty_kind::mcp : tsmcd::penalty_kind::scad, lambda, 2.4);
      const auto sol = tsmcd::group_coordinate_descent(design, pen, {1e-6, 20000});
      if (!sol.converged) ++nonconv;
      for (std::size_t k = 1; k < sol.objective_trace.size(); ++k)
        if (sol.objective_trace[k] > sol.objective_trace[k - 1] + 1e-12) ++trace_bad;
      for (const auto& [g, norm] : tsmcd::zero_group_gradients(design, sol.theta))
        if (norm > lambda * (1.0 + 1e-4)) ++kkt_bad;
    }
    report(8, "solver descent and stationarity certificates (100 instances)",
           trace_bad == 0 && kkt_bad == 0 && nonconv == 0,
           fmt("%g trace violations, %g stationarity violations, %g non-converged",
               static_cast<double>(trace_bad), static_cast<double>(kkt_bad),
               static_cast<double>(nonconv)));
  }

  // ---- criterion 9: refinement equals the exhaustive scan ------------------
  {
    int tested = 0, mismatched = 0;
    for (int rep = 0; tested < 100; ++rep) {
      const auto data = testdata::random_censored(90 + (rep % 4) * 15,
                                                  static_cast<std::uint32_t>(2000 + rep), 0.3);
      const auto seg = tsmcd::build_segments(data, 9 + rep % 4);
      const int min_side = tsmcd::default_min_side_events(data.p());
      for (int k = 1; k <= seg.q && tested < 100; ++k) {
        const auto w = tsmcd::make_refine_window(data, seg, k, min_side);
        if (w.candidate_zs.empty()) continue;
        const auto res = tsmcd::refine_threshold(data, w);
        const double brute = oracle::brute_force_refine(data, w, min_side);
        if (res.a_hat != brute) ++mismatched;
        ++tested;
      }
    }
    report(9, "refinement equals the brute-force scan (100 windows)", mismatched == 0,
           fmt("%g mismatches of %g windows", static_cast<double>(mismatched),
               static_cast<double>(tested)));
  }

  // ---- criterion 10: null-model control ------------------------------------
  {
    const auto null_design = tsmcd::sim_design::null_model(300, 20240603);
    const auto rep = tsmcd::run_monte_carlo(null_design, 100, mcp_cfg);
    const double freq0 = s_hat_share(rep, 0);
    report(10, "no spurious thresholds under the null", freq0 >= 0.90,
           fmt("s_hat = 0 in %.3f of replications (need >= 0.90)", freq0));
  }

  std::printf("%s: %d of 10 criteria failed\n", failures == 0 ? "SUCCESS" : "FAILURE", failures);
  return failures;
}
