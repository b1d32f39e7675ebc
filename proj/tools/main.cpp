// Command-line front end: fit | simulate | bootstrap | bic-scan | km-curves.
// Exit codes: 0 success, 1 usage/config error, 2 data error, 3 numerical
// failure.
#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include "tsmcd/tsmcd.hpp"

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) tsmcd::fail(tsmcd::errc::data_format, path + ": cannot open file");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_output(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) tsmcd::fail(tsmcd::errc::data_format, path + ": cannot open for writing");
  out << text;
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

/// "lo:hi:count" or a comma-separated list of values.
std::vector<double> parse_kappa_grid(const std::string& text) {
  std::vector<double> grid;
  if (text.find(':') != std::string::npos) {
    double lo, hi;
    int count;
    if (std::sscanf(text.c_str(), "%lf:%lf:%d", &lo, &hi, &count) != 3 || count < 1)
      tsmcd::fail(tsmcd::errc::infeasible_config, "bad --kappa-grid, want lo:hi:count");
    for (int i = 0; i < count; ++i)
      grid.push_back(count == 1 ? lo : lo + (hi - lo) * i / (count - 1));
    return grid;
  }
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) grid.push_back(std::stod(item));
  return grid;
}

struct common_flags {
  std::string data_path;
  std::string z_column;
  bool intercept = false;
  std::string penalty = "mcp";
  double gamma = 2.4;
  std::string kappa_grid;
  int lambda_grid = 50;
  double lambda_min_ratio = 0.01;
  std::string m_rule = "sqrt-n";
  int threads = 1;
  std::uint64_t seed = 0;
  std::string out;
};

void add_data_flags(CLI::App* cmd, common_flags& f) {
  cmd->add_option("--data", f.data_path, "dataset file (delimited text with header)")->required();
  cmd->add_option("--z", f.z_column, "thresholding column: regressor name or index")->required();
  cmd->add_flag("--intercept", f.intercept, "prepend an intercept column of ones");
}

void add_tuning_flags(CLI::App* cmd, common_flags& f) {
  cmd->add_option("--penalty", f.penalty, "penalty family")
      ->check(CLI::IsMember({"mcp", "scad"}))
      ->capture_default_str();
  cmd->add_option("--gamma", f.gamma, "penalty gamma")->capture_default_str();
  cmd->add_option("--kappa-grid", f.kappa_grid, "kappa grid, lo:hi:count or comma list");
  cmd->add_option("--lambda-grid", f.lambda_grid, "lambda path length")->capture_default_str();
  cmd->add_option("--lambda-min-ratio", f.lambda_min_ratio, "smallest lambda as a share of lambda_max")
      ->capture_default_str();
  cmd->add_option("--m-rule", f.m_rule, "base of m = floor(kappa*sqrt(.))")
      ->check(CLI::IsMember({"sqrt-n", "sqrt-nstar"}))
      ->capture_default_str();
  cmd->add_option("--threads", f.threads, "worker threads (0 = hardware)")->capture_default_str();
  cmd->add_option("--seed", f.seed, "random seed")->capture_default_str();
}

tsmcd::tuning_config make_config(const common_flags& f) {
  tsmcd::tuning_config cfg;
  if (!f.kappa_grid.empty()) cfg.kappa_grid = parse_kappa_grid(f.kappa_grid);
  cfg.lambda_grid_size = f.lambda_grid;
  cfg.lambda_min_ratio = f.lambda_min_ratio;
  cfg.kind = f.penalty == "scad" ? tsmcd::penalty_kind::scad : tsmcd::penalty_kind::mcp;
  cfg.gamma = f.gamma;
  cfg.seed = f.seed;
  cfg.m_rule = f.m_rule == "sqrt-nstar" ? tsmcd::tuning_config::m_rule_t::sqrt_nstar
                                        : tsmcd::tuning_config::m_rule_t::sqrt_n;
  cfg.threads = f.threads;
  return cfg;
}

tsmcd::fit_record build_record(const tsmcd::ingested_dataset& ds, const tsmcd::threshold_fit& fit,
                               const tsmcd::tuning_config& cfg, const std::string& digest) {
  tsmcd::fit_record rec;
  rec.input_digest = digest;
  rec.covariate_names = ds.covariate_names;
  rec.z_index = ds.z_index;
  rec.kind = cfg.kind;
  rec.gamma = cfg.gamma;
  rec.fit = fit;
  return rec;
}

void attach_bootstrap(tsmcd::fit_record& rec, const tsmcd::survival_dataset& data, int B,
                      std::uint64_t seed, int threads) {
  const tsmcd::penalty_spec pen(rec.kind, rec.fit.final_lambda_used, rec.gamma);
  const auto bs =
      tsmcd::bootstrap_se(data, rec.fit.a_hat, pen, rec.fit.theta_star, B, seed, {}, threads);
  rec.has_bootstrap = true;
  rec.bootstrap_b = B;
  rec.bootstrap_seed = seed;
  rec.theta_se = bs.se;
  rec.theta_ci_low = bs.ci_low;
  rec.theta_ci_high = bs.ci_high;
  rec.theta_p = bs.wald_p;

  // per-subgroup table: prefix-sum each draw, then SE and Wald p per cell
  const int p = static_cast<int>(rec.fit.beta_by_group.rows());
  const int G = static_cast<int>(rec.fit.beta_by_group.cols());
  rec.group_se.resize(p, G);
  rec.group_p.resize(p, G);
  const int b_eff = static_cast<int>(bs.draws.rows());
  for (int g = 0; g < G; ++g) {
    for (int c = 0; c < p; ++c) {
      double mean = 0.0;
      std::vector<double> vals(static_cast<std::size_t>(b_eff));
      for (int b = 0; b < b_eff; ++b) {
        double v = 0.0;
        for (int k = 0; k <= g; ++k) v += bs.draws(b, static_cast<Eigen::Index>(k) * p + c);
        vals[static_cast<std::size_t>(b)] = v;
        mean += v;
      }
      mean /= b_eff;
      double ss = 0.0;
      for (double v : vals) ss += (v - mean) * (v - mean);
      const double se = std::sqrt(ss / (b_eff - 1));
      rec.group_se(c, g) = se;
      const double est = rec.fit.beta_by_group(c, g);
      rec.group_p(c, g) = se > 0.0
                              ? 2.0 * (1.0 - tsmcd::normal_cdf(std::fabs(est) / se))
                              : (est != 0.0 ? 0.0 : 1.0);
    }
  }
}

std::string report_to_json(const tsmcd::simulation_report& rep, const tsmcd::sim_design& design,
                           const common_flags& f, int reps) {
  tsmcd::json j;
  j["example"] = tsmcd::example_name(design.id);
  j["n"] = design.n;
  j["reps"] = reps;
  j["penalty"] = f.penalty;
  j["seed"] = f.seed;
  j["completed"] = rep.completed;
  j["failures"] = rep.failures;
  j["flagged"] = rep.flagged;
  j["censor_rate_mean"] = rep.censor_rate_mean;
  tsmcd::json freq = tsmcd::json::object();
  for (const auto& [s, count] : rep.s_hat_frequency) freq[std::to_string(s)] = count;
  j["s_hat_frequency"] = std::move(freq);
  j["threshold_bias"] = rep.threshold_bias;
  j["threshold_rmse"] = rep.threshold_rmse;

  // histogram bins of the threshold estimates over the conditioning reps
  const int s_true = static_cast<int>(design.thresholds_true.size());
  tsmcd::json hists = tsmcd::json::array();
  for (int t = 0; t < s_true; ++t) {
    std::vector<double> vals;
    for (const auto& r : rep.records)
      if (r.ok && r.s_hat == s_true) vals.push_back(r.a_hat[static_cast<std::size_t>(t)]);
    tsmcd::json h;
    h["threshold"] = t + 1;
    if (!vals.empty()) {
      const auto [mn, mx] = std::minmax_element(vals.begin(), vals.end());
      const int bins = 20;
      const double lo = *mn;
      const double width = (*mx - *mn) > 0 ? (*mx - *mn) / bins : 1.0;
      std::vector<int> counts(bins, 0);
      for (double v : vals) {
        int b = static_cast<int>((v - lo) / width);
        if (b >= bins) b = bins - 1;
        ++counts[static_cast<std::size_t>(b)];
      }
      h["bin_start"] = lo;
      h["bin_width"] = width;
      h["counts"] = counts;
    }
    hists.push_back(std::move(h));
  }
  j["threshold_histograms"] = std::move(hists);

  // box-plot quartiles per coefficient over the conditioning reps
  tsmcd::json boxes = tsmcd::json::array();
  if (rep.coefficient_draws.rows() > 0) {
    for (Eigen::Index c = 0; c < rep.coefficient_draws.cols(); ++c) {
      std::vector<double> vals(static_cast<std::size_t>(rep.coefficient_draws.rows()));
      for (Eigen::Index r = 0; r < rep.coefficient_draws.rows(); ++r)
        vals[static_cast<std::size_t>(r)] = rep.coefficient_draws(r, c);
      std::sort(vals.begin(), vals.end());
      tsmcd::json b;
      b["coefficient"] = static_cast<int>(c) + 1;
      b["min"] = vals.front();
      b["q1"] = tsmcd::sorted_quantile(vals, 0.25);
      b["median"] = tsmcd::sorted_quantile(vals, 0.5);
      b["q3"] = tsmcd::sorted_quantile(vals, 0.75);
      b["max"] = vals.back();
      boxes.push_back(std::move(b));
    }
  }
  j["coefficient_boxplot"] = std::move(boxes);
  return j.dump(2) + "\n";
}

std::string records_to_tsv(const tsmcd::simulation_report& rep) {
  std::ostringstream out;
  out << "rep\tok\ts_hat\tm\tlambda\tkappa\tcensor_rate\ta_hat\ttheta\terror\n";
  for (const auto& r : rep.records) {
    out << r.rep << '\t' << (r.ok ? 1 : 0) << '\t' << r.s_hat << '\t' << r.m_used << '\t'
        << fmt(r.lambda_used) << '\t' << fmt(r.kappa_used) << '\t' << fmt(r.censor_rate) << '\t';
    for (std::size_t i = 0; i < r.a_hat.size(); ++i) out << (i ? ";" : "") << fmt(r.a_hat[i]);
    out << '\t';
    for (Eigen::Index i = 0; i < r.theta_star.size(); ++i)
      out << (i ? ";" : "") << fmt(r.theta_star[i]);
    out << '\t' << r.error << '\n';
  }
  return out.str();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Two-stage multi-threshold estimation for accelerated failure time models"};
  app.set_version_flag("--version", tsmcd::version);
  app.require_subcommand(1);

  common_flags f;
  std::string record_path;
  int reps = 200;
  int bootstrap_b = 0;
  std::string example = "ex2";

  CLI::App* fit = app.add_subcommand("fit", "fit a dataset and write a result record");
  add_data_flags(fit, f);
  add_tuning_flags(fit, f);
  fit->add_option("--bootstrap-b", bootstrap_b, "attach bootstrap SEs with this many resamples");
  fit->add_option("--out", f.out, "output path (default stdout)");

  CLI::App* simulate = app.add_subcommand("simulate", "run a benchmark example Monte Carlo");
  simulate->add_option("--example", example, "benchmark design")
      ->check(CLI::IsMember({"ex1", "ex2", "ex3"}))
      ->capture_default_str();
  simulate->add_option("--reps", reps, "replications")->capture_default_str();
  add_tuning_flags(simulate, f);
  simulate->add_option("--out", f.out, "output prefix; writes <out>.report.json and <out>.reps.tsv");

  CLI::App* boot = app.add_subcommand("bootstrap", "augment a fit record with bootstrap columns");
  add_data_flags(boot, f);
  boot->add_option("--record", record_path, "fit record to augment")->required();
  boot->add_option("--bootstrap-b", bootstrap_b, "resamples")->capture_default_str();
  boot->add_option("--threads", f.threads, "worker threads");
  boot->add_option("--seed", f.seed, "random seed");
  boot->add_option("--out", f.out, "output path (default stdout)");

  CLI::App* scan = app.add_subcommand("bic-scan", "emit the (kappa, lambda, BIC) surface");
  add_data_flags(scan, f);
  add_tuning_flags(scan, f);
  scan->add_option("--out", f.out, "output path (default stdout)");

  CLI::App* curves = app.add_subcommand("km-curves", "emit survival step data per fitted subgroup");
  add_data_flags(curves, f);
  curves->add_option("--record", record_path, "fit record defining the subgroups")->required();
  curves->add_option("--out", f.out, "output path (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (fit->parsed()) {
      const std::string bytes = read_file(f.data_path);
      const auto ds = tsmcd::ingest_csv(f.data_path, {f.z_column, f.intercept});
      const auto cfg = make_config(f);
      const auto result = tsmcd::tsmcd_fit(ds.data, cfg);
      auto rec = build_record(ds, result, cfg, tsmcd::fnv1a_digest(bytes));
      if (bootstrap_b > 0) attach_bootstrap(rec, ds.data, bootstrap_b, f.seed, f.threads);
      write_output(f.out, rec.serialize());
    } else if (simulate->parsed()) {
      const tsmcd::example_id id = example == "ex1"   ? tsmcd::example_id::ex1
                                   : example == "ex3" ? tsmcd::example_id::ex3
                                                      : tsmcd::example_id::ex2;
      const auto design = tsmcd::sim_design::example(id, f.seed);
      auto cfg = make_config(f);
      cfg.threads = f.threads;
      const auto report = tsmcd::run_monte_carlo(design, reps, cfg);
      const std::string report_json = report_to_json(report, design, f, reps);
      if (f.out.empty() || f.out == "-") {
        std::cout << report_json;
      } else {
        write_output(f.out + ".report.json", report_json);
        write_output(f.out + ".reps.tsv", records_to_tsv(report));
      }
    } else if (boot->parsed()) {
      const auto ds = tsmcd::ingest_csv(f.data_path, {f.z_column, f.intercept});
      auto rec = tsmcd::fit_record::parse(read_file(record_path));
      attach_bootstrap(rec, ds.data, bootstrap_b > 0 ? bootstrap_b : 200, f.seed, f.threads);
      write_output(f.out, rec.serialize());
    } else if (scan->parsed()) {
      const auto ds = tsmcd::ingest_csv(f.data_path, {f.z_column, f.intercept});
      const auto rows = tsmcd::bic_scan(ds.data, make_config(f));
      std::ostringstream out;
      out << "kappa\tm\tlambda\ts_hat\tbic\n";
      for (const auto& r : rows)
        out << fmt(r.kappa) << '\t' << r.m << '\t' << fmt(r.lambda) << '\t' << r.s_hat << '\t'
            << fmt(r.bic) << '\n';
      write_output(f.out, out.str());
    } else if (curves->parsed()) {
      const auto ds = tsmcd::ingest_csv(f.data_path, {f.z_column, f.intercept});
      const auto rec = tsmcd::fit_record::parse(read_file(record_path));
      const auto groups = tsmcd::threshold_groups(ds.data, rec.fit.a_hat);
      std::vector<int> assignment(static_cast<std::size_t>(ds.data.n()), 0);
      for (std::size_t g = 0; g < groups.size(); ++g)
        for (int i : groups[g]) assignment[static_cast<std::size_t>(i)] = static_cast<int>(g);
      const auto curves_out =
          tsmcd::km_curves(ds.data, assignment, static_cast<int>(groups.size()));
      std::ostringstream out;
      out << "group\ttime\tsurvival\tkind\n";
      for (const auto& c : curves_out) {
        if (c.empty) {
          std::cerr << "tsmcd: warning: subgroup " << c.group + 1 << " is empty, omitted\n";
          continue;
        }
        for (const auto& pt : c.steps)
          out << c.group + 1 << '\t' << fmt(pt.time) << '\t' << fmt(pt.survival) << "\tstep\n";
        for (const auto& pt : c.censor_ticks)
          out << c.group + 1 << '\t' << fmt(pt.time) << '\t' << fmt(pt.survival) << "\tcensor\n";
      }
      write_output(f.out, out.str());
    }
  } catch (const tsmcd::error& e) {
    std::cerr << "tsmcd: " << e.what() << "\n";
    if (e.code() == tsmcd::errc::data_format) return 2;
    if (e.code() == tsmcd::errc::infeasible_config) return 1;
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "tsmcd: " << e.what() << "\n";
    return 3;
  }
  return 0;
}
