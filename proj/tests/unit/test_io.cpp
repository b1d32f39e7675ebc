#include <catch2/catch_amalgamated.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "tsmcd/csv.hpp"
#include "tsmcd/fit_record.hpp"
#include "tsmcd/km_curve.hpp"
#include "tsmcd/simulate.hpp"

#include "oracles.hpp"
#include "test_data.hpp"

namespace {

tsmcd::ingested_dataset ingest_text(const std::string& text, const tsmcd::ingest_options& opt) {
  std::istringstream in(text);
  return tsmcd::ingest_csv_stream(in, opt, "test");
}

std::filesystem::path temp_dir() {
  const auto dir = std::filesystem::temp_directory_path() / "tsmcd_test_io";
  std::filesystem::create_directories(dir);
  return dir;
}

int run_cli(const std::string& args, const std::filesystem::path& out,
            const std::filesystem::path& err) {
  const std::string cmd = std::string(TSMCD_CLI_PATH) + " " + args + " > " + out.string() +
                          " 2> " + err.string();
  const int status = std::system(cmd.c_str());
  return WEXITSTATUS(status);
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("ingest reads a small well-formed file") {
  const auto ds = ingest_text(
      "y,delta,x1,x2\n"
      "1.5,1,0.3,2.0\n"
      "0.7,0,-0.1,1.0\n"
      "2.2,1,0.9,-1.5\n",
      {"x2", false});
  CHECK(ds.data.n() == 3);
  CHECK(ds.data.p() == 2);
  CHECK(ds.z_index == 1);
  CHECK(ds.data.z[0] == 2.0);
  CHECK(ds.covariate_names == std::vector<std::string>{"x1", "x2"});
}

TEST_CASE("ingest rejects bad delta values with the line number") {
  const std::string text =
      "y,delta,x1\n"
      "1.0,1,0.1\n"
      "1.1,0,0.2\n"
      "1.2,1,0.3\n"
      "1.3,2,0.4\n";
  try {
    ingest_text(text, {"x1", false});
    FAIL("expected data-format error");
  } catch (const tsmcd::error& e) {
    CHECK(e.code() == tsmcd::errc::data_format);
    CHECK(std::string(e.what()).find("line 5") != std::string::npos);
  }
}

TEST_CASE("ingest rejects missing regressors with the line number") {
  const std::string text =
      "y,delta,x1\n"
      "1.0,1,0.1\n"
      "1.1,1,\n";
  try {
    ingest_text(text, {"x1", false});
    FAIL("expected data-format error");
  } catch (const tsmcd::error& e) {
    CHECK(std::string(e.what()).find("line 3") != std::string::npos);
    CHECK(std::string(e.what()).find("x1") != std::string::npos);
  }
}

TEST_CASE("ingest structural failures") {
  CHECK_THROWS_AS(ingest_text("y,delta,x1\n1.0,0,0.1\n", {"x1", false}), tsmcd::error);  // all censored
  CHECK_THROWS_AS(ingest_text("y,x1\n1.0,0.1\n", {"x1", false}), tsmcd::error);          // no delta
  CHECK_THROWS_AS(ingest_text("y,delta,x1,x1\n1,1,2,3\n", {"x1", false}), tsmcd::error); // dup name
  CHECK_THROWS_AS(ingest_text("y,delta,x1\n1,1,2\n", {"zz", false}), tsmcd::error);      // bad z
  CHECK_THROWS_AS(ingest_text("y,delta,x1\n1,1\n", {"x1", false}), tsmcd::error);        // short row
}

TEST_CASE("ingest handles tabs, numeric z designation and the intercept flag") {
  const auto ds = ingest_text(
      "y\tdelta\tg1\tg2\n"
      "1.0\t1\t0.5\t0.25\n"
      "2.0\t0\t-0.5\t0.75\n",
      {"1", true});
  CHECK(ds.data.p() == 3);  // intercept prepended
  CHECK(ds.data.X(0, 0) == 1.0);
  CHECK(ds.z_index == 2);   // g2 shifted by the intercept
  CHECK(ds.data.z[1] == 0.75);
  CHECK(ds.covariate_names[0] == "intercept");
}

TEST_CASE("serialize then ingest reproduces the dataset exactly") {
  auto design = tsmcd::sim_design::example(tsmcd::example_id::ex2, 88);
  design.n = 40;
  const auto data = tsmcd::generate(design);
  tsmcd::ingested_dataset ds;
  ds.data = data;
  ds.covariate_names = {"intercept", "x2", "x3", "x4", "x5", "x6"};
  ds.z_index = 1;
  ds.implicit_intercept = true;

  std::ostringstream out;
  tsmcd::write_dataset_csv(out, ds);
  const auto back = ingest_text(out.str(), {"x2", true});
  CHECK(back.data.y == data.y);
  CHECK(back.data.delta == data.delta);
  CHECK(back.data.X == data.X);
  CHECK(back.data.z == data.z);
  CHECK(back.z_index == 1);
}

TEST_CASE("fit_record serialization round-trips byte for byte") {
  tsmcd::fit_record rec;
  rec.input_digest = tsmcd::fnv1a_digest("example");
  rec.covariate_names = {"intercept", "x2"};
  rec.z_index = 1;
  rec.kind = tsmcd::penalty_kind::scad;
  rec.gamma = 2.4;
  rec.fit.s_hat = 1;
  rec.fit.a_hat = {0.125};
  rec.fit.theta_star = Eigen::VectorXd::LinSpaced(4, -1.0, 0.3);
  rec.fit.theta_star[2] = 0.0;
  rec.fit.beta_by_group = tsmcd::subgroup_coefficients(rec.fit.theta_star, 2);
  rec.fit.bic = -12.75;
  rec.fit.m_used = 9;
  rec.fit.lambda_used = 0.0625;
  rec.fit.kappa_used = 0.9;

  const std::string once = rec.serialize();
  const auto parsed = tsmcd::fit_record::parse(once);
  const std::string twice = parsed.serialize();
  CHECK(once == twice);
  CHECK(parsed.fit.a_hat == rec.fit.a_hat);
  CHECK(parsed.fit.theta_star == rec.fit.theta_star);
  CHECK(parsed.kind == tsmcd::penalty_kind::scad);
}

TEST_CASE("km_curves drop by 1/n at each event time without censoring") {
  std::vector<double> y{0.1, 0.5, 0.9, 1.3};
  const auto data = testdata::from_vectors(y, {1, 1, 1, 1},
                                           {{1.0}, {1.0}, {1.0}, {1.0}}, {0, 0, 0, 0});
  const auto curves = tsmcd::km_curves(data, {0, 0, 0, 0}, 1);
  REQUIRE(curves.size() == 1);
  REQUIRE(curves[0].steps.size() == 4);
  for (int k = 0; k < 4; ++k) {
    CHECK(curves[0].steps[static_cast<std::size_t>(k)].time == y[static_cast<std::size_t>(k)]);
    CHECK(curves[0].steps[static_cast<std::size_t>(k)].survival ==
          Catch::Approx(1.0 - (k + 1) / 4.0).margin(1e-12));
  }
  CHECK(curves[0].censor_ticks.empty());
}

TEST_CASE("km_curves keep a flat curve with ticks for all-censored groups") {
  const auto data = testdata::from_vectors({0.2, 0.4, 1.0}, {0, 0, 1},
                                           {{1.0}, {1.0}, {1.0}}, {0, 0, 0});
  const auto curves = tsmcd::km_curves(data, {0, 0, 1}, 2);
  REQUIRE(curves.size() == 2);
  CHECK(curves[0].steps.empty());
  REQUIRE(curves[0].censor_ticks.size() == 2);
  CHECK(curves[0].censor_ticks[0].survival == 1.0);
  CHECK(curves[0].censor_ticks[1].survival == 1.0);
  CHECK_FALSE(curves[0].empty);
}

TEST_CASE("km_curves match the product-limit oracle") {
  std::mt19937 gen(55);
  std::uniform_real_distribution<double> yd(0.0, 3.0);
  std::bernoulli_distribution cens(0.3);
  const int n = 60;
  std::vector<double> y(n);
  std::vector<int> delta(n);
  std::vector<std::vector<double>> x(n, {1.0});
  std::vector<double> z(n, 0.0);
  for (int i = 0; i < n; ++i) {
    y[static_cast<std::size_t>(i)] = yd(gen);
    delta[static_cast<std::size_t>(i)] = cens(gen) ? 0 : 1;
  }
  delta[0] = 1;
  const auto data = testdata::from_vectors(y, delta, x, z);
  const auto curves = tsmcd::km_curves(data, std::vector<int>(n, 0), 1);

  const auto ord = oracle::order_by_y(y, delta);
  std::vector<int> dord(ord.size());
  for (std::size_t l = 0; l < ord.size(); ++l) dord[l] = delta[static_cast<std::size_t>(ord[l])];
  const auto pl = oracle::product_limit_ordered(dord);
  // oracle survival right after the last event at each distinct event time
  std::size_t step = 0;
  for (std::size_t l = 0; l < ord.size(); ++l) {
    if (dord[l] != 1) continue;
    const double t = y[static_cast<std::size_t>(ord[l])];
    const bool last_event_at_t = l + 1 >= ord.size() || dord[l + 1] != 1 ||
                                 y[static_cast<std::size_t>(ord[l + 1])] != t;
    if (!last_event_at_t) continue;
    REQUIRE(step < curves[0].steps.size());
    CHECK(curves[0].steps[step].time == t);
    CHECK(curves[0].steps[step].survival == Catch::Approx(pl.survival[l]).margin(1e-12));
    ++step;
  }
  CHECK(step == curves[0].steps.size());

  // empty group handling
  const auto two = tsmcd::km_curves(data, std::vector<int>(n, 0), 2);
  CHECK(two[1].empty);
}

TEST_CASE("cli fit, bic-scan, simulate, bootstrap and km-curves work end to end") {
  const auto dir = temp_dir();
  const auto csv = dir / "ex2.csv";
  {
    auto design = tsmcd::sim_design::example(tsmcd::example_id::ex2, 7);
    tsmcd::ingested_dataset ds;
    ds.data = tsmcd::generate(design);
    ds.covariate_names = {"intercept", "x2", "x3", "x4", "x5", "x6"};
    ds.z_index = 1;
    ds.implicit_intercept = true;
    std::ofstream out(csv);
    tsmcd::write_dataset_csv(out, ds);
  }
  const auto out = dir / "out.txt";
  const auto err = dir / "err.txt";

  // fit
  const auto record_path = dir / "fit.json";
  int rc = run_cli("fit --data " + csv.string() +
                       " --z x2 --intercept --kappa-grid 0.6:1.2:4 --out " + record_path.string(),
                   out, err);
  REQUIRE(rc == 0);
  const auto rec = tsmcd::fit_record::parse(slurp(record_path));
  CHECK(rec.fit.s_hat >= 0);
  CHECK(rec.covariate_names.size() == 6);

  // bic-scan row count: kappa grid 4 x lambda grid 25 + header
  rc = run_cli("bic-scan --data " + csv.string() +
                   " --z x2 --intercept --kappa-grid 0.6:1.2:4 --lambda-grid 25",
               out, err);
  REQUIRE(rc == 0);
  {
    std::istringstream lines(slurp(out));
    std::string line;
    int count = -1;  // header
    while (std::getline(lines, line))
      if (!line.empty()) ++count;
    CHECK(count == 4 * 25);
  }

  // simulate: deterministic under a fixed seed
  const std::string sim_args =
      " --example ex2 --reps 2 --seed 9 --kappa-grid 0.8:1.0:2 --lambda-grid 20";
  rc = run_cli("simulate" + sim_args, out, err);
  REQUIRE(rc == 0);
  const std::string first = slurp(out);
  rc = run_cli("simulate" + sim_args, out, err);
  REQUIRE(rc == 0);
  CHECK(first == slurp(out));
  CHECK(first.find("s_hat_frequency") != std::string::npos);

  // simulate with --out writes both report and raw records
  rc = run_cli("simulate" + sim_args + " --out " + (dir / "sim").string(), out, err);
  REQUIRE(rc == 0);
  CHECK(std::filesystem::exists(dir / "sim.report.json"));
  CHECK(std::filesystem::exists(dir / "sim.reps.tsv"));

  // bootstrap augments the record
  const auto boot_path = dir / "boot.json";
  rc = run_cli("bootstrap --data " + csv.string() + " --z x2 --intercept --record " +
                   record_path.string() + " --bootstrap-b 24 --seed 3 --out " + boot_path.string(),
               out, err);
  REQUIRE(rc == 0);
  const auto boot_rec = tsmcd::fit_record::parse(slurp(boot_path));
  CHECK(boot_rec.has_bootstrap);
  CHECK(boot_rec.theta_se.size() == boot_rec.fit.theta_star.size());

  // km-curves emits step data per subgroup
  rc = run_cli("km-curves --data " + csv.string() + " --z x2 --intercept --record " +
                   record_path.string(),
               out, err);
  REQUIRE(rc == 0);
  CHECK(slurp(out).find("step") != std::string::npos);
}

TEST_CASE("cli exit codes distinguish usage, data and numerical errors") {
  const auto dir = temp_dir();
  const auto out = dir / "o.txt";
  const auto err = dir / "e.txt";

  CHECK(run_cli("fit --data /nonexistent.csv --z x2", out, err) == 2);
  CHECK(run_cli("fit --no-such-flag", out, err) == 1);
  CHECK(run_cli("no-such-command", out, err) == 1);

  const auto bad = dir / "bad.csv";
  {
    std::ofstream f(bad);
    f << "y,delta,x1\n1.0,2,0.5\n";
  }
  CHECK(run_cli("fit --data " + bad.string() + " --z x1", out, err) == 2);

  // a single event cannot support any segmentation: config failure, not a crash
  const auto tiny = dir / "tiny.csv";
  {
    std::ofstream f(tiny);
    f << "y,delta,x1\n1.0,1,0.5\n2.0,0,-0.5\n1.5,0,0.25\n";
  }
  const int rc = run_cli("fit --data " + tiny.string() + " --z x1", out, err);
  CHECK(rc == 1);
  CHECK(!slurp(err).empty());
}
