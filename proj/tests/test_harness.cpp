#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "common.hpp"
#include "pinch/harness.hpp"

using namespace pinch;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

fs::path scratch(const std::string& name) {
  auto dir = fs::temp_directory_path() / "pinch_harness_tests";
  fs::create_directories(dir);
  return dir / name;
}

SystemConfig small() {
  SystemParams p;
  p.n_tx = p.n_rx = 2;
  p.grid_points = 100;
  p.ghq_nodes = 6;
  return SystemConfig(p);
}

}  // namespace

TEST_SUITE("harness") {
  TEST_CASE("mode names") {
    for (auto name : {"single-cc", "single-sc", "single-pareto", "multi-sc", "multi-cc", "multi-pareto", "baselines",
                      "verify"})
      CHECK(mode_name(parse_mode(name)) == name);
    CHECK_THROWS_AS(parse_mode("multi"), ParseError);
  }

  TEST_CASE("sweep parsing") {
    SweepSpec s;
    parse_sweep("region_x_m=4,6, 8", s);
    CHECK(s.sweep_var == "region_x_m");
    CHECK(s.sweep_values == std::vector<double>{4, 6, 8});
    CHECK_THROWS_AS(parse_sweep("region_x_m", s), ParseError);
    CHECK_THROWS_AS(parse_sweep("region_x_m=4,x", s), ParseError);
    CHECK_THROWS_AS(parse_sweep("region_x_m=inf", s), ValidationError);
  }

  TEST_CASE("invalid sweep values are rejected before running") {
    SweepSpec s;
    s.mode = Mode::baselines;
    parse_sweep("region_x_m=10,-1", s);
    CHECK_THROWS_AS(run_sweep(s, small()), ValidationError);
    s.sweep_var = "alpha";
    s.sweep_values = {0.5};
    CHECK_THROWS_AS(run_sweep(s, small()), ValidationError);
    s.sweep_var = "no_such_key";
    s.sweep_values = {1.0};
    CHECK_THROWS_AS(run_sweep(s, small()), ParseError);
  }

  TEST_CASE("one row per realization, sweep point and scheme; determinism") {
    SweepSpec s;
    s.mode = Mode::baselines;
    s.num_realizations = 2;
    parse_sweep("tx_power_dbm=10,20", s);
    s.output_path = scratch("det_a.csv");
    auto a = run_sweep(s, small());
    CHECK(a.rows.size() == 2u * 2u * 4u);
    CHECK(a.failed_rows == 0);
    s.output_path = scratch("det_b.csv");
    run_sweep(s, small());
    CHECK(slurp(scratch("det_a.csv")) == slurp(scratch("det_b.csv")));
    CHECK(fs::exists(scratch("det_a.csv.summary.csv")));

    const auto text = slurp(scratch("det_a.csv"));
    std::istringstream lines(text);
    std::string first, header;
    std::getline(lines, first);
    std::getline(lines, header);
    CHECK(first.find("config_hash 0x") != std::string::npos);
    std::string expect;
    for (const auto& c : csv_columns(false)) expect += (expect.empty() ? "" : ",") + c;
    CHECK(header == expect);
  }

  TEST_CASE("rows do not depend on the realization count") {
    auto cfg = small();
    auto one = run_realization(Mode::single_sc, cfg, 3, default_alphas());
    auto again = run_realization(Mode::single_sc, cfg, 3, default_alphas());
    REQUIRE(one.size() == again.size());
    for (std::size_t i = 0; i < one.size(); ++i) {
      one[i].wall_time_ms = again[i].wall_time_ms = 0.0;
      CHECK(same_row(one[i], again[i]));
    }
    CHECK(one.front().bcrb_model == "1d");
  }

  TEST_CASE("JSON round trip") {
    SweepSpec s;
    s.mode = Mode::single_cc;
    s.num_realizations = 3;
    s.format = Format::json;
    s.output_path = scratch("rt.json");
    auto cfg = small();
    auto out = run_sweep(s, cfg);
    auto back = load_results_json(s.output_path);
    CHECK(back.schema_version == kSchemaVersion);
    CHECK(back.config_hash == config_hash(cfg.params()));
    CHECK(format_config(back.params) == format_config(cfg.params()));
    REQUIRE(back.rows.size() == out.rows.size());
    for (std::size_t i = 0; i < out.rows.size(); ++i) CHECK(same_row(back.rows[i], out.rows[i]));
  }

  TEST_CASE("emit errors") {
    SweepSpec s;
    CHECK_THROWS_AS(emit_results({}, Format::csv, scratch("empty.csv"), small(), s), ValidationError);
    std::vector<ResultRow> rows(1);
    CHECK_THROWS_AS(emit_results(rows, Format::csv, "/nonexistent/dir/x.csv", small(), s), IoError);
  }

  TEST_CASE("verify rows") {
    auto rows = run_realization(Mode::verify, small(), 0, {});
    REQUIRE(rows.size() == 5);
    for (const auto& r : rows) {
      CHECK(r.error.empty());
      CHECK(std::isfinite(r.oracle_rel_error));
    }
    CHECK(rows[0].feasible);  // Jacobian
    CHECK(rows[1].feasible);  // SNR
    CHECK(rows[2].feasible);  // quadrature
    CHECK(rows[4].feasible);  // C-C grid
  }

  TEST_CASE("single-PA C-C mean rate falls with the waveguide length") {
    SweepSpec s;
    s.mode = Mode::single_cc;
    s.num_realizations = 50;
    parse_sweep("region_x_m=4,6,8,10,12,14", s);
    auto out = run_sweep(s, SystemConfig{});
    std::vector<double> mean(6, 0.0);
    for (const auto& r : out.rows)
      if (r.scheme == "pass-cc") mean[static_cast<int>(r.sweep_value - 4) / 2] += r.rate / 50.0;
    for (int i = 1; i < 6; ++i) CHECK(mean[i] <= mean[i - 1]);
  }

  TEST_CASE("CLI exit codes") {
    const auto cfg_path = scratch("cli.cfg");
    {
      std::ofstream f(cfg_path);
      f << format_config(small().params());
    }
    const auto out = scratch("cli.csv").string();
    auto run = [](std::vector<std::string> args) {
      std::vector<char*> argv;
      for (auto& a : args) argv.push_back(a.data());
      return run_cli(static_cast<int>(argv.size()), argv.data());
    };
    CHECK(run({"pinch-isac", "single-cc", "--config", cfg_path.string(), "--realizations", "2", "--out", out}) == 0);
    CHECK(run({"pinch-isac", "nonsense", "--config", cfg_path.string(), "--out", out}) == 1);
    CHECK(run({"pinch-isac", "baselines", "--config", "/nonexistent.cfg", "--out", out}) == 1);
    CHECK(run({"pinch-isac", "baselines", "--config", cfg_path.string(), "--sweep", "n_tx=0", "--out", out}) == 1);
    // an unreachable SNR floor makes the run infeasible, not an error
    CHECK(run({"pinch-isac", "multi-sc", "--config", cfg_path.string(), "--realizations", "1", "--sweep",
               "min_snr_db=200", "--out", out}) == 0);
  }
}
