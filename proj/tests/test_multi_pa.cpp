#include <cmath>

#include "common.hpp"
#include "pinch/channel.hpp"
#include "pinch/multi_pa.hpp"

using namespace pinch;

TEST_SUITE("multi_pa") {
  TEST_CASE("local feasible set keeps order and spacing") {
    auto cfg = test::config_with(3, 1);
    TransceiverLayout l{{1.0, 2.0, 3.0}, {5.0}};
    auto s = local_feasible_set(Side::tx, 1, l, cfg);
    REQUIRE_FALSE(s.empty());
    bool has_incumbent = false;
    for (double x : s) {
      CHECK(x >= 1.0 + cfg.min_spacing() - 1e-12);
      CHECK(x <= 3.0 - cfg.min_spacing() + 1e-12);
      has_incumbent = has_incumbent || x == 2.0;
    }
    CHECK(has_incumbent);
    auto end = local_feasible_set(Side::tx, 0, l, cfg);
    CHECK(end.front() == 0.0);
  }

  TEST_CASE("initial layouts are valid") {
    for (int n : {1, 2, 4, 8}) {
      auto cfg = test::config_with(n, n);
      test::require_valid(default_initial_layout(cfg), cfg);
    }
    SystemParams p;
    p.region_x = 0.02;
    p.n_tx = p.n_rx = 3;
    SystemConfig tight(p);
    test::require_valid(default_initial_layout(tight), tight);
    auto cfg = test::config_with(4, 4);
    auto s = spread_around(9.99, 4, cfg);
    CHECK(s.back() <= 10.0);
    CHECK(validate_waveguide(s, cfg));
  }

  TEST_CASE("sensing-centric AO: monotone, feasible, bounded cost") {
    auto cfg = test::config_with(2, 2);
    const int K = cfg.params().num_users, T = cfg.params().ghq_nodes, L = cfg.params().grid_points;
    for (int i = 0; i < 4; ++i) {
      auto s = test::draw(cfg, i);
      auto run = sensing_centric_with_recovery(s.users, s.prior, cfg);
      const auto& st = run.result.state;
      test::require_valid(st.layout, cfg);
      for (std::size_t k = 1; k < st.bcrb_trace.size(); ++k) CHECK(st.bcrb_trace[k] <= st.bcrb_trace[k - 1]);
      if (run.feasible)
        for (double v : st.min_snr_trace) CHECK(v >= cfg.min_snr_linear() * (1 - 1e-12));
      CHECK(st.iteration <= 50);
      const double per_update = static_cast<double>(st.snr_evaluations + st.fim_node_evaluations) /
                                std::max(st.element_updates, 1);
      CHECK(per_update <= 2.0 * (L + 1) * (K + T * T));
      CHECK(st.fim_node_evaluations >= st.candidates * static_cast<std::uint64_t>(T * T));
    }
  }

  TEST_CASE("infeasible start is reported") {
    SystemParams p;
    p.n_tx = p.n_rx = 1;
    p.min_snr_db = 80.0;
    SystemConfig cfg(p);
    auto s = test::draw(cfg, 0);
    CHECK_THROWS_AS(alg1_sensing_centric(default_initial_layout(cfg), s.users, s.prior, cfg), InfeasibleStart);
    auto run = sensing_centric_with_recovery(s.users, s.prior, cfg);
    CHECK_FALSE(run.feasible);
  }

  TEST_CASE("augmented Lagrangian traces") {
    auto cfg = test::config_with(2, 2);
    auto s = test::draw(cfg, 1);
    auto init = default_initial_layout(cfg);
    auto r = alg2_comm_centric(init, s.users, s.prior, cfg);
    test::require_valid(r.ao.state.layout, cfg);
    for (double l : r.al.lambda_trace) CHECK(l >= 0.0);
    for (std::size_t k = 1; k < r.al.rho_trace.size(); ++k) CHECK(r.al.rho_trace[k] >= r.al.rho_trace[k - 1]);
    if (r.al.converged) CHECK(r.al.violation <= 1e-3 * cfg.params().max_bcrb);
  }

  TEST_CASE("loose sensing constraint reduces to rate-only AO") {
    SystemParams p;
    p.n_tx = p.n_rx = 2;
    p.max_bcrb = 1e6;
    SystemConfig cfg(p);
    for (int i = 0; i < 3; ++i) {
      auto s = test::draw(cfg, i);
      auto init = default_initial_layout(cfg);
      auto a = alg2_comm_centric(init, s.users, s.prior, cfg);
      auto b = rate_only_ao(init, s.users, s.prior, cfg);
      CHECK(std::abs(a.ao.rate - b.rate) <= 1e-3);
      CHECK(a.ao.state.feasible);
    }
  }

  TEST_CASE("Pareto scan is non-dominated") {
    auto cfg = test::config_with(2, 2);
    auto s = test::draw(cfg, 2);
    std::vector<double> alphas{0.001, 0.25, 0.5, 0.75, 0.999};
    auto pts = alg3_pareto_scan(alphas, default_initial_layout(cfg), s.users, s.prior, cfg);
    REQUIRE(pts.size() == alphas.size());
    CHECK(dominated_points(pts).empty());
    for (const auto& pt : pts) {
      test::require_valid(pt.layout, cfg);
      CHECK(pt.rate == doctest::Approx(multicast_rate(s.users, pt.layout, cfg)));
      for (std::size_t k = 1; k < pt.utility_trace.size(); ++k) CHECK(pt.utility_trace[k] >= pt.utility_trace[k - 1]);
    }
  }

  TEST_CASE("dominated points are detected") {
    std::vector<ParetoPoint> pts(3);
    pts[0].bcrb = 0.1, pts[0].rate = 5.0;
    pts[1].bcrb = 0.2, pts[1].rate = 4.0;  // dominated by 0
    pts[2].bcrb = 0.1, pts[2].rate = 5.0;  // duplicate of 0
    auto d = dominated_points(pts);
    REQUIRE(d.size() == 1);
    CHECK(d[0] == 1);
  }
}
