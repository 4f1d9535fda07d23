#include <algorithm>
#include <cmath>

#include "common.hpp"
#include "pinch/oracles.hpp"
#include "pinch/single_pa.hpp"

using namespace pinch;

namespace {

SystemConfig one_pa() { return test::config_with(1, 1); }

}  // namespace

TEST_SUITE("single_pa") {
  TEST_CASE("candidate set") {
    auto cfg = one_pa();
    auto c = cc_candidate_set({{{3.0, 1.0}}}, cfg);
    CHECK(c == std::vector<double>{0.0, 3.0, 10.0});

    auto sym = cc_candidate_set({{{2.0, 1.0}, {8.0, 1.0}}}, cfg);
    CHECK(std::find(sym.begin(), sym.end(), 5.0) != sym.end());

    auto same_x = cc_candidate_set({{{4.0, 1.0}, {4.0, -2.0}}}, cfg);
    CHECK(same_x == std::vector<double>{0.0, 4.0, 10.0});

    CHECK(std::is_sorted(sym.begin(), sym.end()));
    CHECK(sym.size() <= 2 + 2 + 1);
  }

  TEST_CASE("C-C optimum: simple cases") {
    auto cfg = one_pa();
    CHECK(cc_optimal_tx({{{3.0, 0.5}}}, cfg).x_t == 3.0);
    auto r = cc_optimal_tx({{{2.0, 1.0}, {8.0, 1.0}}}, cfg);
    CHECK(r.x_t == doctest::Approx(5.0));
    CHECK(r.rate > 0.0);
  }

  TEST_CASE("C-C optimum never loses to a fine grid") {
    auto cfg = one_pa();
    const int n = 1000;
    const double h = 10.0 / (n - 1);
    for (int i = 0; i < 50; ++i) {
      auto s = test::draw(cfg, i);
      auto fast = cc_optimal_tx(s.users, cfg);
      auto grid = oracle::exhaustive_single_pa_cc(s.users, cfg, n);
      CHECK(fast.objective <= grid.objective * (1.0 + 1e-12));
      CHECK(grid.objective - fast.objective <= 2 * 10.0 * h + h * h);
    }
  }

  TEST_CASE("conditional Fisher: zeros and the 2D specialization") {
    auto cfg = one_pa();
    CHECK(conditional_fisher_1d(5.0, 5.0, 5.0, cfg) == doctest::Approx(0.0));
    for (int i = 0; i < 50; ++i) {
      Rng rng = Rng::stream(11, i);
      const double c = rng.uniform(2.0, 8.0), d = rng.uniform(0.1, 2.0);
      const double same = conditional_fisher_1d(c, c - d, c - d, cfg);
      const double opposite = conditional_fisher_1d(c, c - d, c + d, cfg);
      CHECK(same > 0.0);
      CHECK(std::abs(opposite) <= 1e-10 * same);
    }
    const double uy = 0.5 * (cfg.params().y_tx + cfg.params().y_rx);
    TargetPrior point{4.0, uy, 1e-12, 1e-12};
    auto f = ofim({{2.5}, {2.5}}, point, ghq_rule(1), cfg);
    CHECK(conditional_fisher_1d(4.0, 2.5, 2.5, cfg) == doctest::Approx(f.xx).epsilon(1e-8));
  }

  TEST_CASE("closed-form displacement") {
    auto cfg = one_pa();
    CHECK(sensing_offset(cfg) == doctest::Approx(std::sqrt(34.0)));
    auto d = sc_displacement(cfg);
    CHECK(displacement_residual(d.exact, cfg) < 1e-6);
    CHECK(std::abs(d.exact - d.approx) < 1e-6 * d.exact);
    CHECK(d.exact == doctest::Approx(4.1231).epsilon(1e-4));
  }

  TEST_CASE("S-C layout and clamping") {
    auto cfg = one_pa();
    auto l = sc_optimal_layout({5.0, 0.0, 0.5, 1.0}, cfg);
    CHECK(l.tx_x[0] == doctest::Approx(0.8769).epsilon(1e-4));
    CHECK(l.tx_x == l.rx_x);
    test::require_valid(l, cfg);
    auto clamped = sc_optimal_layout({2.0, 0.0, 0.5, 1.0}, cfg);
    CHECK(clamped.tx_x[0] == 0.0);
    test::require_valid(clamped, cfg);
  }

  TEST_CASE("mirror best response") {
    auto cfg = one_pa();
    TargetPrior p{5.0, 0.0, 0.5, 1.0};
    CHECK(rx_best_response(2.0, p, cfg) == 8.0);
    CHECK(rx_best_response(5.0, p, cfg) == 5.0);
    CHECK(rx_best_response(1.0, {7.0, 0.0, 0.5, 1.0}, cfg) == 10.0);
  }

  TEST_CASE("rate profile utility") {
    CHECK(rate_profile_utility(2.0, 4.0, 0.5) == doctest::Approx(4.0).epsilon(1e-5));
    CHECK(rate_profile_utility(2.0, 4.0, 1.0) == doctest::Approx(2.0).epsilon(1e-5));
    CHECK(rate_profile_sum(2.0, 4.0, 0.5) > rate_profile_utility(2.0, 4.0, 0.5));
  }

  TEST_CASE("Pareto endpoints and non-domination") {
    auto cfg = one_pa();
    auto rule = ghq_rule(cfg.params().ghq_nodes);
    std::vector<double> alphas{1.0};
    for (int i = 0; i <= 20; ++i) alphas.push_back(i / 20.0);
    for (int seed = 0; seed < 5; ++seed) {
      auto s = test::draw(cfg, seed);
      auto pts = pareto_single_sweep(alphas, s.users, s.prior, cfg);
      // alpha = 1: the grid projection of the C-C optimum
      const auto grid = placement_grid(10.0, cfg.params().grid_points);
      double best = 1e300;
      for (double x : grid) best = std::min(best, cc_objective(s.users, x, cfg));
      CHECK(cc_objective(s.users, pts[0].x_t, cfg) == doctest::Approx(best).epsilon(1e-12));
      // alpha = 0: no worse than the closed form up to one grid step
      auto sc = sc_optimal_layout(s.prior, cfg);
      const double step = 10.0 / (cfg.params().grid_points - 1);
      const double g = std::round(sc.tx_x[0] / step) * step;
      const double sc_bcrb = bcrb_1d(sc.tx_x[0], sc.rx_x[0], s.prior, rule, cfg);
      CHECK(pts[1].bcrb <= std::max(sc_bcrb, bcrb_1d(g, g, s.prior, rule, cfg)) * (1.0 + 1e-9));
      for (std::size_t a = 1; a < pts.size(); ++a)
        for (std::size_t b = 1; b < pts.size(); ++b) {
          const bool dup = pts[a].bcrb == pts[b].bcrb && pts[a].rate == pts[b].rate;
          const bool dominates = pts[b].bcrb <= pts[a].bcrb && pts[b].rate >= pts[a].rate &&
                                 (pts[b].bcrb < pts[a].bcrb || pts[b].rate > pts[a].rate);
          CHECK_FALSE((!dup && dominates));
        }
    }
  }

  TEST_CASE("path-loss factor peaks at zero asymmetry") {
    auto cfg = one_pa();
    const double ds = sensing_offset(cfg);
    for (double m : {0.0, 1.0, 3.0, 0.9 * ds}) {
      const double at0 = path_loss_factor(m, 0.0, cfg);
      for (int i = 1; i <= 200; ++i) {
        const double eps = 0.01 * i;
        CHECK(path_loss_factor(m, eps, cfg) < at0);
        CHECK(path_loss_factor(m, -eps, cfg) < at0);
      }
    }
  }
}
