#include <cmath>

#include "common.hpp"
#include "pinch/oracles.hpp"

using namespace pinch;

TEST_SUITE("oracles") {
  TEST_CASE("Newton Gauss-Hermite integrates polynomials") {
    auto r = oracle::gauss_hermite(6);
    double m0 = 0.0, m6 = 0.0;
    for (int i = 0; i < 6; ++i) {
      m0 += r.w[i];
      m6 += r.w[i] * std::pow(r.x[i], 6);
    }
    CHECK(m0 == doctest::Approx(std::sqrt(M_PI)).epsilon(1e-13));
    CHECK(m6 == doctest::Approx(15.0 * std::sqrt(M_PI) / 8.0).epsilon(1e-12));
  }

  TEST_CASE("analytic gradient vs differences; second-order error") {
    auto cfg = test::config_with(2, 2);
    TransceiverLayout l{{1.0, 4.0}, {2.0, 7.0}};
    auto [gx, gy] = oracle::echo_gradient(3.0, 0.5, l, cfg);
    double prev = 0.0;
    for (double h : {1e-4, 1e-5}) {
      auto [fx, fy] = oracle::finite_diff_mean_jacobian(3.0, 0.5, l, cfg, h);
      const double e = std::abs(fx - gx) / std::abs(gx);
      if (prev > 0.0) CHECK(e < prev / 20.0);
      prev = e;
    }
    CHECK(prev < 1e-5);
  }

  TEST_CASE("point-mass prior gives the single-point Gramian") {
    auto cfg = test::config_with(1, 1);
    TransceiverLayout l{{2.0}, {6.0}};
    TargetPrior p{4.0, 1.0, 1e-14, 1e-14};
    Rng rng(1);
    auto mc = oracle::mc_ofim(l, p, 1000, rng, cfg);
    auto [fx, fy] = oracle::echo_gradient(4.0, 1.0, l, cfg);
    const double scale = 2.0 * cfg.tx_power_w() / cfg.noise_sense_w();
    CHECK(mc.mean.xx == doctest::Approx(scale * std::norm(fx)).epsilon(1e-6));
    CHECK(mc.mean.yy == doctest::Approx(scale * std::norm(fy)).epsilon(1e-6));
  }

  TEST_CASE("MC standard error shrinks like 1/sqrt(n)") {
    auto cfg = test::config_with(1, 1);
    TransceiverLayout l{{2.0}, {6.0}};
    TargetPrior p{4.0, 1.0, 0.3, 0.5};
    Rng a(2), b(3);
    auto m1 = oracle::mc_ofim(l, p, 20000, a, cfg);
    auto m2 = oracle::mc_ofim(l, p, 40000, b, cfg);
    CHECK(m1.stderr_.xx / m2.stderr_.xx == doctest::Approx(std::sqrt(2.0)).epsilon(0.1));
  }

  TEST_CASE("MC is reproducible for a fixed seed") {
    auto cfg = test::config_with(1, 1);
    TransceiverLayout l{{2.0}, {6.0}};
    TargetPrior p{4.0, 1.0, 0.3, 0.5};
    Rng a(9), b(9);
    auto x = oracle::mc_ofim(l, p, 5000, a, cfg), y = oracle::mc_ofim(l, p, 5000, b, cfg);
    CHECK(x.mean.xx == y.mean.xx);
    CHECK(x.mean.xy == y.mean.xy);
  }

  TEST_CASE("single-PA grid search") {
    auto cfg = test::config_with(1, 1);
    auto g = oracle::exhaustive_single_pa_cc({{{3.3, 0.0}}}, cfg, 101);
    CHECK(g.x == doctest::Approx(3.3));
    auto coarse = oracle::exhaustive_single_pa_cc({{{3.31, 0.2}, {7.0, -1.0}}}, cfg, 101);
    auto fine = oracle::exhaustive_single_pa_cc({{{3.31, 0.2}, {7.0, -1.0}}}, cfg, 1001);
    CHECK(fine.objective <= coarse.objective);
  }

  TEST_CASE("pair search on a symmetric scenario picks the same side") {
    auto cfg = test::config_with(1, 1);
    TargetPrior prior{5.0, 0.0, 0.2, 0.2};
    auto r = oracle::exhaustive_pair_search({}, prior, cfg, 41);
    const double step = 10.0 / 40;
    CHECK(std::abs(r.x_t - r.x_r) <= step + 1e-12);
    CHECK(r.table.size() == 41u * 41u);
  }

  TEST_CASE("report relative error") {
    auto rep = oracle::make_report({1.0, 2.0}, {1.1, 2.0}, 5);
    CHECK(rep.relative_error == doctest::Approx(0.1));
    CHECK(rep.samples_or_gridsize == 5);
  }
}
