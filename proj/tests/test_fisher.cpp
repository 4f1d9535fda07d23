#include <cmath>
#include <numbers>

#include "common.hpp"
#include "pinch/baselines.hpp"
#include "pinch/fisher.hpp"
#include "pinch/multi_pa.hpp"
#include "pinch/oracles.hpp"

using namespace pinch;

namespace {

double rel(double a, double b, double scale) { return std::abs(a - b) / scale; }

}  // namespace

TEST_SUITE("fisher") {
  TEST_CASE("Gauss-Hermite rule") {
    for (int T : {1, 2, 5, 10, 20, 64}) {
      auto r = ghq_rule(T);
      REQUIRE(r.size() == static_cast<std::size_t>(T));
      double w = 0.0, m2 = 0.0, m4 = 0.0;
      for (int i = 0; i < T; ++i) {
        w += r.weights[i];
        m2 += r.weights[i] * r.nodes[i] * r.nodes[i];
        m4 += r.weights[i] * std::pow(r.nodes[i], 4);
        CHECK(r.nodes[i] == doctest::Approx(-r.nodes[T - 1 - i]).epsilon(1e-12));
      }
      CHECK(w == doctest::Approx(std::sqrt(std::numbers::pi)).epsilon(1e-13));
      if (T >= 2) CHECK(m2 == doctest::Approx(std::sqrt(std::numbers::pi) / 2).epsilon(1e-12));
      if (T >= 3) CHECK(m4 == doctest::Approx(3 * std::sqrt(std::numbers::pi) / 4).epsilon(1e-12));
    }
    CHECK_THROWS_AS(ghq_rule(0), UnsupportedOrder);
    CHECK_THROWS_AS(ghq_rule(65), UnsupportedOrder);
  }

  TEST_CASE("rule matches the independent Newton construction") {
    for (int T : {3, 10, 17}) {
      auto a = ghq_rule(T);
      auto b = oracle::gauss_hermite(T);
      for (int i = 0; i < T; ++i) {
        CHECK(std::abs(a.nodes[i] - b.x[i]) < 1e-12);
        CHECK(std::abs(a.weights[i] - b.w[i]) < 1e-12 * std::max(1.0, b.w[i]));
      }
    }
  }

  TEST_CASE("prior FIM and the bound") {
    CHECK_THROWS_AS(pfim({0, 0, 0.0, 1.0}), DegeneratePrior);
    auto p = pfim({0, 0, 0.5, 2.0});
    CHECK(p.xx == 2.0);
    CHECK(p.yy == 0.5);
    CHECK(p.xy == 0.0);
    // zero observation: bound equals the prior variances
    auto b = assemble_bfim({}, {0, 0, 0.5, 2.0});
    CHECK(b.bcrb == doctest::Approx(2.5));
    // a huge rank-one observation makes the 2x2 nearly singular relative to itself but the prior keeps it invertible
    auto c = assemble_bfim({1e6, 1e6, 1e6}, {0, 0, 1.0, 1.0});
    CHECK(std::isfinite(c.bcrb));
    CHECK(std::isinf(bcrb_value({-1.0, 0.0, -1.0}, {0, 0, 1.0, 1.0})));
    CHECK_THROWS_AS(assemble_bfim({-1.0, 0.0, -1.0}, {0, 0, 1.0, 1.0}), IllConditioned);
  }

  TEST_CASE("Jacobian matches finite differences of the echo") {
    auto cfg = test::config_with(4, 4);
    for (int i = 0; i < 20; ++i) {
      auto s = test::draw(cfg, i);
      Rng rng = Rng::stream(5, i);
      auto l = random_layout(cfg, rng);
      Point2 t{s.prior.mean_x, s.prior.mean_y};
      auto f = mean_jacobian(t, pass_aperture(l, Side::tx, cfg), pass_aperture(l, Side::rx, cfg), cfg);
      auto [fx, fy] = oracle::finite_diff_mean_jacobian(t.x, t.y, l, cfg, 1e-7);
      const double scale = std::max(std::abs(fx), std::abs(fy));
      CHECK(std::abs(f.fx - fx) / scale < 1e-5);
      CHECK(std::abs(f.fy - fy) / scale < 1e-5);
      CHECK(std::abs(jacobian_entry(Axis::x, t, l, cfg) - f.fx) <= 1e-12 * scale);
      CHECK(std::abs(f.mu - oracle::echo_mean(t.x, t.y, l, cfg)) <= 1e-10 * std::abs(f.mu));
    }
  }

  TEST_CASE("OFIM matches the oracle quadrature and the serial path") {
    auto cfg = test::config_with(4, 4);
    auto rule = ghq_rule(10);
    for (int i = 0; i < 5; ++i) {
      auto s = test::draw(cfg, i);
      auto l = default_initial_layout(cfg);
      auto f = ofim(l, s.prior, rule, cfg);
      auto o = oracle::ghq_ofim(l, s.prior, 10, cfg);
      const double tr = o.xx + o.yy;
      CHECK(rel(f.xx, o.xx, tr) < 1e-10);
      CHECK(rel(f.xy, o.xy, tr) < 1e-10);
      CHECK(rel(f.yy, o.yy, tr) < 1e-10);
      auto tx = pass_aperture(l, Side::tx, cfg), rx = pass_aperture(l, Side::rx, cfg);
      auto g = ofim_serial(tx, rx, s.prior, rule, cfg);
      CHECK(g.xx == f.xx);
      CHECK(g.xy == f.xy);
      CHECK(g.yy == f.yy);
      CHECK(bcrb(l, s.prior, rule, cfg).bcrb == doctest::Approx(oracle::bcrb_of(o, s.prior)).epsilon(1e-9));
    }
  }

  TEST_CASE("element-wise OFIM reproduces the full evaluation") {
    auto cfg = test::config_with(3, 2);
    auto rule = ghq_rule(10);
    auto s = test::draw(cfg, 3);
    auto l = default_initial_layout(cfg);
    for (Side p : {Side::tx, Side::rx}) {
      const int n = p == Side::tx ? 3 : 2;
      for (int q = 0; q < n; ++q) {
        ElementwiseFim ef(p, q, l, s.prior, rule, cfg);
        std::vector<double> xs{0.0, 2.5, 6.1, 10.0};
        auto many = ef.evaluate_many(xs);
        auto serial = ef.evaluate_many_serial(xs);
        for (std::size_t i = 0; i < xs.size(); ++i) {
          auto moved = l;
          positions(moved, p)[q] = xs[i];
          auto full = ofim(moved, s.prior, rule, cfg);
          const double tr = full.trace();
          auto e = ef.evaluate(xs[i]);
          CHECK(rel(e.xx, full.xx, tr) < 1e-10);
          CHECK(rel(e.xy, full.xy, tr) < 1e-10);
          CHECK(rel(e.yy, full.yy, tr) < 1e-10);
          CHECK(many[i].xx == serial[i].xx);
          CHECK(many[i].xy == serial[i].xy);
          auto parts = ef.parts(xs[i]);
          auto sum = parts.phi + parts.lambda + parts.omega;
          CHECK(rel(sum.xx, e.xx, tr) < 1e-10);
        }
      }
    }
  }

  TEST_CASE("stale element-wise cache is rejected") {
    auto cfg = test::config_with(2, 2);
    auto rule = ghq_rule(4);
    auto s = test::draw(cfg, 0);
    auto l = default_initial_layout(cfg);
    ElementwiseFim ef(Side::tx, 0, l, s.prior, rule, cfg);
    auto moved_self = l;
    moved_self.tx_x[0] = 0.3;
    CHECK_NOTHROW(ef.evaluate(moved_self, 0.3));
    auto moved_other = l;
    moved_other.rx_x[1] += 0.5;
    CHECK_THROWS_AS(ef.evaluate(moved_other, 0.3), StaleCache);
    CHECK(complement_fingerprint(Side::tx, 0, moved_self, s.prior, rule, cfg) == ef.fingerprint());
    CHECK(complement_fingerprint(Side::tx, 0, moved_other, s.prior, rule, cfg) != ef.fingerprint());
  }

  TEST_CASE("same-side single PA carries no y information at the symmetric point") {
    auto cfg = test::config_with(1, 1);
    TargetPrior prior{5.0, 0.0, 1e-8, 1e-8};
    auto f = ofim({{4.0}, {4.0}}, prior, ghq_rule(1), cfg);
    // target straight between the two PAs: d(R_t + R_r)/du^y = 0
    REQUIRE(f.xx > 0.0);
    CHECK(std::abs(f.yy) <= 1e-10 * f.xx);
  }
}
