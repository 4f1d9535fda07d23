#include <cmath>
#include <numbers>

#include "common.hpp"
#include "pinch/baselines.hpp"
#include "pinch/channel.hpp"
#include "pinch/multi_pa.hpp"
#include "pinch/oracles.hpp"

using namespace pinch;

TEST_SUITE("channel") {
  TEST_CASE("free-space gain magnitude and phase") {
    SystemConfig cfg;
    const auto g = freespace_gain({2.0, 3.0, 0.0}, 2.0, 3.0, cfg);  // straight below, r = h
    CHECK(std::abs(g) == doctest::Approx(cfg.sqrt_eta() / 5.0).epsilon(1e-14));
    const double ph = std::remainder(-cfg.k0() * 5.0, 2 * std::numbers::pi);
    CHECK(std::arg(g) == doctest::Approx(ph).epsilon(1e-9));
    CHECK_THROWS_AS(freespace_gain({2.0, 3.0, 5.0}, 2.0, 3.0, cfg), DegenerateGeometry);
  }

  TEST_CASE("in-waveguide coefficient") {
    SystemConfig cfg;
    const auto c = inwaveguide_coeff(0.0, 4, cfg);
    CHECK(c.real() == doctest::Approx(0.5));
    CHECK(c.imag() == doctest::Approx(0.0));
    // one guided wavelength brings the phase back
    const auto d = inwaveguide_coeff(cfg.guided_wavelength(), 1, cfg);
    CHECK(std::abs(d - cplx(1.0, 0.0)) < 1e-9);
  }

  TEST_CASE("single PA below a user: SNR = P eta / (sigma^2 h^2)") {
    SystemConfig cfg;
    const double expect = cfg.tx_power_w() * cfg.eta() / (cfg.noise_user_w() * 25.0);
    CHECK(user_snr({4.0, 3.0}, TransceiverLayout{{4.0}, {1.0}}, cfg) == doctest::Approx(expect).epsilon(1e-12));
  }

  TEST_CASE("effective channel is the sum of per-element terms") {
    SystemConfig cfg;
    TransceiverLayout l{{1.0, 2.0, 3.5}, {5.0}};
    auto ap = pass_aperture(l, Side::tx, cfg);
    auto ch = effective_channel({2.0, 1.0, 0.0}, ap, cfg);
    cplx s{};
    for (auto v : ch.per_element) s += v;
    CHECK(std::abs(s - ch.value) < 1e-15 * std::abs(s) + 1e-30);
  }

  TEST_CASE("pairwise sum agrees with a long-double loop") {
    std::vector<cplx> v;
    std::complex<long double> ref{};
    for (int i = 0; i < 1000; ++i) {
      v.emplace_back(std::sin(i * 0.37), std::cos(i * 1.1) * 1e-3);
      ref += std::complex<long double>(v.back().real(), v.back().imag());
    }
    auto s = pairwise_sum(v);
    CHECK(std::abs(s.real() - static_cast<double>(ref.real())) < 1e-12);
    CHECK(std::abs(s.imag() - static_cast<double>(ref.imag())) < 1e-12);
  }

  TEST_CASE("user SNR matches the direct oracle") {
    auto cfg = test::config_with(4, 4);
    for (int i = 0; i < 20; ++i) {
      auto s = test::draw(cfg, i);
      Rng rng = Rng::stream(99, i);
      auto l = random_layout(cfg, rng);
      for (auto& u : s.users.positions)
        CHECK(user_snr(u, l, cfg) == doctest::Approx(oracle::direct_user_snr(u, l, cfg)).epsilon(1e-10));
    }
  }

  TEST_CASE("multicast rate is set by the weakest user") {
    std::vector<double> snrs{10.0, 3.0, 7.0};
    CHECK(rate_from_snrs(snrs) == doctest::Approx(2.0));
    SystemConfig cfg;
    UserSet users{{{1.0, 0.0}, {9.0, 2.0}}};
    TransceiverLayout l{{1.0}, {1.0}};
    const double weakest = std::min(user_snr(users.positions[0], l, cfg), user_snr(users.positions[1], l, cfg));
    CHECK(multicast_rate(users, l, cfg) == doctest::Approx(std::log2(1.0 + weakest)));
    CHECK(min_user_snr(users, l, cfg) == doctest::Approx(weakest));
  }

  TEST_CASE("element-wise SNR reproduces the full evaluation") {
    auto cfg = test::config_with(4, 4);
    for (int i = 0; i < 10; ++i) {
      auto s = test::draw(cfg, i);
      auto l = default_initial_layout(cfg);
      for (int q = 0; q < 4; ++q) {
        ElementwiseSnr es(s.users, l, q, cfg);
        for (double x : {0.1, 3.3, 7.77}) {
          auto moved = l;
          moved.tx_x[q] = x;
          for (int k = 0; k < 4; ++k) {
            const double full = user_snr(s.users.positions[k], moved, cfg);
            CHECK(std::abs(es.snr(k, x) - full) <= 1e-10 * full);
            auto t = es.terms(k, x);
            CHECK(std::abs(t.constant + t.quadratic + t.linear - full / (cfg.tx_power_w() / cfg.noise_user_w())) <=
                  1e-6 * full / (cfg.tx_power_w() / cfg.noise_user_w()));
          }
        }
      }
    }
  }
}
