#include "pinch/baselines.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace pinch {

namespace {

using Channels = std::vector<std::vector<cplx>>;  // [user][element]

Channels user_channels(const UserSet& users, const std::vector<double>& xs, const SystemConfig& cfg) {
  Channels h;
  for (const auto& u : users.positions) {
    std::vector<cplx> row;
    for (double x : xs) row.push_back(freespace_gain({u.x, u.y, 0.0}, x, cfg.params().y_tx, cfg));
    h.push_back(std::move(row));
  }
  return h;
}

double min_snr(const Channels& h, const std::vector<cplx>& w, const SystemConfig& cfg) {
  double m = std::numeric_limits<double>::infinity();
  for (const auto& row : h) {
    cplx g{};
    for (std::size_t n = 0; n < w.size(); ++n) g += row[n] * w[n];
    m = std::min(m, cfg.tx_power_w() * std::norm(g) / cfg.noise_user_w());
  }
  return m;
}

void normalize(std::vector<cplx>& w) {
  double s = 0.0;
  for (const auto& v : w) s += std::norm(v);
  s = std::sqrt(s);
  for (auto& v : w) v /= s;
}

std::vector<cplx> dominant_eigenvector(const Channels& h) {
  const int n = static_cast<int>(h.front().size());
  Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(n, n);
  for (const auto& row : h)
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b) m(a, b) += std::conj(row[a]) * row[b];
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(m);
  Eigen::VectorXcd v = es.eigenvectors().col(n - 1);
  std::vector<cplx> w(v.data(), v.data() + n);
  normalize(w);
  return w;
}

std::vector<cplx> mrt(const std::vector<cplx>& row) {
  std::vector<cplx> w;
  for (const auto& v : row) w.push_back(std::conj(v));
  normalize(w);
  return w;
}

std::vector<cplx> phases_only(const std::vector<cplx>& w) {
  const double a = 1.0 / std::sqrt(static_cast<double>(w.size()));
  std::vector<cplx> out;
  for (const auto& v : w) out.push_back(std::polar(a, std::arg(v)));
  return out;
}

// Gains from the prior-mean target to each element of one line.
std::vector<cplx> steering(const TargetPrior& prior, const std::vector<double>& xs, double wy,
                           const SystemConfig& cfg) {
  std::vector<cplx> a;
  for (double x : xs) a.push_back(freespace_gain({prior.mean_x, prior.mean_y, 0.0}, x, wy, cfg));
  return a;
}

double sensing_bcrb(const std::vector<double>& xs, const std::vector<cplx>& wt, const std::vector<cplx>& wr,
                    const TargetPrior& prior, const SystemConfig& cfg) {
  Aperture tx{cfg.params().y_tx, xs, wt};
  Aperture rx{cfg.params().y_rx, xs, wr};
  return bcrb(tx, rx, prior, ghq_rule(cfg.params().ghq_nodes), cfg).bcrb;
}

double rate_of(double snr) { return std::log2(1.0 + snr); }

}  // namespace

std::vector<double> random_positions(int n, const SystemConfig& cfg, Rng& rng) {
  const double span = (n - 1) * cfg.min_spacing();
  const double room = cfg.params().region_x - span;
  if (room < -kSpacingTolerance) throw DoesNotFit("elements do not fit on the waveguide");
  std::vector<double> u(n);
  for (auto& v : u) v = rng.uniform(0.0, std::max(room, 0.0));
  std::sort(u.begin(), u.end());
  for (int i = 0; i < n; ++i) u[i] = std::min(u[i] + i * cfg.min_spacing(), cfg.params().region_x);
  return u;
}

TransceiverLayout random_layout(const SystemConfig& cfg, Rng& rng) {
  TransceiverLayout l;
  l.tx_x = random_positions(cfg.params().n_tx, cfg, rng);
  l.rx_x = random_positions(cfg.params().n_rx, cfg, rng);
  return l;
}

std::vector<double> centered_positions(int n, const SystemConfig& cfg) {
  const double span = (n - 1) * cfg.min_spacing();
  if (span > cfg.params().region_x + kSpacingTolerance) throw DoesNotFit("elements do not fit on the waveguide");
  std::vector<double> xs(n);
  const double start = cfg.params().region_x / 2.0 - span / 2.0;
  for (int i = 0; i < n; ++i) xs[i] = start + i * cfg.min_spacing();
  return xs;
}

TransceiverLayout centered_layout(const SystemConfig& cfg) {
  return {centered_positions(cfg.params().n_tx, cfg), centered_positions(cfg.params().n_rx, cfg)};
}

std::vector<double> ula_positions(const UlaConfig& ula, const SystemConfig& cfg) {
  const double d = ula.spacing > 0.0 ? ula.spacing : cfg.min_spacing();
  std::vector<double> xs(ula.n_elements);
  for (int i = 0; i < ula.n_elements; ++i) xs[i] = ula.origin_x + i * d;
  return xs;
}

UlaResult ula_analog_bf(const UserSet& users, const TargetPrior& prior, const SystemConfig& cfg,
                        const UlaConfig& ula) {
  const auto xs = ula_positions(ula, cfg);
  const auto h = user_channels(users, xs, cfg);
  const int n = ula.n_elements;
  const double amp = 1.0 / std::sqrt(static_cast<double>(n));

  UlaResult r;
  auto w = phases_only(users.size() == 1 ? mrt(h.front()) : dominant_eigenvector(h));
  double cur = min_snr(h, w, cfg);
  r.ascent_trace.push_back(cur);
  constexpr int kPhases = 64, kRounds = 50;
  for (int round = 0; round < kRounds; ++round) {
    bool improved = false;
    for (int e = 0; e < n; ++e) {
      const cplx keep = w[e];
      cplx best = keep;
      double best_v = cur;
      for (int k = 0; k < kPhases; ++k) {
        w[e] = std::polar(amp, 2.0 * std::numbers::pi * k / kPhases);
        const double v = min_snr(h, w, cfg);
        if (v > best_v * (1.0 + 1e-12)) best_v = v, best = w[e];
      }
      w[e] = best;
      if (best != keep) {
        cur = best_v;
        r.ascent_trace.push_back(cur);
        improved = true;
      }
    }
    if (!improved) break;
  }
  r.comm_weights = w;
  r.rate = rate_of(cur);

  r.sense_tx_weights = phases_only(mrt(steering(prior, xs, cfg.params().y_tx, cfg)));
  r.sense_rx_weights = phases_only(mrt(steering(prior, xs, cfg.params().y_rx, cfg)));
  r.bcrb = sensing_bcrb(xs, r.sense_tx_weights, r.sense_rx_weights, prior, cfg);
  return r;
}

UlaResult ula_digital_bf(const UserSet& users, const TargetPrior& prior, const SystemConfig& cfg,
                         const UlaConfig& ula) {
  const auto xs = ula_positions(ula, cfg);
  const auto h = user_channels(users, xs, cfg);
  const int n = ula.n_elements;

  std::vector<std::vector<cplx>> starts = {dominant_eigenvector(h)};
  for (const auto& row : h) starts.push_back(mrt(row));
  starts.push_back(ula_analog_bf(users, prior, cfg, ula).comm_weights);

  UlaResult r;
  std::vector<cplx> w = starts.front();
  double cur = min_snr(h, w, cfg);
  for (const auto& s : starts) {
    const double v = min_snr(h, s, cfg);
    if (v > cur) cur = v, w = s;
  }
  r.ascent_trace.push_back(cur);

  // Coordinate ascent with a shrinking complex step per element.
  constexpr int kDirs = 8, kMaxRounds = 200;
  double step = 0.25 / std::sqrt(static_cast<double>(n));
  for (int round = 0; round < kMaxRounds && step > 1e-5; ++round) {
    bool improved = false;
    for (int e = 0; e < n; ++e) {
      for (int k = 0; k < kDirs; ++k) {
        auto t = w;
        t[e] += std::polar(step, 2.0 * std::numbers::pi * k / kDirs);
        normalize(t);
        const double v = min_snr(h, t, cfg);
        if (v > cur * (1.0 + 1e-12)) {
          cur = v;
          w = std::move(t);
          r.ascent_trace.push_back(cur);
          improved = true;
        }
      }
    }
    if (!improved) step /= 2.0;
  }
  r.comm_weights = w;
  r.rate = rate_of(cur);

  r.sense_tx_weights = mrt(steering(prior, xs, cfg.params().y_tx, cfg));
  r.sense_rx_weights = mrt(steering(prior, xs, cfg.params().y_rx, cfg));
  r.bcrb = sensing_bcrb(xs, r.sense_tx_weights, r.sense_rx_weights, prior, cfg);
  return r;
}

}  // namespace pinch
