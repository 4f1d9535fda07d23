#include "pinch/channel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace pinch {

namespace {

constexpr double kMinDistance = 1e-9;

double distance(const Point3& p, double pa_x, double wy, double h) {
  const double dx = p.x - pa_x, dy = p.y - wy, dz = p.z - h;
  return std::sqrt(dx * dx + dy * dy + dz * dz);
}

cplx pairwise_rec(const cplx* v, std::size_t n) {
  if (n <= 64) {
    cplx s{};
    for (std::size_t i = 0; i < n; ++i) s += v[i];
    return s;
  }
  const std::size_t h = n / 2;
  return pairwise_rec(v, h) + pairwise_rec(v + h, n - h);
}

}  // namespace

Aperture pass_aperture(const TransceiverLayout& layout, Side side, const SystemConfig& cfg) {
  const auto& xs = positions(layout, side);
  Aperture ap;
  ap.y = waveguide_y(cfg, side);
  ap.x = xs;
  ap.w.reserve(xs.size());
  for (double x : xs) ap.w.push_back(inwaveguide_coeff(x, static_cast<int>(xs.size()), cfg));
  return ap;
}

cplx freespace_gain(const Point3& point, double pa_x, double waveguide_y, const SystemConfig& cfg) {
  const double r = distance(point, pa_x, waveguide_y, cfg.params().height);
  if (r < kMinDistance) throw DegenerateGeometry("point coincides with a PA");
  return cfg.sqrt_eta() * std::polar(1.0 / r, -cfg.k0() * r);
}

cplx inwaveguide_coeff(double pa_x, int n_total, const SystemConfig& cfg) {
  return std::polar(1.0 / std::sqrt(static_cast<double>(n_total)), -cfg.kg() * pa_x);
}

cplx pairwise_sum(std::span<const cplx> v) { return pairwise_rec(v.data(), v.size()); }

EffectiveChannel effective_channel(const Point3& point, const Aperture& ap, const SystemConfig& cfg) {
  EffectiveChannel ch;
  ch.per_element.reserve(ap.size());
  for (std::size_t n = 0; n < ap.size(); ++n)
    ch.per_element.push_back(freespace_gain(point, ap.x[n], ap.y, cfg) * ap.w[n]);
  ch.value = pairwise_sum(ch.per_element);
  return ch;
}

cplx effective_gain(const Point3& point, const Aperture& ap, const SystemConfig& cfg) {
  if (ap.size() > 64) return effective_channel(point, ap, cfg).value;
  cplx s{};
  for (std::size_t n = 0; n < ap.size(); ++n) s += freespace_gain(point, ap.x[n], ap.y, cfg) * ap.w[n];
  return s;
}

double user_snr(const Point2& user, const Aperture& tx, const SystemConfig& cfg) {
  const cplx g = effective_gain({user.x, user.y, 0.0}, tx, cfg);
  return cfg.tx_power_w() * std::norm(g) / cfg.noise_user_w();
}

double user_snr(const Point2& user, const TransceiverLayout& layout, const SystemConfig& cfg) {
  return user_snr(user, pass_aperture(layout, Side::tx, cfg), cfg);
}

double rate_from_snrs(std::span<const double> snrs) {
  if (snrs.empty()) throw ValidationError("num_users", "multicast rate needs at least one user");
  return std::log2(1.0 + *std::min_element(snrs.begin(), snrs.end()));
}

double multicast_rate(const UserSet& users, const Aperture& tx, const SystemConfig& cfg) {
  std::vector<double> snrs;
  snrs.reserve(users.size());
  for (const auto& u : users.positions) snrs.push_back(user_snr(u, tx, cfg));
  return rate_from_snrs(snrs);
}

double multicast_rate(const UserSet& users, const TransceiverLayout& layout, const SystemConfig& cfg) {
  return multicast_rate(users, pass_aperture(layout, Side::tx, cfg), cfg);
}

double min_user_snr(const UserSet& users, const TransceiverLayout& layout, const SystemConfig& cfg) {
  const auto tx = pass_aperture(layout, Side::tx, cfg);
  double m = std::numeric_limits<double>::infinity();
  for (const auto& u : users.positions) m = std::min(m, user_snr(u, tx, cfg));
  return m;
}

ElementwiseSnr::ElementwiseSnr(const UserSet& users, const TransceiverLayout& layout, int q,
                               const SystemConfig& cfg)
    : cfg_(&cfg),
      users_(users.positions),
      n_total_(static_cast<int>(layout.tx_x.size())),
      scale_(cfg.tx_power_w() / cfg.noise_user_w()) {
  if (q < 0 || q >= n_total_) throw ValidationError("q", "element index out of range");
  auto ap = pass_aperture(layout, Side::tx, cfg);
  ap.x.erase(ap.x.begin() + q);
  ap.w.erase(ap.w.begin() + q);
  complement_.reserve(users_.size());
  for (const auto& u : users_) complement_.push_back(effective_gain({u.x, u.y, 0.0}, ap, cfg));
}

ElementwiseSnr::Terms ElementwiseSnr::terms(int k, double x) const {
  ++evals_;
  const auto& u = users_[k];
  const cplx a = freespace_gain({u.x, u.y, 0.0}, x, cfg_->params().y_tx, *cfg_) *
                 inwaveguide_coeff(x, n_total_, *cfg_);
  const cplx c = complement_[k];
  return {std::norm(c), std::norm(a), 2.0 * std::real(std::conj(c) * a)};
}

double ElementwiseSnr::snr(int k, double x) const {
  // |c + a|^2 directly; expanding into C + Q + L loses digits under
  // destructive interference.
  ++evals_;
  const auto& u = users_[k];
  const cplx a = freespace_gain({u.x, u.y, 0.0}, x, cfg_->params().y_tx, *cfg_) *
                 inwaveguide_coeff(x, n_total_, *cfg_);
  return scale_ * std::norm(complement_[k] + a);
}

double ElementwiseSnr::min_snr(double x) const {
  double m = std::numeric_limits<double>::infinity();
  for (int k = 0; k < static_cast<int>(users_.size()); ++k) m = std::min(m, snr(k, x));
  return m;
}

}  // namespace pinch
