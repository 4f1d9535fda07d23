#include "pinch/fisher.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

namespace pinch {

namespace {

constexpr double kCoincidence = 1e-6;
constexpr double kMinDet = 1e-30;

struct QuadNode {
  double ux, uy, weight;
};

double dist3(double ux, double uy, double pa_x, double wy, double h) {
  const double dx = ux - pa_x, dy = uy - wy;
  return std::sqrt(dx * dx + dy * dy + h * h);
}

// Moves a node off any PA it would coincide with.
double guard_node(double ux, double uy, std::span<const Aperture* const> aps, double h) {
  for (const Aperture* ap : aps)
    for (double x : ap->x)
      if (dist3(ux, uy, x, ap->y, h) < kCoincidence) {
        log_warning("quadrature node within 1e-6 m of a PA; perturbing node x by 1e-6 m");
        return ux + kCoincidence;
      }
  return ux;
}

std::vector<QuadNode> quad_nodes(const TargetPrior& prior, const GhqRule& rule,
                                 std::span<const Aperture* const> aps, double h) {
  pfim(prior);  // validates the variances
  const double sx = std::sqrt(2.0 * prior.var_x), sy = std::sqrt(2.0 * prior.var_y);
  std::vector<QuadNode> out;
  out.reserve(rule.size() * rule.size());
  for (std::size_t i = 0; i < rule.size(); ++i)
    for (std::size_t j = 0; j < rule.size(); ++j) {
      const double uy = prior.mean_y + sy * rule.nodes[j];
      double ux = prior.mean_x + sx * rule.nodes[i];
      ux = guard_node(ux, uy, aps, h);
      out.push_back({ux, uy, rule.weights[i] * rule.weights[j] / std::numbers::pi});
    }
  return out;
}

Sym2 gram(const cplx& fx, const cplx& fy) {
  return {std::norm(fx), std::real(std::conj(fx) * fy), std::norm(fy)};
}

Sym2 node_integrand(const QuadNode& nd, const Aperture& tx, const Aperture& rx, const SystemConfig& cfg) {
  auto mj = mean_jacobian({nd.ux, nd.uy}, tx, rx, cfg);
  return nd.weight * gram(mj.fx, mj.fy);
}

double fim_scale(const SystemConfig& cfg) { return 2.0 * cfg.tx_power_w() / cfg.noise_sense_w(); }

Sym2 reduce(const std::vector<Sym2>& parts, double scale) {
  Sym2 s;
  for (const auto& p : parts) s += p;
  return scale * s;
}

}  // namespace

GhqRule ghq_rule(int T) {
  if (T < 1 || T > 64) throw UnsupportedOrder("ghq_nodes must be in [1, 64], got " + std::to_string(T));
  GhqRule r;
  if (T == 1) {
    r.nodes = {0.0};
    r.weights = {std::sqrt(std::numbers::pi)};
    return r;
  }
  Eigen::VectorXd diag = Eigen::VectorXd::Zero(T);
  Eigen::VectorXd sub(T - 1);
  for (int k = 1; k < T; ++k) sub(k - 1) = std::sqrt(k / 2.0);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es;
  es.computeFromTridiagonal(diag, sub, Eigen::ComputeEigenvectors);
  if (es.info() != Eigen::Success) throw UnsupportedOrder("Jacobi eigen-solve failed");
  r.nodes.resize(T);
  r.weights.resize(T);
  for (int i = 0; i < T; ++i) {
    r.nodes[i] = es.eigenvalues()(i);
    const double v0 = es.eigenvectors()(0, i);
    r.weights[i] = std::sqrt(std::numbers::pi) * v0 * v0;
  }
  // Enforce exact symmetry about 0.
  for (int i = 0; i < T / 2; ++i) {
    const int j = T - 1 - i;
    const double x = 0.5 * (r.nodes[j] - r.nodes[i]);
    const double w = 0.5 * (r.weights[i] + r.weights[j]);
    r.nodes[i] = -x;
    r.nodes[j] = x;
    r.weights[i] = r.weights[j] = w;
  }
  if (T % 2 == 1) r.nodes[T / 2] = 0.0;
  return r;
}

cplx derivative_kernel(Axis alpha, Side p, int n, const Point2& target, const TransceiverLayout& layout,
                       const SystemConfig& cfg) {
  const auto& xs = positions(layout, p);
  if (n < 0 || n >= static_cast<int>(xs.size())) throw ValidationError("n", "element index out of range");
  const double wy = waveguide_y(cfg, p);
  const double r = dist3(target.x, target.y, xs[n], wy, cfg.params().height);
  if (r < 1e-9) throw DegenerateGeometry("target coincides with a PA");
  const double chi = alpha == Axis::x ? target.x - xs[n] : target.y - wy;
  const cplx w = inwaveguide_coeff(xs[n], static_cast<int>(xs.size()), cfg);
  const cplx c = cfg.sqrt_eta() * w * std::polar(1.0 / r, -cfg.k0() * r);
  return c * cplx(1.0, cfg.k0() * r) * (chi / (r * r));
}

SideSums side_sums(const Point2& target, const Aperture& ap, const SystemConfig& cfg) {
  const double h = cfg.params().height, k0 = cfg.k0();
  SideSums s{};
  for (std::size_t n = 0; n < ap.size(); ++n) {
    const double dx = target.x - ap.x[n], dy = target.y - ap.y;
    const double r = std::sqrt(dx * dx + dy * dy + h * h);
    if (r < 1e-9) throw DegenerateGeometry("target coincides with a PA");
    const cplx c = cfg.sqrt_eta() * ap.w[n] * std::polar(1.0 / r, -k0 * r);
    const cplx k = c * cplx(1.0, k0 * r) / (r * r);
    s.g += c;
    s.sx += k * dx;
    s.sy += k * dy;
  }
  return s;
}

MeanJacobian mean_jacobian(const Point2& target, const Aperture& tx, const Aperture& rx,
                           const SystemConfig& cfg) {
  const auto t = side_sums(target, tx, cfg);
  const auto r = side_sums(target, rx, cfg);
  return {t.g * r.g, -(r.g * t.sx + t.g * r.sx), -(r.g * t.sy + t.g * r.sy)};
}

cplx jacobian_entry(Axis alpha, const Point2& target, const TransceiverLayout& layout, const SystemConfig& cfg) {
  auto mj = mean_jacobian(target, pass_aperture(layout, Side::tx, cfg), pass_aperture(layout, Side::rx, cfg), cfg);
  return alpha == Axis::x ? mj.fx : mj.fy;
}

Sym2 ofim(const Aperture& tx, const Aperture& rx, const TargetPrior& prior, const GhqRule& rule,
          const SystemConfig& cfg) {
  const Aperture* aps[] = {&tx, &rx};
  const auto nodes = quad_nodes(prior, rule, aps, cfg.params().height);
  std::vector<Sym2> parts(nodes.size());
  const long n = static_cast<long>(nodes.size());
  bool failed = false;
  std::string what;
#pragma omp parallel for schedule(static)
  for (long i = 0; i < n; ++i) {
    try {
      parts[i] = node_integrand(nodes[i], tx, rx, cfg);
    } catch (const DegenerateGeometry& e) {
#pragma omp critical
      {
        failed = true;
        what = e.what();
      }
    }
  }
  if (failed) throw DegenerateGeometry(what);
  return reduce(parts, fim_scale(cfg));
}

Sym2 ofim_serial(const Aperture& tx, const Aperture& rx, const TargetPrior& prior, const GhqRule& rule,
                 const SystemConfig& cfg) {
  const Aperture* aps[] = {&tx, &rx};
  const auto nodes = quad_nodes(prior, rule, aps, cfg.params().height);
  std::vector<Sym2> parts;
  parts.reserve(nodes.size());
  for (const auto& nd : nodes) parts.push_back(node_integrand(nd, tx, rx, cfg));
  return reduce(parts, fim_scale(cfg));
}

Sym2 ofim(const TransceiverLayout& layout, const TargetPrior& prior, const GhqRule& rule,
          const SystemConfig& cfg) {
  return ofim(pass_aperture(layout, Side::tx, cfg), pass_aperture(layout, Side::rx, cfg), prior, rule, cfg);
}

Sym2 pfim(const TargetPrior& prior) {
  if (!(prior.var_x > 0.0) || !(prior.var_y > 0.0)) throw DegeneratePrior("prior variances must be > 0");
  return {1.0 / prior.var_x, 0.0, 1.0 / prior.var_y};
}

Bfim assemble_bfim(const Sym2& f, const TargetPrior& prior) {
  const Sym2 p = pfim(prior);
  Bfim b{f.xx, f.xy, f.yy, p.xx, p.yy, 0.0};
  const double a = f.xx + p.xx, d = f.yy + p.yy;
  const double det = a * d - f.xy * f.xy;
  if (!(det >= kMinDet)) throw IllConditioned("BFIM determinant below 1e-30");
  b.bcrb = (a + d) / det;
  return b;
}

double bcrb_value(const Sym2& f, const TargetPrior& prior) noexcept {
  const double a = f.xx + 1.0 / prior.var_x, d = f.yy + 1.0 / prior.var_y;
  const double det = a * d - f.xy * f.xy;
  if (!(det >= kMinDet)) return std::numeric_limits<double>::infinity();
  return (a + d) / det;
}

Bfim bcrb(const Aperture& tx, const Aperture& rx, const TargetPrior& prior, const GhqRule& rule,
          const SystemConfig& cfg) {
  return assemble_bfim(ofim(tx, rx, prior, rule, cfg), prior);
}

Bfim bcrb(const TransceiverLayout& layout, const TargetPrior& prior, const GhqRule& rule,
          const SystemConfig& cfg) {
  return assemble_bfim(ofim(layout, prior, rule, cfg), prior);
}

std::uint64_t complement_fingerprint(Side p, int q, const TransceiverLayout& layout, const TargetPrior& prior,
                                     const GhqRule& rule, const SystemConfig& cfg) {
  Fnv1a h;
  h.add(static_cast<std::uint64_t>(p == Side::tx ? 0 : 1));
  h.add(static_cast<std::uint64_t>(q));
  for (Side s : {Side::tx, Side::rx}) {
    const auto& xs = positions(layout, s);
    h.add(static_cast<std::uint64_t>(xs.size()));
    for (std::size_t i = 0; i < xs.size(); ++i)
      if (!(s == p && static_cast<int>(i) == q)) h.add(xs[i]);
  }
  h.add(prior.mean_x);
  h.add(prior.mean_y);
  h.add(prior.var_x);
  h.add(prior.var_y);
  for (double v : rule.nodes) h.add(v);
  for (double v : rule.weights) h.add(v);
  h.add(config_hash(cfg.params()));
  return h.value();
}

ElementwiseFim::ElementwiseFim(Side p, int q, const TransceiverLayout& layout, const TargetPrior& prior,
                               const GhqRule& rule, const SystemConfig& cfg)
    : cfg_(&cfg),
      side_(p),
      q_(q),
      n_total_(static_cast<int>(positions(layout, p).size())),
      wy_(waveguide_y(cfg, p)),
      prior_(prior),
      rule_(rule),
      fingerprint_(complement_fingerprint(p, q, layout, prior, rule, cfg)) {
  if (q < 0 || q >= n_total_) throw ValidationError("q", "element index out of range");
  const Side other = p == Side::tx ? Side::rx : Side::tx;
  const Aperture own_full = pass_aperture(layout, p, cfg);
  const Aperture bar = pass_aperture(layout, other, cfg);
  Aperture own = own_full;
  own.x.erase(own.x.begin() + q);
  own.w.erase(own.w.begin() + q);

  const Aperture* aps[] = {&own_full, &bar};
  const auto quad = quad_nodes(prior, rule, aps, cfg.params().height);
  nodes_.reserve(quad.size());
  for (const auto& nd : quad) {
    const Point2 t{nd.ux, nd.uy};
    const auto sb = side_sums(t, bar, cfg);
    const auto sc = side_sums(t, own, cfg);
    Node n{nd.ux, nd.uy, nd.weight, sb.g, sb.sx, sb.sy,
           -(sb.g * sc.sx + sc.g * sb.sx), -(sb.g * sc.sy + sc.g * sb.sy)};
    phi_ += nd.weight * gram(n.cx, n.cy);
    nodes_.push_back(n);
  }
  phi_ = fim_scale(cfg) * phi_;
}

Sym2 ElementwiseFim::accumulate(double x, Sym2* lambda, Sym2* omega) const {
  const double h = cfg_->params().height, k0 = cfg_->k0();
  const cplx w = inwaveguide_coeff(x, n_total_, *cfg_) * cfg_->sqrt_eta();
  Sym2 lam, om;
  for (const auto& nd : nodes_) {
    const double dx = nd.ux - x, dy = nd.uy - wy_;
    const double r = std::sqrt(dx * dx + dy * dy + h * h);
    if (r < 1e-9) throw DegenerateGeometry("candidate coincides with a quadrature node");
    const cplx c = w * std::polar(1.0 / r, -k0 * r);
    const cplx k = c * cplx(1.0, k0 * r) / (r * r);
    const cplx ax = -(nd.gbar * (k * dx) + c * nd.sbar_x);
    const cplx ay = -(nd.gbar * (k * dy) + c * nd.sbar_y);
    lam.xx += nd.weight * 2.0 * std::real(std::conj(nd.cx) * ax);
    lam.xy += nd.weight * std::real(std::conj(nd.cx) * ay + std::conj(ax) * nd.cy);
    lam.yy += nd.weight * 2.0 * std::real(std::conj(nd.cy) * ay);
    om += nd.weight * gram(ax, ay);
  }
  node_evals_.fetch_add(nodes_.size(), std::memory_order_relaxed);
  const double s = fim_scale(*cfg_);
  lam = s * lam;
  om = s * om;
  if (lambda) *lambda = lam;
  if (omega) *omega = om;
  return phi_ + lam + om;
}

ElementwiseFim::Parts ElementwiseFim::parts(double x) const {
  Parts p;
  p.phi = phi_;
  accumulate(x, &p.lambda, &p.omega);
  return p;
}

Sym2 ElementwiseFim::evaluate(double x) const { return accumulate(x, nullptr, nullptr); }

Sym2 ElementwiseFim::evaluate(const TransceiverLayout& current, double x) const {
  if (complement_fingerprint(side_, q_, current, prior_, rule_, *cfg_) != fingerprint_)
    throw StaleCache("element-wise FIM cache does not match the current layout");
  return evaluate(x);
}

std::vector<Sym2> ElementwiseFim::evaluate_many(std::span<const double> xs) const {
  std::vector<Sym2> out(xs.size());
  const long n = static_cast<long>(xs.size());
  bool failed = false;
#pragma omp parallel for schedule(static)
  for (long i = 0; i < n; ++i) {
    try {
      out[i] = accumulate(xs[i], nullptr, nullptr);
    } catch (const DegenerateGeometry&) {
#pragma omp atomic write
      failed = true;
    }
  }
  if (failed) throw DegenerateGeometry("candidate coincides with a quadrature node");
  return out;
}

std::vector<Sym2> ElementwiseFim::evaluate_many_serial(std::span<const double> xs) const {
  std::vector<Sym2> out;
  out.reserve(xs.size());
  for (double x : xs) out.push_back(accumulate(x, nullptr, nullptr));
  return out;
}

}  // namespace pinch
