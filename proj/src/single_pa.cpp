#include "pinch/single_pa.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace pinch {

namespace {

constexpr double kTieRel = 1e-12;

bool strictly_less(double a, double b) { return std::isinf(b) ? a < b : a < b - kTieRel * std::abs(b); }

double clamp_x(double x, const SystemConfig& cfg, const char* what) {
  const double dx = cfg.params().region_x;
  if (x < 0.0 || x > dx) {
    log_warning(std::string(what) + " outside [0, D_x]; clamped");
    return std::clamp(x, 0.0, dx);
  }
  return x;
}

TransceiverLayout single(double xt, double xr) { return {{xt}, {xr}}; }

// Per-x_t table of the 1D BCRB on the grid, rows indexed by x_t.
struct Bcrb1dTable {
  std::vector<double> grid;
  std::vector<double> values;  // grid.size()^2, row-major in x_t
  double at(std::size_t it, std::size_t ir) const { return values[it * grid.size() + ir]; }
};

Bcrb1dTable bcrb_table(const TargetPrior& prior, const GhqRule& rule, const SystemConfig& cfg) {
  Bcrb1dTable t;
  t.grid = placement_grid(cfg.params().region_x, cfg.params().grid_points);
  const long n = static_cast<long>(t.grid.size());
  t.values.resize(n * n);
#pragma omp parallel for schedule(dynamic, 4)
  for (long i = 0; i < n; ++i)
    for (long j = 0; j < n; ++j) t.values[i * n + j] = bcrb_1d(t.grid[i], t.grid[j], prior, rule, cfg);
  return t;
}

std::size_t argmin_row(const Bcrb1dTable& t, std::size_t it) {
  std::size_t best = 0;
  for (std::size_t j = 1; j < t.grid.size(); ++j)
    if (strictly_less(t.at(it, j), t.at(it, best))) best = j;
  return best;
}

}  // namespace

double user_offset_sq(const Point2& user, const SystemConfig& cfg) {
  const double dy = cfg.params().y_tx - user.y, h = cfg.params().height;
  return dy * dy + h * h;
}

double cc_objective(const UserSet& users, double x, const SystemConfig& cfg) {
  double m = -std::numeric_limits<double>::infinity();
  for (const auto& u : users.positions) m = std::max(m, (x - u.x) * (x - u.x) + user_offset_sq(u, cfg));
  return m;
}

std::vector<double> cc_candidate_set(const UserSet& users, const SystemConfig& cfg) {
  const double dx = cfg.params().region_x;
  std::vector<double> c = {0.0, dx};
  for (const auto& u : users.positions) c.push_back(u.x);
  const auto& p = users.positions;
  for (std::size_t i = 0; i < p.size(); ++i)
    for (std::size_t j = i + 1; j < p.size(); ++j) {
      if (p[j].x == p[i].x) continue;
      const double xi = (user_offset_sq(p[j], cfg) - user_offset_sq(p[i], cfg)) / (2.0 * (p[j].x - p[i].x)) +
                        0.5 * (p[i].x + p[j].x);
      if (xi >= 0.0 && xi <= dx) c.push_back(xi);
    }
  std::sort(c.begin(), c.end());
  c.erase(std::unique(c.begin(), c.end()), c.end());
  return c;
}

CcResult cc_optimal_tx(const UserSet& users, const SystemConfig& cfg) {
  if (users.size() == 0) throw ValidationError("num_users", "need at least one user");
  CcResult best{0.0, 0.0, std::numeric_limits<double>::infinity()};
  for (double x : cc_candidate_set(users, cfg)) {
    const double obj = cc_objective(users, x, cfg);
    if (strictly_less(obj, best.objective)) best = {x, 0.0, obj};
  }
  TransceiverLayout l{{best.x_t}, {best.x_t}};
  best.rate = multicast_rate(users, l, cfg);
  return best;
}

double sensing_offset(const SystemConfig& cfg) {
  const auto& p = cfg.params();
  const double half = 0.5 * (p.y_rx - p.y_tx);
  return std::sqrt(p.height * p.height + half * half);
}

double conditional_fisher_1d(double u_x, double x_t, double x_r, const SystemConfig& cfg) {
  const double ds = sensing_offset(cfg), k0 = cfg.k0();
  const double rt = std::hypot(u_x - x_t, ds), rr = std::hypot(u_x - x_r, ds);
  if (rt < 1e-9 || rr < 1e-9) throw DegenerateGeometry("target coincides with a PA");
  const double ct = (u_x - x_t) / rt, cr = (u_x - x_r) / rr;
  const double phi = std::cos(k0 * (rt - rr));
  const double bracket = (k0 * k0 + 1.0 / (rt * rt)) * ct * ct + (k0 * k0 + 1.0 / (rr * rr)) * cr * cr +
                         2.0 * (k0 * k0 + 1.0 / (rt * rr)) * ct * cr * phi;
  // |mu|^2 = eta^2 P_t / (R_t R_r)^2 with unit in-waveguide amplitude.
  const double mu2 = cfg.eta() * cfg.eta() * cfg.tx_power_w() / (rt * rt * rr * rr);
  return 2.0 * mu2 / cfg.noise_sense_w() * bracket;
}

double averaged_fisher_1d(double x_t, double x_r, const TargetPrior& prior, const GhqRule& rule,
                          const SystemConfig& cfg) {
  if (!(prior.var_x > 0.0)) throw DegeneratePrior("var_x must be > 0");
  const double s = std::sqrt(2.0 * prior.var_x);
  double acc = 0.0;
  for (std::size_t i = 0; i < rule.size(); ++i)
    acc += rule.weights[i] * conditional_fisher_1d(prior.mean_x + s * rule.nodes[i], x_t, x_r, cfg);
  return acc / std::sqrt(std::numbers::pi);
}

double bcrb_1d(double x_t, double x_r, const TargetPrior& prior, const GhqRule& rule, const SystemConfig& cfg) {
  return 1.0 / (averaged_fisher_1d(x_t, x_r, prior, rule, cfg) + 1.0 / prior.var_x);
}

Displacement sc_displacement(const SystemConfig& cfg) {
  const double k2 = cfg.k0() * cfg.k0();
  const double d2 = std::pow(sensing_offset(cfg), 2);
  // Rationalised form of the positive root; avoids cancellation when k0 D >> 1.
  const double disc = std::sqrt(9.0 * k2 * k2 * d2 * d2 + 14.0 * k2 * d2 + 9.0);
  const double b = k2 * d2 + 3.0;
  const double c = k2 * d2 * d2 + d2;
  const double s = 2.0 * c / (b + disc);
  return {std::sqrt(s), std::sqrt(d2 / 2.0)};
}

double displacement_residual(double d, const SystemConfig& cfg) {
  const double k2 = cfg.k0() * cfg.k0();
  const double D2 = std::pow(sensing_offset(cfg), 2);
  const double s = d * d;
  const double t2 = 2.0 * k2 * s * s, t1 = (k2 * D2 + 3.0) * s, t0 = k2 * D2 * D2 + D2;
  return std::abs(-t2 - t1 + t0) / std::max({t2, t1, t0});
}

TransceiverLayout sc_optimal_layout(const TargetPrior& prior, const SystemConfig& cfg) {
  const double x = clamp_x(prior.mean_x - sc_displacement(cfg).exact, cfg, "sensing-centric PA position");
  return single(x, x);
}

double rx_best_response(double x_t, const TargetPrior& prior, const SystemConfig& cfg) {
  return std::clamp(2.0 * prior.mean_x - x_t, 0.0, cfg.params().region_x);
}

double rx_best_response_exact(double x_t, const TargetPrior& prior, const SystemConfig& cfg) {
  const auto rule = ghq_rule(cfg.params().ghq_nodes);
  const auto grid = placement_grid(cfg.params().region_x, cfg.params().grid_points);
  double best_x = grid.front(), best = std::numeric_limits<double>::infinity();
  for (double xr : grid) {
    const double v = bcrb_1d(x_t, xr, prior, rule, cfg);
    if (strictly_less(v, best)) best = v, best_x = xr;
  }
  return best_x;
}

double rate_profile_utility(double rate, double sensing_rate, double alpha) {
  return std::min(rate / (alpha + kProfileDelta), sensing_rate / ((1.0 - alpha) + kProfileDelta));
}

double rate_profile_sum(double rate, double sensing_rate, double alpha) {
  return rate / (alpha + kProfileDelta) + sensing_rate / ((1.0 - alpha) + kProfileDelta);
}

std::vector<SingleParetoPoint> pareto_single_sweep(std::span<const double> alphas, const UserSet& users,
                                                   const TargetPrior& prior, const SystemConfig& cfg,
                                                   RxPolicy policy) {
  const auto rule = ghq_rule(cfg.params().ghq_nodes);
  const auto grid = placement_grid(cfg.params().region_x, cfg.params().grid_points);
  const std::size_t n = grid.size();

  std::vector<double> rate(n), xr(n), sens(n), bc(n);
  Bcrb1dTable table;
  if (policy == RxPolicy::exact) table = bcrb_table(prior, rule, cfg);
  for (std::size_t i = 0; i < n; ++i) {
    rate[i] = multicast_rate(users, single(grid[i], grid[i]), cfg);
    if (policy == RxPolicy::exact) {
      const std::size_t j = argmin_row(table, i);
      xr[i] = grid[j];
      bc[i] = table.at(i, j);
    } else {
      xr[i] = rx_best_response(grid[i], prior, cfg);
      bc[i] = bcrb_1d(grid[i], xr[i], prior, rule, cfg);
    }
    sens[i] = 1.0 / bc[i];
  }

  std::vector<SingleParetoPoint> out;
  for (double alpha : alphas) {
    std::size_t best = 0;
    double bu = rate_profile_utility(rate[0], sens[0], alpha), bs = rate_profile_sum(rate[0], sens[0], alpha);
    for (std::size_t i = 1; i < n; ++i) {
      const double u = rate_profile_utility(rate[i], sens[i], alpha);
      const double s = rate_profile_sum(rate[i], sens[i], alpha);
      // Higher utility wins; among equal utilities the larger term sum.
      if (u > bu + kTieRel * std::abs(bu) || (u >= bu - kTieRel * std::abs(bu) && s > bs)) {
        best = i;
        bu = u;
        bs = s;
      }
    }
    out.push_back({alpha, grid[best], xr[best], bu, rate[best], sens[best], bc[best]});
  }
  return out;
}

SingleParetoPoint pareto_single(double alpha, const UserSet& users, const TargetPrior& prior,
                                const SystemConfig& cfg, RxPolicy policy) {
  const double a[] = {alpha};
  return pareto_single_sweep(a, users, prior, cfg, policy).front();
}

double path_loss_factor(double m, double eps, const SystemConfig& cfg) {
  const double d2 = std::pow(sensing_offset(cfg), 2);
  return 1.0 / (((m + eps) * (m + eps) + d2) * ((m - eps) * (m - eps) + d2));
}

}  // namespace pinch
