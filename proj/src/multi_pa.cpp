#include "pinch/multi_pa.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>

#include "pinch/single_pa.hpp"

namespace pinch {

namespace {

constexpr double kRel = 1e-12;

// Lexicographic score, larger is better.
struct Score {
  double a;
  double b = 0.0;
};

bool better(const Score& s, const Score& t) {
  if (std::isinf(t.a) || std::isinf(s.a)) {
    if (s.a != t.a) return s.a > t.a;
    return s.b > t.b;
  }
  const double ta = kRel * std::abs(t.a);
  if (s.a > t.a + ta) return true;
  if (s.a < t.a - ta) return false;
  return s.b > t.b + kRel * std::abs(t.b);
}

// Best candidate; the incumbent stays unless something is strictly better,
// and among equal candidates the first (smallest x) wins.
std::size_t select(const std::vector<Score>& scores, std::size_t incumbent) {
  std::size_t best = incumbent;
  for (std::size_t i = 0; i < scores.size(); ++i)
    if (better(scores[i], scores[best])) best = i;
  return best;
}

std::size_t index_of(const std::vector<double>& xs, double x) {
  return static_cast<std::size_t>(std::find(xs.begin(), xs.end(), x) - xs.begin());
}

double rate_of(double min_snr) { return std::log2(1.0 + min_snr); }

bool relative_change_below(double prev, double cur, double tol) {
  return std::abs(cur - prev) <= tol * std::abs(prev);
}

void check_init(const TransceiverLayout& init, const SystemConfig& cfg) {
  if (static_cast<int>(init.tx_x.size()) != cfg.params().n_tx ||
      static_cast<int>(init.rx_x.size()) != cfg.params().n_rx)
    throw ValidationError("init", "layout size does not match n_tx / n_rx");
  if (!validate_layout(init, cfg)) throw ValidationError("init", "initial layout violates the layout invariants");
}

struct Evaluated {
  double rate;
  double bcrb;
};

Evaluated evaluate(const TransceiverLayout& l, const UserSet& users, const TargetPrior& prior, const GhqRule& rule,
                   const SystemConfig& cfg) {
  return {multicast_rate(users, l, cfg), bcrb_value(ofim(l, prior, rule, cfg), prior)};
}

// Candidate set and the incumbent's index in it.
struct Candidates {
  std::vector<double> xs;
  std::size_t incumbent;
};

Candidates candidates(Side p, int q, const TransceiverLayout& l, const SystemConfig& cfg) {
  Candidates c{local_feasible_set(p, q, l, cfg), 0};
  c.incumbent = index_of(c.xs, positions(l, p)[q]);
  return c;
}

std::vector<double> bcrbs(const ElementwiseFim& fim, const std::vector<double>& xs, const TargetPrior& prior) {
  const auto f = fim.evaluate_many(xs);
  std::vector<double> out(f.size());
  for (std::size_t i = 0; i < f.size(); ++i) out[i] = bcrb_value(f[i], prior);
  return out;
}

}  // namespace

std::vector<double> local_feasible_set(Side p, int q, const TransceiverLayout& layout, const SystemConfig& cfg) {
  const auto& xs = positions(layout, p);
  const int n = static_cast<int>(xs.size());
  if (q < 0 || q >= n) throw ValidationError("q", "element index out of range");
  const double dmin = cfg.min_spacing(), tol = kSpacingTolerance;
  const double lo = q > 0 ? xs[q - 1] + dmin - tol : -tol;
  const double hi = q + 1 < n ? xs[q + 1] - dmin + tol : cfg.params().region_x + tol;
  std::vector<double> out;
  for (double x : placement_grid(cfg.params().region_x, cfg.params().grid_points))
    if (x >= lo && x <= hi) out.push_back(x);
  auto it = std::lower_bound(out.begin(), out.end(), xs[q]);
  if (it == out.end() || *it != xs[q]) out.insert(it, xs[q]);
  return out;
}

std::vector<double> spread_around(double center, int n, const SystemConfig& cfg) {
  const double dmin = cfg.min_spacing(), dx = cfg.params().region_x;
  const double span = (n - 1) * dmin;
  if (span > dx + kSpacingTolerance) throw DoesNotFit("elements do not fit on the waveguide");
  const double start = std::clamp(center - span / 2.0, 0.0, std::max(0.0, dx - span));
  std::vector<double> out(n);
  for (int i = 0; i < n; ++i) out[i] = std::min(start + i * dmin, dx);
  return out;
}

TransceiverLayout default_initial_layout(const SystemConfig& cfg) {
  const double dx = cfg.params().region_x;
  auto side = [&](int n) {
    if (dx / n < cfg.min_spacing()) return spread_around(dx / 2.0, n, cfg);
    std::vector<double> xs(n);
    for (int i = 0; i < n; ++i) xs[i] = (i + 0.5) * dx / n;
    return xs;
  };
  return {side(cfg.params().n_tx), side(cfg.params().n_rx)};
}

AoResult alg1_sensing_centric(const TransceiverLayout& init, const UserSet& users, const TargetPrior& prior,
                              const SystemConfig& cfg, const AoOptions& opts) {
  check_init(init, cfg);
  const double gamma_c = cfg.min_snr_linear();
  const double init_snr = min_user_snr(users, init, cfg);
  if (init_snr < gamma_c) throw InfeasibleStart("initial layout violates the multicast SNR constraint");

  const auto rule = ghq_rule(cfg.params().ghq_nodes);
  AoState st;
  st.layout = init;
  double cur = bcrb_value(ofim(init, prior, rule, cfg), prior);
  double cur_snr = init_snr;
  st.bcrb_trace.push_back(cur);
  st.rate_trace.push_back(rate_of(cur_snr));
  st.min_snr_trace.push_back(cur_snr);

  for (st.iteration = 0; st.iteration < opts.max_iter;) {
    const double start = cur;
    bool moved = false;
    for (Side side : {Side::tx, Side::rx}) {
      const int n = static_cast<int>(positions(st.layout, side).size());
      for (int q = 0; q < n; ++q) {
        auto c = candidates(side, q, st.layout, cfg);
        ElementwiseFim fim(side, q, st.layout, prior, rule, cfg);
        std::vector<double> snr(c.xs.size(), std::numeric_limits<double>::infinity());
        std::vector<double> xs;  // admissible candidates
        std::vector<std::size_t> map;
        if (side == Side::tx) {
          ElementwiseSnr es(users, st.layout, q, cfg);
          for (std::size_t i = 0; i < c.xs.size(); ++i) snr[i] = es.min_snr(c.xs[i]);
          st.snr_evaluations += es.evaluations();
        }
        for (std::size_t i = 0; i < c.xs.size(); ++i)
          if (i == c.incumbent || snr[i] >= gamma_c) {
            xs.push_back(c.xs[i]);
            map.push_back(i);
          }
        const auto b = bcrbs(fim, xs, prior);
        st.fim_node_evaluations += fim.node_evaluations();
        st.candidates += xs.size();
        ++st.element_updates;
        std::vector<Score> scores(b.size());
        for (std::size_t i = 0; i < b.size(); ++i) scores[i] = {-b[i]};
        const std::size_t inc = index_of(xs, c.xs[c.incumbent]);
        const std::size_t k = select(scores, inc);
        if (k != inc) {
          positions(st.layout, side)[q] = xs[k];
          cur = b[k];
          if (side == Side::tx) cur_snr = snr[map[k]];
          st.bcrb_trace.push_back(cur);
          st.rate_trace.push_back(rate_of(cur_snr));
          st.min_snr_trace.push_back(cur_snr);
          moved = true;
        }
      }
    }
    ++st.iteration;
    if (!moved || relative_change_below(start, cur, opts.tol)) {
      st.converged = true;
      break;
    }
  }
  AoResult r;
  r.bfim = bcrb(st.layout, prior, rule, cfg);
  r.rate = multicast_rate(users, st.layout, cfg);
  st.feasible = min_user_snr(users, st.layout, cfg) >= gamma_c * (1.0 - 1e-9);
  r.state = std::move(st);
  return r;
}

namespace {

// One cyclic pass of AL-objective ascent. Returns true if any element moved.
bool al_sweep(AoState& st, const UserSet& users, const TargetPrior& prior, const GhqRule& rule,
              const SystemConfig& cfg, double lambda, double rho, bool sensing) {
  const double gs = cfg.params().max_bcrb;
  auto penalty = [&](double b) {
    const double d = b - gs;
    const double v = std::max(d, 0.0);
    return -lambda * d - 0.5 * rho * v * v;
  };
  bool moved = false;
  for (Side side : {Side::tx, Side::rx}) {
    if (side == Side::rx && !sensing) continue;  // objective flat in x_r
    const int n = static_cast<int>(positions(st.layout, side).size());
    for (int q = 0; q < n; ++q) {
      auto c = candidates(side, q, st.layout, cfg);
      std::vector<double> phi(c.xs.size(), 0.0);
      if (side == Side::tx) {
        ElementwiseSnr es(users, st.layout, q, cfg);
        for (std::size_t i = 0; i < c.xs.size(); ++i) phi[i] = rate_of(es.min_snr(c.xs[i]));
        st.snr_evaluations += es.evaluations();
      }
      if (sensing) {
        ElementwiseFim fim(side, q, st.layout, prior, rule, cfg);
        const auto b = bcrbs(fim, c.xs, prior);
        st.fim_node_evaluations += fim.node_evaluations();
        for (std::size_t i = 0; i < b.size(); ++i) phi[i] += penalty(b[i]);
      }
      st.candidates += c.xs.size();
      ++st.element_updates;
      std::vector<Score> scores(phi.size());
      for (std::size_t i = 0; i < phi.size(); ++i) scores[i] = {phi[i]};
      const std::size_t k = select(scores, c.incumbent);
      if (k != c.incumbent) {
        positions(st.layout, side)[q] = c.xs[k];
        moved = true;
      }
    }
  }
  return moved;
}

}  // namespace

AoResult rate_only_ao(const TransceiverLayout& init, const UserSet& users, const TargetPrior& prior,
                      const SystemConfig& cfg, const AoOptions& opts) {
  check_init(init, cfg);
  const auto rule = ghq_rule(cfg.params().ghq_nodes);
  AoState st;
  st.layout = init;
  double rate = multicast_rate(users, init, cfg);
  st.rate_trace.push_back(rate);
  for (st.iteration = 0; st.iteration < opts.max_iter;) {
    const bool moved = al_sweep(st, users, prior, rule, cfg, 0.0, 0.0, false);
    const double next = multicast_rate(users, st.layout, cfg);
    ++st.iteration;
    const bool small = relative_change_below(rate, next, opts.tol);
    rate = next;
    st.rate_trace.push_back(rate);
    if (!moved || small) {
      st.converged = true;
      break;
    }
  }
  AoResult r;
  r.bfim = bcrb(st.layout, prior, rule, cfg);
  r.rate = rate;
  st.bcrb_trace.push_back(r.bfim.bcrb);
  r.state = std::move(st);
  return r;
}

AlResult alg2_comm_centric(const TransceiverLayout& init, const UserSet& users, const TargetPrior& prior,
                           const SystemConfig& cfg, const AlParams& al, const AoOptions& opts) {
  (void)opts;
  check_init(init, cfg);
  const auto rule = ghq_rule(cfg.params().ghq_nodes);
  const double gs = cfg.params().max_bcrb;
  const double eps_feas = al.eps_feas < 0.0 ? 1e-3 * gs : al.eps_feas;
  // BCRB never exceeds the prior trace; above it the constraint is inactive
  // and with lambda = 0 the sensing terms vanish identically.
  const bool sensing = !(al.lambda0 == 0.0 && gs >= prior.var_x + prior.var_y);

  AlResult res;
  AoState& st = res.ao.state;
  AlState& as = res.al;
  st.layout = init;
  as.lambda = al.lambda0;
  as.rho = al.rho0;

  auto ev = evaluate(st.layout, users, prior, rule, cfg);
  double delta = ev.bcrb - gs;
  auto al_value = [&](double r, double d) {
    const double v = std::max(d, 0.0);
    return r - as.lambda * d - 0.5 * as.rho * v * v;
  };
  st.rate_trace.push_back(ev.rate);
  st.bcrb_trace.push_back(ev.bcrb);
  as.lambda_trace.push_back(as.lambda);
  as.rho_trace.push_back(as.rho);
  as.violation_trace.push_back(std::max(delta, 0.0));

  std::optional<TransceiverLayout> best;
  double best_rate = -std::numeric_limits<double>::infinity();
  auto note_feasible = [&] {
    if (delta <= eps_feas && ev.rate > best_rate) {
      best = st.layout;
      best_rate = ev.rate;
    }
  };
  note_feasible();

  double outer_rate = ev.rate;
  for (as.outer_iter = 0; as.outer_iter < al.max_outer;) {
    double prev_l = al_value(ev.rate, delta);
    for (int inner = 0; inner < al.max_inner; ++inner) {
      const bool moved = al_sweep(st, users, prior, rule, cfg, as.lambda, as.rho, sensing);
      ev = evaluate(st.layout, users, prior, rule, cfg);
      delta = ev.bcrb - gs;
      const double l = al_value(ev.rate, delta);
      as.lambda = std::max(0.0, as.lambda + as.rho * delta);
      ++as.inner_iter;
      ++st.iteration;
      st.rate_trace.push_back(ev.rate);
      st.bcrb_trace.push_back(ev.bcrb);
      as.rate_trace.push_back(ev.rate);
      as.lambda_trace.push_back(as.lambda);
      note_feasible();
      if (!moved || relative_change_below(prev_l, l, al.eps_in)) break;
      prev_l = l;
    }
    as.violation = std::max(delta, 0.0);
    as.violation_trace.push_back(as.violation);
    if (as.violation > eps_feas) as.rho *= al.beta;
    as.rho_trace.push_back(as.rho);
    ++as.outer_iter;
    if (std::abs(ev.rate - outer_rate) <= al.eps_out && as.violation <= eps_feas) {
      as.converged = true;
      break;
    }
    outer_rate = ev.rate;
  }

  if (!as.converged && best && st.layout != *best) {
    st.layout = *best;
    ev = evaluate(st.layout, users, prior, rule, cfg);
    delta = ev.bcrb - gs;
  }
  st.converged = as.converged;
  st.feasible = delta <= eps_feas;
  as.violation = std::max(delta, 0.0);
  res.ao.bfim = bcrb(st.layout, prior, rule, cfg);
  res.ao.rate = ev.rate;
  return res;
}

namespace {

ParetoPoint pareto_run(double alpha, const TransceiverLayout& start, const UserSet& users, const TargetPrior& prior,
                       const GhqRule& rule, const SystemConfig& cfg, const AoOptions& opts) {
  ParetoPoint pt;
  pt.alpha = alpha;
  pt.layout = start;
  auto ev = evaluate(start, users, prior, rule, cfg);
  double rate = ev.rate, b = ev.bcrb;
  double u = rate_profile_utility(rate, 1.0 / b, alpha);
  pt.utility_trace.push_back(u);

  for (pt.iterations = 0; pt.iterations < opts.max_iter;) {
    const double start_u = u;
    bool moved = false;
    for (Side side : {Side::tx, Side::rx}) {
      const int n = static_cast<int>(positions(pt.layout, side).size());
      for (int q = 0; q < n; ++q) {
        auto c = candidates(side, q, pt.layout, cfg);
        ElementwiseFim fim(side, q, pt.layout, prior, rule, cfg);
        const auto bs = bcrbs(fim, c.xs, prior);
        std::vector<double> rs(c.xs.size(), rate);
        std::vector<Score> scores(c.xs.size());
        if (side == Side::tx) {
          ElementwiseSnr es(users, pt.layout, q, cfg);
          for (std::size_t i = 0; i < c.xs.size(); ++i) {
            rs[i] = rate_of(es.min_snr(c.xs[i]));
            scores[i] = {rate_profile_utility(rs[i], 1.0 / bs[i], alpha), rate_profile_sum(rs[i], 1.0 / bs[i], alpha)};
          }
        } else {
          for (std::size_t i = 0; i < c.xs.size(); ++i) scores[i] = {-bs[i]};
        }
        const std::size_t k = select(scores, c.incumbent);
        if (k != c.incumbent) {
          positions(pt.layout, side)[q] = c.xs[k];
          rate = rs[k];
          b = bs[k];
          u = rate_profile_utility(rate, 1.0 / b, alpha);
          pt.utility_trace.push_back(u);
          moved = true;
        }
      }
    }
    ++pt.iterations;
    if (!moved || relative_change_below(start_u, u, opts.tol)) break;
  }
  ev = evaluate(pt.layout, users, prior, rule, cfg);
  pt.rate = ev.rate;
  pt.bcrb = ev.bcrb;
  pt.utility = rate_profile_utility(pt.rate, 1.0 / pt.bcrb, alpha);
  return pt;
}

Score pareto_score(const ParetoPoint& p, double alpha) {
  return {rate_profile_utility(p.rate, 1.0 / p.bcrb, alpha), rate_profile_sum(p.rate, 1.0 / p.bcrb, alpha)};
}

}  // namespace

std::vector<ParetoPoint> alg3_pareto_scan(std::span<const double> alphas, const TransceiverLayout& init,
                                          const UserSet& users, const TargetPrior& prior, const SystemConfig& cfg,
                                          const AoOptions& opts, bool polish) {
  check_init(init, cfg);
  for (double a : alphas)
    if (!(a >= 0.0 && a <= 1.0)) throw ValidationError("alpha", "must lie in [0, 1]");
  const auto rule = ghq_rule(cfg.params().ghq_nodes);
  std::vector<ParetoPoint> pts;
  pts.reserve(alphas.size());
  for (double a : alphas) pts.push_back(pareto_run(a, init, users, prior, rule, cfg, opts));
  if (!polish) return pts;

  constexpr int kRounds = 5;
  for (int round = 0; round < kRounds; ++round) {
    bool changed = false;
    for (std::size_t i = 0; i < pts.size(); ++i) {
      const double a = pts[i].alpha;
      std::size_t best = i;
      for (std::size_t j = 0; j < pts.size(); ++j)
        if (better(pareto_score(pts[j], a), pareto_score(pts[best], a))) best = j;
      if (best == i) continue;
      auto cand = pareto_run(a, pts[best].layout, users, prior, rule, cfg, opts);
      if (better(pareto_score(cand, a), pareto_score(pts[i], a))) {
        pts[i] = std::move(cand);
        changed = true;
      }
    }
    if (!changed) break;
  }
  return pts;
}

std::vector<std::size_t> dominated_points(std::span<const ParetoPoint> pts) {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < pts.size(); ++i)
    for (std::size_t j = 0; j < pts.size(); ++j) {
      if (i == j) continue;
      const bool dup = pts[j].bcrb == pts[i].bcrb && pts[j].rate == pts[i].rate;
      if (dup) continue;
      if (pts[j].bcrb <= pts[i].bcrb && pts[j].rate >= pts[i].rate) {
        out.push_back(i);
        break;
      }
    }
  return out;
}

RecoveredRun sensing_centric_with_recovery(const UserSet& users, const TargetPrior& prior, const SystemConfig& cfg,
                                           const AoOptions& opts) {
  RecoveredRun run;
  TransceiverLayout init = default_initial_layout(cfg);
  try {
    run.result = alg1_sensing_centric(init, users, prior, cfg, opts);
    run.feasible = true;
    return run;
  } catch (const InfeasibleStart&) {
  }
  init.tx_x = spread_around(cc_optimal_tx(users, cfg).x_t, cfg.params().n_tx, cfg);
  run.start = 1;
  try {
    run.result = alg1_sensing_centric(init, users, prior, cfg, opts);
    run.feasible = true;
    return run;
  } catch (const InfeasibleStart&) {
  }
  init = rate_only_ao(init, users, prior, cfg, opts).state.layout;
  run.start = 2;
  try {
    run.result = alg1_sensing_centric(init, users, prior, cfg, opts);
    run.feasible = true;
    return run;
  } catch (const InfeasibleStart&) {
  }
  const auto rule = ghq_rule(cfg.params().ghq_nodes);
  run.result.state.layout = init;
  run.result.state.feasible = false;
  run.result.bfim = bcrb(init, prior, rule, cfg);
  run.result.rate = multicast_rate(users, init, cfg);
  return run;
}

}  // namespace pinch
