#include "pinch/harness.hpp"

#include <omp.h>

#include <CLI11.hpp>
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <iostream>
#include <json.hpp>
#include <limits>
#include <map>
#include <sstream>

#include "pinch/baselines.hpp"
#include "pinch/channel.hpp"
#include "pinch/fisher.hpp"
#include "pinch/multi_pa.hpp"
#include "pinch/oracles.hpp"
#include "pinch/single_pa.hpp"

namespace pinch {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

constexpr std::pair<Mode, std::string_view> kModes[] = {
    {Mode::single_cc, "single-cc"},         {Mode::single_sc, "single-sc"}, {Mode::single_pareto, "single-pareto"},
    {Mode::multi_sc, "multi-sc"},           {Mode::multi_cc, "multi-cc"},   {Mode::multi_pareto, "multi-pareto"},
    {Mode::baselines, "baselines"},         {Mode::verify, "verify"},
};

// Stream tags per realization index.
constexpr std::uint64_t kScenarioTag = 0;
constexpr std::uint64_t kRandomLayoutTag = 1;
constexpr std::uint64_t kOracleTag = 2;

constexpr std::int64_t kVerifyMcSamples = 100000;
constexpr int kVerifyCcGrid = 10000;

std::string num(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string hex(std::uint64_t v) {
  char buf[24];
  std::snprintf(buf, sizeof buf, "0x%016llx", static_cast<unsigned long long>(v));
  return buf;
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += "\"\"";
    else if (c == '\n' || c == '\r') out += ' ';
    else out += c;
  }
  return out + "\"";
}

bool is_pareto(Mode m) { return m == Mode::single_pareto || m == Mode::multi_pareto; }
bool is_single(Mode m) { return m == Mode::single_cc || m == Mode::single_sc || m == Mode::single_pareto; }

SystemConfig single_pa_config(const SystemConfig& cfg) {
  SystemParams p = cfg.params();
  p.n_tx = p.n_rx = 1;
  return SystemConfig(p);
}

ResultRow blank_row(Mode mode, int id) {
  ResultRow r;
  r.realization_id = id;
  r.mode = std::string(mode_name(mode));
  r.sweep_value = kNaN;
  r.alpha = kNaN;
  r.rate = kNaN;
  r.bcrb = kNaN;
  r.oracle_reference = r.oracle_fast = r.oracle_rel_error = kNaN;
  return r;
}

// Runs one scheme; any library error becomes an error row.
void attempt(std::vector<ResultRow>& rows, const ResultRow& base, std::string scheme,
             const std::function<void(ResultRow&)>& fn) {
  ResultRow r = base;
  r.scheme = std::move(scheme);
  const auto t0 = std::chrono::steady_clock::now();
  try {
    fn(r);
  } catch (const std::exception& e) {
    r.error = e.what();
    r.feasible = false;
  }
  r.wall_time_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
  rows.push_back(std::move(r));
}

void fill_2d(ResultRow& r, const TransceiverLayout& l, const Realization& s, const SystemConfig& cfg) {
  r.rate = multicast_rate(s.users, l, cfg);
  r.bcrb = bcrb(l, s.prior, ghq_rule(cfg.params().ghq_nodes), cfg).bcrb;
  r.bcrb_model = "2d";
}

void fill_1d(ResultRow& r, const TransceiverLayout& l, const Realization& s, const SystemConfig& cfg) {
  r.rate = multicast_rate(s.users, l, cfg);
  r.bcrb = bcrb_1d(l.tx_x.front(), l.rx_x.front(), s.prior, ghq_rule(cfg.params().ghq_nodes), cfg);
  r.bcrb_model = "1d";
}

void add_baselines(std::vector<ResultRow>& rows, const ResultRow& base, const Realization& s,
                   const SystemConfig& cfg, int id, Mode mode) {
  auto constraint = [&](ResultRow& r) {
    if (mode == Mode::multi_sc) r.feasible = std::log2(1.0 + cfg.min_snr_linear()) <= r.rate;
    if (mode == Mode::multi_cc) r.feasible = r.bcrb <= cfg.params().max_bcrb;
  };
  attempt(rows, base, "random", [&](ResultRow& r) {
    Rng rng = Rng::stream(cfg.params().rng_seed, static_cast<std::uint64_t>(id), kRandomLayoutTag);
    fill_2d(r, random_layout(cfg, rng), s, cfg);
    constraint(r);
  });
  attempt(rows, base, "centered", [&](ResultRow& r) {
    fill_2d(r, centered_layout(cfg), s, cfg);
    constraint(r);
  });
  attempt(rows, base, "ula-analog", [&](ResultRow& r) {
    auto u = ula_analog_bf(s.users, s.prior, cfg);
    r.rate = u.rate;
    r.bcrb = u.bcrb;
    r.bcrb_model = "2d";
    r.iterations = static_cast<int>(u.ascent_trace.size()) - 1;
    constraint(r);
  });
  attempt(rows, base, "ula-digital", [&](ResultRow& r) {
    auto u = ula_digital_bf(s.users, s.prior, cfg);
    r.rate = u.rate;
    r.bcrb = u.bcrb;
    r.bcrb_model = "2d";
    r.iterations = static_cast<int>(u.ascent_trace.size()) - 1;
    constraint(r);
  });
}

void set_report(ResultRow& r, const oracle::OracleReport& rep, double threshold) {
  std::size_t worst = 0;
  double e = -1.0;
  for (std::size_t i = 0; i < rep.reference_value.size(); ++i) {
    const double ei = std::abs(rep.fast_value[i] - rep.reference_value[i]) /
                      std::max(std::abs(rep.reference_value[i]), 1e-30);
    if (ei > e) e = ei, worst = i;
  }
  r.oracle_reference = rep.reference_value[worst];
  r.oracle_fast = rep.fast_value[worst];
  r.oracle_rel_error = rep.relative_error;
  r.feasible = rep.relative_error <= threshold;
}

void add_verify(std::vector<ResultRow>& rows, const ResultRow& base, const Realization& s, const SystemConfig& cfg,
                int id) {
  const TransceiverLayout layout = default_initial_layout(cfg);
  const auto rule = ghq_rule(cfg.params().ghq_nodes);

  attempt(rows, base, "jacobian-fd", [&](ResultRow& r) {
    const Point2 t{s.prior.mean_x, s.prior.mean_y};
    const auto fast = mean_jacobian(t, pass_aperture(layout, Side::tx, cfg), pass_aperture(layout, Side::rx, cfg), cfg);
    const auto [rx, ry] = oracle::finite_diff_mean_jacobian(t.x, t.y, layout, cfg, 1e-7);
    const double scale = std::max(std::abs(rx), std::abs(ry));
    r.oracle_reference = std::abs(rx);
    r.oracle_fast = std::abs(fast.fx);
    r.oracle_rel_error = std::max(std::abs(fast.fx - rx), std::abs(fast.fy - ry)) / scale;
    r.feasible = r.oracle_rel_error < 1e-5;
  });
  attempt(rows, base, "user-snr-direct", [&](ResultRow& r) {
    std::vector<double> ref, fast;
    for (const auto& u : s.users.positions) {
      ref.push_back(oracle::direct_user_snr(u, layout, cfg));
      fast.push_back(user_snr(u, layout, cfg));
    }
    set_report(r, oracle::make_report(ref, fast, static_cast<std::int64_t>(ref.size())), 1e-10);
  });
  attempt(rows, base, "ofim-ghq", [&](ResultRow& r) {
    const auto ref = oracle::ghq_ofim(layout, s.prior, cfg.params().ghq_nodes, cfg);
    const auto fast = ofim(layout, s.prior, rule, cfg);
    set_report(r, oracle::make_report({ref.xx, ref.xy, ref.yy}, {fast.xx, fast.xy, fast.yy}, rule.size() * rule.size()),
               1e-9);
  });
  attempt(rows, base, "ofim-mc", [&](ResultRow& r) {
    Rng rng = Rng::stream(cfg.params().rng_seed, static_cast<std::uint64_t>(id), kOracleTag);
    const auto mc = oracle::mc_ofim(layout, s.prior, kVerifyMcSamples, rng, cfg);
    const auto fast = ofim(layout, s.prior, rule, cfg);
    const double ref_v[3] = {mc.mean.xx, mc.mean.xy, mc.mean.yy};
    const double se[3] = {mc.stderr_.xx, mc.stderr_.xy, mc.stderr_.yy};
    const double fast_v[3] = {fast.xx, fast.xy, fast.yy};
    set_report(r, oracle::make_report({ref_v, ref_v + 3}, {fast_v, fast_v + 3}, mc.samples), 1.0);
    r.feasible = true;
    for (int k = 0; k < 3; ++k) r.feasible = r.feasible && std::abs(fast_v[k] - ref_v[k]) <= 3.0 * se[k];
  });
  attempt(rows, base, "cc-grid", [&](ResultRow& r) {
    const auto one = single_pa_config(cfg);
    const auto grid = oracle::exhaustive_single_pa_cc(s.users, one, kVerifyCcGrid);
    const auto fast = cc_optimal_tx(s.users, one);
    const double h = one.params().region_x / (kVerifyCcGrid - 1);
    r.oracle_reference = grid.objective;
    r.oracle_fast = fast.objective;
    r.oracle_rel_error = std::abs(fast.objective - grid.objective) / grid.objective;
    const double gap = grid.objective - fast.objective;
    r.feasible = gap >= -1e-12 * grid.objective && gap <= one.params().region_x * h + h * h / 4.0;
  });
}

double percentile(std::vector<double> v, double q) {
  if (v.empty()) return kNaN;
  std::sort(v.begin(), v.end());
  const double pos = q * (v.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, v.size() - 1);
  return v[lo] + (pos - lo) * (v[hi] - v[lo]);
}

double mean_of(const std::vector<double>& v) {
  if (v.empty()) return kNaN;
  double s = 0.0;
  for (double x : v) s += x;
  return s / v.size();
}

std::string csv_line(const ResultRow& r, bool timing) {
  std::string s = std::to_string(r.realization_id) + ',' + r.mode + ',' + csv_field(r.scheme) + ',' +
                  csv_field(r.sweep_var) + ',' + num(r.sweep_value) + ',' + num(r.alpha) + ',' + num(r.rate) + ',' +
                  num(r.bcrb) + ',' + r.bcrb_model + ',' + std::to_string(r.iterations) + ',' +
                  (r.feasible ? "1" : "0") + ',' + num(r.oracle_reference) + ',' + num(r.oracle_fast) + ',' +
                  num(r.oracle_rel_error) + ',' + csv_field(r.error);
  if (timing) s += ',' + num(r.wall_time_ms);
  return s + '\n';
}

std::string csv_preamble(const SystemConfig& cfg, const SweepSpec& spec) {
  std::string s = "# pinch-isac schema " + std::to_string(kSchemaVersion) + " config_hash " +
                  hex(config_hash(cfg.params())) + " seed " + std::to_string(cfg.params().rng_seed) + " mode " +
                  std::string(mode_name(spec.mode)) + '\n';
  auto cols = csv_columns(spec.timing);
  for (std::size_t i = 0; i < cols.size(); ++i) s += (i ? "," : "") + cols[i];
  return s + '\n';
}

std::filesystem::path summary_path(const std::filesystem::path& out) {
  auto p = out;
  p += ".summary.csv";
  return p;
}

void write_summary(const std::vector<ResultRow>& rows, const std::filesystem::path& path) {
  struct Group {
    std::string var, scheme;
    double value, alpha;
    int count = 0, failed = 0, infeasible = 0;
    std::vector<double> rate, bcrb;
  };
  std::vector<Group> groups;
  // Groups keep first-appearance order so the file is deterministic.
  auto key_eq = [](double a, double b) { return (std::isnan(a) && std::isnan(b)) || a == b; };
  for (const auto& r : rows) {
    auto it = std::find_if(groups.begin(), groups.end(), [&](const Group& g) {
      return g.scheme == r.scheme && g.var == r.sweep_var && key_eq(g.value, r.sweep_value) && key_eq(g.alpha, r.alpha);
    });
    if (it == groups.end()) {
      groups.push_back({r.sweep_var, r.scheme, r.sweep_value, r.alpha});
      it = groups.end() - 1;
    }
    ++it->count;
    if (!r.error.empty()) {
      ++it->failed;
      continue;
    }
    if (!r.feasible) ++it->infeasible;
    if (std::isfinite(r.rate)) it->rate.push_back(r.rate);
    if (std::isfinite(r.bcrb)) it->bcrb.push_back(r.bcrb);
  }
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out << "sweep_var,sweep_value,scheme,alpha,count,failed,infeasible,rate_mean,rate_p10,rate_p90,bcrb_mean,bcrb_p10,"
         "bcrb_p90\n";
  for (const auto& g : groups)
    out << csv_field(g.var) << ',' << num(g.value) << ',' << csv_field(g.scheme) << ',' << num(g.alpha) << ','
        << g.count << ',' << g.failed << ',' << g.infeasible << ',' << num(mean_of(g.rate)) << ','
        << num(percentile(g.rate, 0.1)) << ',' << num(percentile(g.rate, 0.9)) << ',' << num(mean_of(g.bcrb)) << ','
        << num(percentile(g.bcrb, 0.1)) << ',' << num(percentile(g.bcrb, 0.9)) << '\n';
  if (!out) throw IoError("write failed: " + path.string());
}

bool integer_key(std::string_view key) {
  for (auto k : {"n_tx", "n_rx", "grid_points", "ghq_nodes", "num_realizations", "num_users"})
    if (key == k) return true;
  return false;
}

nlohmann::json num_json(double v) { return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr); }
double json_num(const nlohmann::json& j) { return j.is_null() ? kNaN : j.get<double>(); }

}  // namespace

std::string_view mode_name(Mode m) {
  for (const auto& [mode, name] : kModes)
    if (mode == m) return name;
  return "unknown";
}

Mode parse_mode(std::string_view name) {
  for (const auto& [mode, n] : kModes)
    if (n == name) return mode;
  throw ParseError("unknown mode '" + std::string(name) + "'");
}

std::vector<double> default_alphas() {
  std::vector<double> a{0.001};
  for (int i = 1; i < 20; ++i) a.push_back(0.05 * i);
  a.push_back(0.999);
  return a;
}

void parse_sweep(std::string_view text, SweepSpec& spec) {
  const auto eq = text.find('=');
  if (eq == std::string_view::npos || eq == 0) throw ParseError("sweep must look like var=v1,v2,...");
  spec.sweep_var = std::string(text.substr(0, eq));
  spec.sweep_values.clear();
  std::stringstream ss{std::string(text.substr(eq + 1))};
  std::string item;
  while (std::getline(ss, item, ',')) {
    std::size_t used = 0;
    double v;
    try {
      v = std::stod(item, &used);
    } catch (const std::exception&) {
      throw ParseError("bad sweep value '" + item + "'");
    }
    while (used < item.size() && std::isspace(static_cast<unsigned char>(item[used]))) ++used;
    if (used != item.size()) throw ParseError("bad sweep value '" + item + "'");
    if (!std::isfinite(v)) throw ValidationError(spec.sweep_var, "sweep values must be finite");
    spec.sweep_values.push_back(v);
  }
  if (spec.sweep_values.empty()) throw ParseError("sweep has no values");
}

bool same_row(const ResultRow& a, const ResultRow& b) {
  auto eq = [](double x, double y) { return (std::isnan(x) && std::isnan(y)) || x == y; };
  return a.realization_id == b.realization_id && a.mode == b.mode && a.scheme == b.scheme &&
         a.sweep_var == b.sweep_var && eq(a.sweep_value, b.sweep_value) && eq(a.alpha, b.alpha) &&
         eq(a.rate, b.rate) && eq(a.bcrb, b.bcrb) && a.bcrb_model == b.bcrb_model && a.iterations == b.iterations &&
         a.feasible == b.feasible && eq(a.oracle_reference, b.oracle_reference) && eq(a.oracle_fast, b.oracle_fast) &&
         eq(a.oracle_rel_error, b.oracle_rel_error) && a.error == b.error && eq(a.wall_time_ms, b.wall_time_ms);
}

std::vector<ResultRow> run_realization(Mode mode, const SystemConfig& cfg, int id, const std::vector<double>& alphas) {
  std::vector<ResultRow> rows;
  const ResultRow base = blank_row(mode, id);
  Realization s;
  try {
    Rng rng = Rng::stream(cfg.params().rng_seed, static_cast<std::uint64_t>(id), kScenarioTag);
    s = sample_realization(cfg, rng);
  } catch (const std::exception& e) {
    ResultRow r = base;
    r.scheme = "scenario";
    r.error = e.what();
    r.feasible = false;
    return {r};
  }

  switch (mode) {
    case Mode::single_cc:
    case Mode::single_sc:
    case Mode::single_pareto: {
      const auto one = single_pa_config(cfg);
      if (mode == Mode::single_cc) {
        attempt(rows, base, "pass-cc", [&](ResultRow& r) {
          const auto cc = cc_optimal_tx(s.users, one);
          r.rate = cc.rate;
        });
        attempt(rows, base, "random", [&](ResultRow& r) {
          Rng rng = Rng::stream(cfg.params().rng_seed, static_cast<std::uint64_t>(id), kRandomLayoutTag);
          r.rate = multicast_rate(s.users, random_layout(one, rng), one);
        });
        attempt(rows, base, "centered", [&](ResultRow& r) { r.rate = multicast_rate(s.users, centered_layout(one), one); });
        attempt(rows, base, "ula-analog", [&](ResultRow& r) { r.rate = ula_analog_bf(s.users, s.prior, cfg).rate; });
        attempt(rows, base, "ula-digital", [&](ResultRow& r) { r.rate = ula_digital_bf(s.users, s.prior, cfg).rate; });
      } else if (mode == Mode::single_sc) {
        attempt(rows, base, "pass-sc", [&](ResultRow& r) { fill_1d(r, sc_optimal_layout(s.prior, one), s, one); });
        attempt(rows, base, "random", [&](ResultRow& r) {
          Rng rng = Rng::stream(cfg.params().rng_seed, static_cast<std::uint64_t>(id), kRandomLayoutTag);
          fill_1d(r, random_layout(one, rng), s, one);
        });
        attempt(rows, base, "centered", [&](ResultRow& r) { fill_1d(r, centered_layout(one), s, one); });
      } else {
        std::vector<SingleParetoPoint> pts;
        std::string err;
        try {
          pts = pareto_single_sweep(alphas, s.users, s.prior, one);
        } catch (const std::exception& e) {
          err = e.what();
        }
        for (std::size_t i = 0; i < alphas.size(); ++i) {
          ResultRow b = base;
          b.alpha = alphas[i];
          attempt(rows, b, "pass-pareto", [&](ResultRow& r) {
            if (!err.empty()) throw Error(err);
            r.rate = pts[i].rate;
            r.bcrb = pts[i].bcrb;
            r.bcrb_model = "1d";
          });
        }
      }
      break;
    }
    case Mode::multi_sc:
      attempt(rows, base, "pass-sc", [&](ResultRow& r) {
        const auto run = sensing_centric_with_recovery(s.users, s.prior, cfg);
        r.rate = run.result.rate;
        r.bcrb = run.result.bfim.bcrb;
        r.bcrb_model = "2d";
        r.iterations = run.result.state.iteration;
        r.feasible = run.feasible;
      });
      add_baselines(rows, base, s, cfg, id, mode);
      break;
    case Mode::multi_cc:
      attempt(rows, base, "pass-cc", [&](ResultRow& r) {
        const auto run = alg2_comm_centric(default_initial_layout(cfg), s.users, s.prior, cfg);
        r.rate = run.ao.rate;
        r.bcrb = run.ao.bfim.bcrb;
        r.bcrb_model = "2d";
        r.iterations = run.al.inner_iter;
        r.feasible = run.ao.state.feasible;
      });
      add_baselines(rows, base, s, cfg, id, mode);
      break;
    case Mode::multi_pareto: {
      std::vector<ParetoPoint> pts;
      std::string err;
      try {
        pts = alg3_pareto_scan(alphas, default_initial_layout(cfg), s.users, s.prior, cfg);
      } catch (const std::exception& e) {
        err = e.what();
      }
      for (std::size_t i = 0; i < alphas.size(); ++i) {
        ResultRow b = base;
        b.alpha = alphas[i];
        attempt(rows, b, "pass-pareto", [&](ResultRow& r) {
          if (!err.empty()) throw Error(err);
          r.rate = pts[i].rate;
          r.bcrb = pts[i].bcrb;
          r.bcrb_model = "2d";
          r.iterations = pts[i].iterations;
        });
      }
      break;
    }
    case Mode::baselines:
      add_baselines(rows, base, s, cfg, id, mode);
      break;
    case Mode::verify:
      add_verify(rows, base, s, cfg, id);
      break;
  }
  return rows;
}

std::vector<std::string> csv_columns(bool timing) {
  std::vector<std::string> c = {"realization_id", "mode",          "scheme",      "sweep_var",
                                "sweep_value",    "alpha",         "rate_bps_hz", "bcrb_m2",
                                "bcrb_model",     "iterations",    "feasible",    "oracle_reference",
                                "oracle_fast",    "oracle_rel_error", "error"};
  if (timing) c.push_back("wall_time_ms");
  return c;
}

SweepOutcome run_sweep(const SweepSpec& spec, const SystemConfig& cfg) {
  if (spec.num_realizations < 1) throw ValidationError("num_realizations", "must be at least 1");
  const bool alpha_sweep = spec.sweep_var == "alpha";
  if (alpha_sweep && !is_pareto(spec.mode)) throw ValidationError("alpha", "only the Pareto modes sweep alpha");
  if (!spec.sweep_var.empty() && spec.sweep_values.empty()) throw ValidationError(spec.sweep_var, "no sweep values");

  // One config per sweep point, all validated before any work starts.
  std::vector<SystemConfig> configs;
  std::vector<double> values;
  std::vector<double> alphas = default_alphas();
  if (alpha_sweep) {
    for (double a : spec.sweep_values)
      if (!(a > 0.0 && a < 1.0)) throw ValidationError("alpha", "values must lie in (0, 1)");
    alphas = spec.sweep_values;
  }
  if (spec.sweep_var.empty() || alpha_sweep) {
    configs.push_back(cfg);
    values.push_back(kNaN);
  } else {
    for (double v : spec.sweep_values) {
      if (!std::isfinite(v)) throw ValidationError(spec.sweep_var, "sweep values must be finite");
      SystemParams p = cfg.params();
      set_param(p, spec.sweep_var, num(v));
      configs.emplace_back(p);
      values.push_back(v);
    }
  }

  std::ofstream csv;
  if (!spec.output_path.empty() && spec.format == Format::csv) {
    csv.open(spec.output_path, std::ios::binary | std::ios::trunc);
    if (!csv) throw IoError("cannot write " + spec.output_path.string());
    csv << csv_preamble(cfg, spec);
    csv.flush();
  }

  const int n_real = spec.num_realizations;
  const std::int64_t total = static_cast<std::int64_t>(configs.size()) * n_real;
  const std::int64_t chunk = std::max(4 * omp_get_max_threads(), 4);
  SweepOutcome out;
  for (std::int64_t start = 0; start < total; start += chunk) {
    const std::int64_t end = std::min(total, start + chunk);
    std::vector<std::vector<ResultRow>> part(end - start);
#pragma omp parallel for schedule(dynamic, 1)
    for (std::int64_t t = start; t < end; ++t) {
      const auto v = static_cast<std::size_t>(t / n_real);
      const int id = static_cast<int>(t % n_real);
      auto rows = run_realization(spec.mode, configs[v], id, alphas);
      for (auto& r : rows) {
        if (alpha_sweep) {
          r.sweep_var = "alpha";
          r.sweep_value = r.alpha;
        } else {
          r.sweep_var = spec.sweep_var;
          r.sweep_value = values[v];
        }
      }
      part[t - start] = std::move(rows);
    }
    // Single writer, realization order.
    for (auto& rows : part)
      for (auto& r : rows) {
        if (!r.error.empty()) ++out.failed_rows;
        if (csv.is_open()) csv << csv_line(r, spec.timing);
        out.rows.push_back(std::move(r));
      }
    if (csv.is_open()) {
      csv.flush();
      if (!csv) throw IoError("write failed: " + spec.output_path.string());
    }
  }

  if (!spec.output_path.empty()) {
    if (spec.format == Format::json) emit_results(out.rows, Format::json, spec.output_path, cfg, spec);
    if (spec.write_summary) write_summary(out.rows, summary_path(spec.output_path));
  }
  return out;
}

void emit_results(const std::vector<ResultRow>& rows, Format format, const std::filesystem::path& path,
                  const SystemConfig& cfg, const SweepSpec& spec) {
  if (rows.empty()) throw ValidationError("rows", "nothing to write");
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  if (format == Format::csv) {
    out << csv_preamble(cfg, spec);
    for (const auto& r : rows) out << csv_line(r, spec.timing);
  } else {
    nlohmann::ordered_json j;
    j["schema_version"] = kSchemaVersion;
    j["tool"] = "pinch-isac";
    j["mode"] = std::string(mode_name(spec.mode));
    j["config_hash"] = hex(config_hash(cfg.params()));
    nlohmann::ordered_json c;
    for (auto key : config_keys()) {
      const double v = get_param(cfg.params(), key);
      if (key == "rng_seed")
        c[std::string(key)] = cfg.params().rng_seed;
      else if (integer_key(key))
        c[std::string(key)] = static_cast<long long>(v);
      else
        c[std::string(key)] = v;
    }
    j["config"] = c;
    j["sweep"] = {{"variable", spec.sweep_var}, {"values", spec.sweep_values}};
    j["num_realizations"] = spec.num_realizations;
    j["bcrb_models"] = {{"1d", "single-PA model with known u^y"}, {"2d", "prior-averaged 2D BCRB"}};
    j["columns"] = csv_columns(true);
    auto& arr = j["rows"] = nlohmann::ordered_json::array();
    for (const auto& r : rows) {
      nlohmann::ordered_json o;
      o["realization_id"] = r.realization_id;
      o["mode"] = r.mode;
      o["scheme"] = r.scheme;
      o["sweep_var"] = r.sweep_var;
      o["sweep_value"] = num_json(r.sweep_value);
      o["alpha"] = num_json(r.alpha);
      o["rate_bps_hz"] = num_json(r.rate);
      o["bcrb_m2"] = num_json(r.bcrb);
      o["bcrb_model"] = r.bcrb_model;
      o["iterations"] = r.iterations;
      o["feasible"] = r.feasible;
      o["oracle_reference"] = num_json(r.oracle_reference);
      o["oracle_fast"] = num_json(r.oracle_fast);
      o["oracle_rel_error"] = num_json(r.oracle_rel_error);
      o["error"] = r.error;
      o["wall_time_ms"] = num_json(r.wall_time_ms);
      arr.push_back(std::move(o));
    }
    out << j.dump(1) << '\n';
  }
  if (!out) throw IoError("write failed: " + path.string());
}

LoadedResults load_results_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read " + path.string());
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("invalid results file: ") + e.what());
  }
  LoadedResults res;
  try {
    res.schema_version = j.at("schema_version").get<int>();
    if (res.schema_version != kSchemaVersion) throw ParseError("unsupported schema version");
    res.config_hash = std::stoull(j.at("config_hash").get<std::string>(), nullptr, 16);
    for (const auto& [key, v] : j.at("config").items()) {
      if (key == "rng_seed")
        res.params.rng_seed = v.get<std::uint64_t>();
      else
        set_param(res.params, key, num(v.get<double>()));
    }
    for (const auto& o : j.at("rows")) {
      ResultRow r;
      r.realization_id = o.at("realization_id").get<int>();
      r.mode = o.at("mode").get<std::string>();
      r.scheme = o.at("scheme").get<std::string>();
      r.sweep_var = o.at("sweep_var").get<std::string>();
      r.sweep_value = json_num(o.at("sweep_value"));
      r.alpha = json_num(o.at("alpha"));
      r.rate = json_num(o.at("rate_bps_hz"));
      r.bcrb = json_num(o.at("bcrb_m2"));
      r.bcrb_model = o.at("bcrb_model").get<std::string>();
      r.iterations = o.at("iterations").get<int>();
      r.feasible = o.at("feasible").get<bool>();
      r.oracle_reference = json_num(o.at("oracle_reference"));
      r.oracle_fast = json_num(o.at("oracle_fast"));
      r.oracle_rel_error = json_num(o.at("oracle_rel_error"));
      r.error = o.at("error").get<std::string>();
      r.wall_time_ms = json_num(o.at("wall_time_ms"));
      res.rows.push_back(std::move(r));
    }
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("invalid results file: ") + e.what());
  }
  return res;
}

int run_cli(int argc, char** argv) {
  CLI::App app{"Pinching-antenna ISAC placement experiments"};
  std::string mode_text, config_path, sweep_text, out_path, format_text = "csv";
  std::optional<int> realizations;
  std::optional<std::uint64_t> seed;
  bool timing = false, verbose = false, no_summary = false;
  app.add_option("mode", mode_text, "single-cc | single-sc | single-pareto | multi-sc | multi-cc | multi-pareto | "
                                    "baselines | verify")
      ->required();
  app.add_option("--config", config_path, "key = value scenario file")->required();
  app.add_option("--sweep", sweep_text, "var=v1,v2,... (config key or alpha)");
  app.add_option("--realizations", realizations, "overrides num_realizations");
  app.add_option("--seed", seed, "overrides rng_seed");
  app.add_option("--out", out_path, "result file")->required();
  app.add_option("--format", format_text, "csv or json")->check(CLI::IsMember({"csv", "json"}));
  app.add_flag("--timing", timing, "add wall_time_ms to the CSV rows");
  app.add_flag("--no-summary", no_summary, "skip the .summary.csv file");
  app.add_flag("--verbose", verbose, "print library warnings");
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  set_warnings_enabled(verbose);
  SweepSpec spec;
  SystemConfig cfg;
  try {
    spec.mode = parse_mode(mode_text);
    SystemParams p = load_config(config_path).params();
    if (realizations) p.num_realizations = *realizations;
    if (seed) p.rng_seed = *seed;
    cfg = SystemConfig(p);
    if (!sweep_text.empty()) parse_sweep(sweep_text, spec);
    spec.num_realizations = p.num_realizations;
    spec.output_path = out_path;
    spec.format = format_text == "json" ? Format::json : Format::csv;
    spec.timing = timing;
    spec.write_summary = !no_summary;
  } catch (const Error& e) {
    std::cerr << "pinch-isac: " << e.what() << '\n';
    return 1;
  }

  try {
    const auto outcome = run_sweep(spec, cfg);
    std::cerr << "pinch-isac: " << outcome.rows.size() << " rows, " << outcome.failed_rows << " failed -> "
              << out_path << '\n';
    return outcome.failed_rows > 0 ? 2 : 0;
  } catch (const Error& e) {
    std::cerr << "pinch-isac: " << e.what() << '\n';
    return 1;
  }
}

}  // namespace pinch
