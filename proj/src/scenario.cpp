#include "pinch/scenario.hpp"

#include <array>
#include <atomic>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <set>
#include <sstream>

namespace pinch {

double dbm_to_watts(double dbm) { return std::pow(10.0, (dbm - 30.0) / 10.0); }

namespace {

void require(bool ok, const char* field, const std::string& what) {
  if (!ok) throw ValidationError(field, what);
}

bool fits(int n, double spacing, double length) {
  return static_cast<double>(n - 1) * spacing <= length + kSpacingTolerance;
}

constexpr std::array<std::string_view, 19> kKeys = {
    "carrier_freq_hz", "guided_index",   "region_x_m",      "region_y_m",
    "height_m",        "y_tx_m",         "y_rx_m",          "tx_power_dbm",
    "noise_user_dbm",  "noise_sense_dbm", "n_tx",           "n_rx",
    "grid_points",     "ghq_nodes",      "min_snr_db",      "max_bcrb",
    "rng_seed",        "num_realizations", "num_users"};

std::string_view trim(std::string_view s) {
  const auto ws = " \t\r\n";
  auto b = s.find_first_not_of(ws);
  if (b == std::string_view::npos) return {};
  auto e = s.find_last_not_of(ws);
  return s.substr(b, e - b + 1);
}

template <class T>
T parse_number(std::string_view key, std::string_view text) {
  T v{};
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc{} || ptr != text.data() + text.size())
    throw ParseError("bad value for " + std::string(key) + ": '" + std::string(text) + "'");
  return v;
}

int parse_int(std::string_view key, std::string_view text) {
  // Accept "400" and also "4e2"-style integral doubles.
  int i{};
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), i);
  if (ec == std::errc{} && ptr == text.data() + text.size()) return i;
  double d = parse_number<double>(key, text);
  if (d != std::floor(d) || std::abs(d) > 2e9)
    throw ParseError(std::string(key) + " must be an integer");
  return static_cast<int>(d);
}

std::string fmt_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::atomic<bool> g_warnings{true};

}  // namespace

SystemConfig::SystemConfig() : SystemConfig(SystemParams{}) {}

SystemConfig::SystemConfig(const SystemParams& p) : p_(p) {
  require(std::isfinite(p.carrier_freq_hz) && p.carrier_freq_hz > 0, "carrier_freq_hz", "must be > 0");
  require(std::isfinite(p.guided_index) && p.guided_index > 0, "guided_index", "must be > 0");
  require(std::isfinite(p.region_x) && p.region_x > 0, "region_x_m", "must be > 0");
  require(std::isfinite(p.region_y) && p.region_y > 0, "region_y_m", "must be > 0");
  require(std::isfinite(p.height) && p.height > 0, "height_m", "must be > 0");
  require(std::isfinite(p.y_tx), "y_tx_m", "must be finite");
  require(std::isfinite(p.y_rx), "y_rx_m", "must be finite");
  require(std::isfinite(p.tx_power_dbm), "tx_power_dbm", "must be finite");
  require(std::isfinite(p.noise_user_dbm), "noise_user_dbm", "must be finite");
  require(std::isfinite(p.noise_sense_dbm), "noise_sense_dbm", "must be finite");
  require(std::isfinite(p.min_snr_db), "min_snr_db", "must be finite");
  require(std::isfinite(p.max_bcrb) && p.max_bcrb > 0, "max_bcrb", "must be > 0");
  require(p.n_tx >= 1, "n_tx", "must be >= 1");
  require(p.n_rx >= 1, "n_rx", "must be >= 1");
  require(p.grid_points >= 2, "grid_points", "must be >= 2");
  require(p.ghq_nodes >= 1, "ghq_nodes", "must be >= 1");
  require(p.num_realizations >= 1, "num_realizations", "must be >= 1");
  require(p.num_users >= 1, "num_users", "must be >= 1");

  wavelength_ = kSpeedOfLight / p.carrier_freq_hz;
  guided_wavelength_ = wavelength_ / p.guided_index;
  k0_ = 2.0 * std::numbers::pi / wavelength_;
  kg_ = 2.0 * std::numbers::pi / guided_wavelength_;
  eta_ = kSpeedOfLight * kSpeedOfLight /
         (16.0 * std::numbers::pi * std::numbers::pi * p.carrier_freq_hz * p.carrier_freq_hz);
  sqrt_eta_ = std::sqrt(eta_);
  min_spacing_ = wavelength_ / 2.0;
  require(fits(p.n_tx, min_spacing_, p.region_x), "n_tx", "layout does not fit on the waveguide");
  require(fits(p.n_rx, min_spacing_, p.region_x), "n_rx", "layout does not fit on the waveguide");

  tx_power_w_ = dbm_to_watts(p.tx_power_dbm);
  noise_user_w_ = dbm_to_watts(p.noise_user_dbm);
  noise_sense_w_ = dbm_to_watts(p.noise_sense_dbm);
  min_snr_linear_ = std::pow(10.0, p.min_snr_db / 10.0);
}

std::span<const std::string_view> config_keys() { return kKeys; }

void set_param(SystemParams& p, std::string_view key, std::string_view value) {
  value = trim(value);
  auto d = [&] { return parse_number<double>(key, value); };
  if (key == "carrier_freq_hz") p.carrier_freq_hz = d();
  else if (key == "guided_index") p.guided_index = d();
  else if (key == "region_x_m") p.region_x = d();
  else if (key == "region_y_m") p.region_y = d();
  else if (key == "height_m") p.height = d();
  else if (key == "y_tx_m") p.y_tx = d();
  else if (key == "y_rx_m") p.y_rx = d();
  else if (key == "tx_power_dbm") p.tx_power_dbm = d();
  else if (key == "noise_user_dbm") p.noise_user_dbm = d();
  else if (key == "noise_sense_dbm") p.noise_sense_dbm = d();
  else if (key == "n_tx") p.n_tx = parse_int(key, value);
  else if (key == "n_rx") p.n_rx = parse_int(key, value);
  else if (key == "grid_points") p.grid_points = parse_int(key, value);
  else if (key == "ghq_nodes") p.ghq_nodes = parse_int(key, value);
  else if (key == "min_snr_db") p.min_snr_db = d();
  else if (key == "max_bcrb") p.max_bcrb = d();
  else if (key == "rng_seed") p.rng_seed = parse_number<std::uint64_t>(key, value);
  else if (key == "num_realizations") p.num_realizations = parse_int(key, value);
  else if (key == "num_users") p.num_users = parse_int(key, value);
  else throw ParseError("unknown config key '" + std::string(key) + "'");
}

double get_param(const SystemParams& p, std::string_view key) {
  if (key == "carrier_freq_hz") return p.carrier_freq_hz;
  if (key == "guided_index") return p.guided_index;
  if (key == "region_x_m") return p.region_x;
  if (key == "region_y_m") return p.region_y;
  if (key == "height_m") return p.height;
  if (key == "y_tx_m") return p.y_tx;
  if (key == "y_rx_m") return p.y_rx;
  if (key == "tx_power_dbm") return p.tx_power_dbm;
  if (key == "noise_user_dbm") return p.noise_user_dbm;
  if (key == "noise_sense_dbm") return p.noise_sense_dbm;
  if (key == "n_tx") return p.n_tx;
  if (key == "n_rx") return p.n_rx;
  if (key == "grid_points") return p.grid_points;
  if (key == "ghq_nodes") return p.ghq_nodes;
  if (key == "min_snr_db") return p.min_snr_db;
  if (key == "max_bcrb") return p.max_bcrb;
  if (key == "rng_seed") return static_cast<double>(p.rng_seed);
  if (key == "num_realizations") return p.num_realizations;
  if (key == "num_users") return p.num_users;
  throw ParseError("unknown config key '" + std::string(key) + "'");
}

SystemParams parse_config_text(std::string_view text) {
  SystemParams p;
  std::set<std::string, std::less<>> seen;
  int line_no = 0;
  while (!text.empty()) {
    auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    auto eq = line.find('=');
    if (eq == std::string_view::npos)
      throw ParseError("line " + std::to_string(line_no) + ": expected 'key = value'");
    auto key = trim(line.substr(0, eq));
    auto value = trim(line.substr(eq + 1));
    if (key.empty() || value.empty())
      throw ParseError("line " + std::to_string(line_no) + ": empty key or value");
    if (!seen.insert(std::string(key)).second)
      throw ParseError("line " + std::to_string(line_no) + ": duplicate key '" + std::string(key) + "'");
    try {
      set_param(p, key, value);
    } catch (const ParseError& e) {
      throw ParseError("line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return p;
}

SystemConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open config file " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return SystemConfig(parse_config_text(ss.str()));
}

std::string format_config(const SystemParams& p) {
  std::string out;
  for (auto key : kKeys) {
    out += key;
    out += " = ";
    if (key == "rng_seed")
      out += std::to_string(p.rng_seed);
    else
      out += fmt_double(get_param(p, key));
    out += '\n';
  }
  return out;
}

std::uint64_t config_hash(const SystemParams& p) {
  Fnv1a h;
  h.add(format_config(p));
  return h.value();
}

void Fnv1a::add_bytes(const void* data, std::size_t n) noexcept {
  auto* b = static_cast<const unsigned char*>(data);
  for (std::size_t i = 0; i < n; ++i) {
    h_ ^= b[i];
    h_ *= 1099511628211ull;
  }
}

Rng::Rng(std::uint64_t seed) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)};
  engine_.seed(seq);
}

Rng::Rng(std::seed_seq& seq) : engine_(seq) {}

Rng Rng::stream(std::uint64_t seed, std::uint64_t index, std::uint64_t tag) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32),
                    static_cast<std::uint32_t>(tag), static_cast<std::uint32_t>(tag >> 32)};
  return Rng(seq);
}

double Rng::uniform(double lo, double hi) {
  // 53-bit mantissa draw; std::uniform_real_distribution is not portable
  // across standard libraries.
  double u = static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  return lo + (hi - lo) * u;
}

double Rng::normal() { return normal_(engine_); }

Realization sample_realization(const SystemConfig& cfg, Rng& rng) {
  const auto& p = cfg.params();
  Realization r;
  r.users.positions.reserve(p.num_users);
  for (int k = 0; k < p.num_users; ++k) {
    double x = rng.uniform(0.0, p.region_x);
    double y = rng.uniform(-p.region_y / 2, p.region_y / 2);
    r.users.positions.push_back({x, y});
  }
  r.prior.mean_x = rng.uniform(0.0, p.region_x);
  r.prior.mean_y = rng.uniform(-p.region_y / 2, p.region_y / 2);
  do r.prior.var_x = rng.uniform(0.0, 1.0);
  while (r.prior.var_x < kPriorVarianceFloor);
  do r.prior.var_y = rng.uniform(0.0, 2.0);
  while (r.prior.var_y < kPriorVarianceFloor);
  return r;
}

bool validate_waveguide(std::span<const double> xs, const SystemConfig& cfg) {
  const double dx = cfg.params().region_x;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (!std::isfinite(xs[i]) || xs[i] < 0.0 || xs[i] > dx) return false;
    if (i > 0 && xs[i] - xs[i - 1] < cfg.min_spacing() - kSpacingTolerance) return false;
  }
  return true;
}

bool validate_layout(const TransceiverLayout& layout, const SystemConfig& cfg) {
  return !layout.tx_x.empty() && !layout.rx_x.empty() &&
         validate_waveguide(layout.tx_x, cfg) && validate_waveguide(layout.rx_x, cfg);
}

std::vector<double> placement_grid(double region_x, int points) {
  if (points < 2) throw ValidationError("grid_points", "must be >= 2");
  std::vector<double> g(points);
  const double step = region_x / (points - 1);
  for (int i = 0; i < points; ++i) g[i] = i * step;
  g.back() = region_x;
  return g;
}

void log_warning(std::string_view message) {
  if (g_warnings.load(std::memory_order_relaxed))
    std::fprintf(stderr, "warning: %.*s\n", static_cast<int>(message.size()), message.data());
}

bool set_warnings_enabled(bool enabled) { return g_warnings.exchange(enabled); }

}  // namespace pinch
