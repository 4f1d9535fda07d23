#pragma once

// System parameters, scenario sampling and layout checks shared by every
// other part of the library.

#include <cstdint>
#include <filesystem>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace pinch {

inline constexpr double kSpeedOfLight = 299792458.0;  // m/s

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ParseError : public Error {
 public:
  using Error::Error;
};

class ValidationError : public Error {
 public:
  ValidationError(std::string field, const std::string& what)
      : Error(field + ": " + what), field_(std::move(field)) {}
  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

class DegenerateGeometry : public Error {
 public:
  using Error::Error;
};

class DoesNotFit : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

/// dBm -> W.
double dbm_to_watts(double dbm);

/// Raw, user-facing parameters. Field comments give the config-file key.
struct SystemParams {
  double carrier_freq_hz = 28e9;  // carrier_freq_hz
  double guided_index = 1.44;     // guided_index (lambda_g = lambda / index)
  double region_x = 10.0;         // region_x_m, waveguide length D_x
  double region_y = 6.0;          // region_y_m
  double height = 5.0;            // height_m
  double y_tx = 3.0;              // y_tx_m
  double y_rx = -3.0;             // y_rx_m
  double tx_power_dbm = 20.0;     // tx_power_dbm
  double noise_user_dbm = -90.0;  // noise_user_dbm
  double noise_sense_dbm = -90.0; // noise_sense_dbm
  int n_tx = 4;                   // n_tx
  int n_rx = 4;                   // n_rx
  int grid_points = 400;          // grid_points (L)
  int ghq_nodes = 10;             // ghq_nodes (T)
  double min_snr_db = 12.0;       // min_snr_db (gamma_c)
  double max_bcrb = 0.1;          // max_bcrb (Gamma_s), m^2
  std::uint64_t rng_seed = 1;     // rng_seed
  int num_realizations = 50;      // num_realizations
  int num_users = 4;              // num_users (K)
};

/// Validated parameters plus the derived physical constants. Immutable.
class SystemConfig {
 public:
  SystemConfig();
  /// Throws ValidationError naming the offending field.
  explicit SystemConfig(const SystemParams& params);

  const SystemParams& params() const noexcept { return p_; }

  double wavelength() const noexcept { return wavelength_; }
  double guided_wavelength() const noexcept { return guided_wavelength_; }
  double k0() const noexcept { return k0_; }
  double kg() const noexcept { return kg_; }
  /// eta = c^2 / (16 pi^2 f_c^2)
  double eta() const noexcept { return eta_; }
  double sqrt_eta() const noexcept { return sqrt_eta_; }
  /// lambda / 2
  double min_spacing() const noexcept { return min_spacing_; }
  double tx_power_w() const noexcept { return tx_power_w_; }
  double noise_user_w() const noexcept { return noise_user_w_; }
  double noise_sense_w() const noexcept { return noise_sense_w_; }
  double min_snr_linear() const noexcept { return min_snr_linear_; }

 private:
  SystemParams p_;
  double wavelength_{}, guided_wavelength_{}, k0_{}, kg_{}, eta_{}, sqrt_eta_{};
  double min_spacing_{}, tx_power_w_{}, noise_user_w_{}, noise_sense_w_{};
  double min_snr_linear_{};
};

/// Config file keys in canonical order.
std::span<const std::string_view> config_keys();

/// Sets one parameter from its textual value. Throws ParseError on an
/// unknown key or an unparsable value.
void set_param(SystemParams& params, std::string_view key, std::string_view value);
/// Numeric value of a parameter by key.
double get_param(const SystemParams& params, std::string_view key);

/// Parses `key = value` lines; `#` starts a comment. Unknown keys and
/// duplicates are parse errors.
SystemParams parse_config_text(std::string_view text);
SystemConfig load_config(const std::filesystem::path& path);

/// Canonical `key = value` rendering, one line per key in config_keys() order.
std::string format_config(const SystemParams& params);
/// FNV-1a of format_config().
std::uint64_t config_hash(const SystemParams& params);

/// 64-bit FNV-1a, used for config hashes and cache fingerprints.
class Fnv1a {
 public:
  void add_bytes(const void* data, std::size_t n) noexcept;
  void add(double v) noexcept { add_bytes(&v, sizeof v); }
  void add(std::uint64_t v) noexcept { add_bytes(&v, sizeof v); }
  void add(std::string_view s) noexcept { add_bytes(s.data(), s.size()); }
  std::uint64_t value() const noexcept { return h_; }

 private:
  std::uint64_t h_ = 14695981039346656037ull;
};

struct Point2 {
  double x = 0.0;
  double y = 0.0;
};

struct Point3 {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;
};

/// Multicast users on the ground plane (z = 0).
struct UserSet {
  std::vector<Point2> positions;
  std::size_t size() const noexcept { return positions.size(); }
};

/// Independent Gaussian prior on the target's planar coordinates.
struct TargetPrior {
  double mean_x = 0.0;
  double mean_y = 0.0;
  double var_x = 1.0;
  double var_y = 1.0;
};

/// Ordered PA x-coordinates on the transmit and receive waveguides.
struct TransceiverLayout {
  std::vector<double> tx_x;
  std::vector<double> rx_x;

  friend bool operator==(const TransceiverLayout&, const TransceiverLayout&) = default;
};

enum class Side { tx, rx };

inline std::vector<double>& positions(TransceiverLayout& l, Side s) {
  return s == Side::tx ? l.tx_x : l.rx_x;
}
inline const std::vector<double>& positions(const TransceiverLayout& l, Side s) {
  return s == Side::tx ? l.tx_x : l.rx_x;
}
inline double waveguide_y(const SystemConfig& cfg, Side s) {
  return s == Side::tx ? cfg.params().y_tx : cfg.params().y_rx;
}

/// Seedable generator. Streams derived from (seed, index, tag) are
/// independent of the order in which they are created.
class Rng {
 public:
  explicit Rng(std::uint64_t seed);
  static Rng stream(std::uint64_t seed, std::uint64_t index, std::uint64_t tag = 0);

  double uniform(double lo, double hi);
  double normal();
  std::mt19937_64& engine() noexcept { return engine_; }

 private:
  explicit Rng(std::seed_seq& seq);
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
};

struct Realization {
  UserSet users;
  TargetPrior prior;
};

inline constexpr double kPriorVarianceFloor = 1e-6;  // m^2

/// K users and a target prior drawn uniformly over the service region.
Realization sample_realization(const SystemConfig& cfg, Rng& rng);

/// Spacing slack for round-off in validate_layout, metres.
inline constexpr double kSpacingTolerance = 1e-12;

bool validate_waveguide(std::span<const double> xs, const SystemConfig& cfg);
bool validate_layout(const TransceiverLayout& layout, const SystemConfig& cfg);

/// L-point discretisation {0, D/(L-1), ..., D} of the waveguide.
std::vector<double> placement_grid(double region_x, int points);

void log_warning(std::string_view message);
/// Suppresses log_warning output (tests, sweeps); returns the previous state.
bool set_warnings_enabled(bool enabled);

}  // namespace pinch
