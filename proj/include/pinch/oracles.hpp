#pragma once

// Slow, independent reference implementations for testing the fast paths.
// Depends on the scenario types only; nothing here calls channel, fisher or
// the design modules.

#include <complex>
#include <cstdint>
#include <vector>

#include "pinch/scenario.hpp"

namespace pinch::oracle {

using cplx = std::complex<double>;

struct Matrix2 {
  double xx = 0.0;
  double xy = 0.0;
  double yy = 0.0;
};

struct OracleReport {
  std::vector<double> reference_value;
  std::vector<double> fast_value;
  double relative_error = 0.0;
  std::int64_t samples_or_gridsize = 0;
};

/// relative_error = max_i |fast_i - ref_i| / max(|ref_i|, 1e-30)
OracleReport make_report(std::vector<double> reference, std::vector<double> fast, std::int64_t n);

/// Gauss-Hermite nodes and weights by Newton iteration on the orthonormal
/// Hermite recurrence.
struct GhRule {
  std::vector<double> x;
  std::vector<double> w;
};
GhRule gauss_hermite(int n);

/// Round-trip echo amplitude mu(u) for a ground target.
cplx echo_mean(double ux, double uy, const TransceiverLayout& layout, const SystemConfig& cfg);
/// Analytic gradient of echo_mean, written independently of the fast path.
std::pair<cplx, cplx> echo_gradient(double ux, double uy, const TransceiverLayout& layout, const SystemConfig& cfg);

/// Central differences of echo_mean in u^x and u^y.
std::pair<cplx, cplx> finite_diff_mean_jacobian(double ux, double uy, const TransceiverLayout& layout,
                                                const SystemConfig& cfg, double step);

/// Direct SNR of one user.
double direct_user_snr(const Point2& user, const TransceiverLayout& layout, const SystemConfig& cfg);

struct McResult {
  Matrix2 mean;
  Matrix2 stderr_;
  std::int64_t samples = 0;
};

/// Monte-Carlo OFIM with antithetic pairs (z, -z). Standard errors from the
/// pair means.
McResult mc_ofim(const TransceiverLayout& layout, const TargetPrior& prior, std::int64_t n_samples, Rng& rng,
                 const SystemConfig& cfg);

/// OFIM by tensor Gauss-Hermite quadrature using this module's own rule.
Matrix2 ghq_ofim(const TransceiverLayout& layout, const TargetPrior& prior, int nodes, const SystemConfig& cfg);

/// trace of (OFIM + prior FIM)^-1
double bcrb_of(const Matrix2& ofim, const TargetPrior& prior);

struct GridMin {
  double x = 0.0;
  double objective = 0.0;
};
/// Grid minimiser of max_k distance^2 from a single Tx PA.
GridMin exhaustive_single_pa_cc(const UserSet& users, const SystemConfig& cfg, int grid_n);

struct PairResult {
  double x_t = 0.0;
  double x_r = 0.0;
  double bcrb = 0.0;
  std::vector<double> grid;
  std::vector<double> table;  // grid_n^2, row-major in x_t
};
/// Global grid minimiser of the 2D BCRB for one PA per waveguide.
PairResult exhaustive_pair_search(const UserSet& users, const TargetPrior& prior, const SystemConfig& cfg,
                                  int grid_n);

/// Prior-averaged x-information for the same-side pair x_t = x_r = x, target
/// on the mid line with known u^y.
double same_side_fisher_xx(double x, const TargetPrior& prior, int nodes, const SystemConfig& cfg);

}  // namespace pinch::oracle
