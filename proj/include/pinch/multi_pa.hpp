#pragma once

// Multi-PA placement by element-wise alternating optimisation: sensing-centric
// (BCRB under a multicast SNR floor), communications-centric via an augmented
// Lagrangian on the BCRB constraint, and the rate-profile Pareto scan.

#include <cstdint>
#include <span>
#include <vector>

#include "pinch/fisher.hpp"

namespace pinch {

class InfeasibleStart : public Error {
 public:
  using Error::Error;
};

/// Grid points that keep element (p, q) at least Delta_min from its existing
/// neighbours and between them in order, plus the incumbent position.
std::vector<double> local_feasible_set(Side p, int q, const TransceiverLayout& layout, const SystemConfig& cfg);

/// Elements at the centres of N equal cells of [0, D_x] on each waveguide;
/// contiguous at Delta_min around D_x/2 when the cells are too narrow.
TransceiverLayout default_initial_layout(const SystemConfig& cfg);

/// n elements at Delta_min spacing centred on `center`, shifted into [0, D_x].
std::vector<double> spread_around(double center, int n, const SystemConfig& cfg);

struct AoOptions {
  int max_iter = 50;  // sweeps
  double tol = 1e-3;  // relative objective change per sweep
};

struct AoState {
  TransceiverLayout layout;
  std::vector<double> bcrb_trace;     // per accepted update, initial value first
  std::vector<double> rate_trace;
  std::vector<double> utility_trace;  // Pareto scan only
  std::vector<double> min_snr_trace;  // sensing-centric only
  int iteration = 0;
  bool converged = false;
  bool feasible = true;
  std::uint64_t snr_evaluations = 0;
  std::uint64_t fim_node_evaluations = 0;
  std::uint64_t candidates = 0;
  int element_updates = 0;
};

struct AoResult {
  AoState state;
  Bfim bfim;
  double rate = 0.0;
};

/// Cyclic element-wise BCRB descent. Tx candidates must keep every user at
/// or above min_snr. Throws InfeasibleStart if `init` violates the SNR floor.
AoResult alg1_sensing_centric(const TransceiverLayout& init, const UserSet& users, const TargetPrior& prior,
                              const SystemConfig& cfg, const AoOptions& opts = {});

/// Cyclic element-wise multicast-rate ascent over the Tx elements only.
AoResult rate_only_ao(const TransceiverLayout& init, const UserSet& users, const TargetPrior& prior,
                      const SystemConfig& cfg, const AoOptions& opts = {});

struct AlParams {
  double lambda0 = 0.0;
  double rho0 = 1e-4;
  double beta = 2.0;
  double eps_in = 1e-3;
  double eps_out = 1e-3;
  double eps_feas = -1.0;  // negative: 1e-3 * max_bcrb
  int max_inner = 50;
  int max_outer = 20;
};

struct AlState {
  double lambda = 0.0;
  double rho = 0.0;
  double violation = 0.0;
  int outer_iter = 0;
  int inner_iter = 0;
  bool converged = false;
  std::vector<double> lambda_trace;
  std::vector<double> rho_trace;
  std::vector<double> violation_trace;
  std::vector<double> rate_trace;  // per inner pass
};

struct AlResult {
  AoResult ao;
  AlState al;
};

/// Rate maximisation under BCRB <= max_bcrb. When the caps are hit without
/// feasibility the best feasible iterate is returned if there was one;
/// otherwise the last iterate with ao.state.feasible = false.
AlResult alg2_comm_centric(const TransceiverLayout& init, const UserSet& users, const TargetPrior& prior,
                           const SystemConfig& cfg, const AlParams& al = {}, const AoOptions& opts = {});

struct ParetoPoint {
  double alpha = 0.0;
  TransceiverLayout layout;
  double rate = 0.0;
  double bcrb = 0.0;
  double utility = 0.0;
  std::vector<double> utility_trace;
  int iterations = 0;
};

/// Per alpha, element-wise ascent of the rate-profile utility with the 2D
/// BCRB. With `polish`, every point is re-seeded from the best layout found
/// at any other alpha until no point improves.
std::vector<ParetoPoint> alg3_pareto_scan(std::span<const double> alphas, const TransceiverLayout& init,
                                          const UserSet& users, const TargetPrior& prior, const SystemConfig& cfg,
                                          const AoOptions& opts = {}, bool polish = true);

/// Points whose (BCRB, rate) pair is dominated by another point, after
/// removing exact duplicates. Empty for a valid frontier.
std::vector<std::size_t> dominated_points(std::span<const ParetoPoint> points);

struct RecoveredRun {
  AoResult result;
  bool feasible = false;
  int start = 0;  // 0 default init, 1 spread around the C-C location, 2 after rate-only AO
};

/// alg1 from the default layout, falling back to the C-C spread start and
/// then to a rate-only AO warm start. feasible = false if all fail.
RecoveredRun sensing_centric_with_recovery(const UserSet& users, const TargetPrior& prior, const SystemConfig& cfg,
                                           const AoOptions& opts = {});

}  // namespace pinch
