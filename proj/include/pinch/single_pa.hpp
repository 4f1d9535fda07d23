#pragma once

// Single-PA designs: min-max distance transmit placement, the symmetric
// sensing layout with its closed-form displacement, and the rate-profile
// tradeoff in the known-u^y model.

#include <span>
#include <vector>

#include "pinch/fisher.hpp"

namespace pinch {

/// h^2 + (y_t - y_k)^2, the squared distance from user k to the Tx line.
double user_offset_sq(const Point2& user, const SystemConfig& cfg);

/// max_k (x - x_k)^2 + Delta_k^2
double cc_objective(const UserSet& users, double x, const SystemConfig& cfg);

/// {0, D_x}, the user x-coordinates and every in-range pairwise
/// equal-distance point, sorted and de-duplicated.
std::vector<double> cc_candidate_set(const UserSet& users, const SystemConfig& cfg);

struct CcResult {
  double x_t = 0.0;
  double rate = 0.0;
  double objective = 0.0;
};

/// Minimiser of cc_objective over the candidate set; ties go to the smaller x.
CcResult cc_optimal_tx(const UserSet& users, const SystemConfig& cfg);

/// sqrt(h^2 + ((y_r - y_t)/2)^2)
double sensing_offset(const SystemConfig& cfg);

/// Conditional Fisher information on u^x for a target at
/// (u_x, (y_t + y_r)/2, 0) with one PA per waveguide, including the
/// cos(k0 (R_t - R_r)) cross factor.
double conditional_fisher_1d(double u_x, double x_t, double x_r, const SystemConfig& cfg);

/// Prior average of conditional_fisher_1d over u^x ~ N(mean_x, var_x).
double averaged_fisher_1d(double x_t, double x_r, const TargetPrior& prior, const GhqRule& rule,
                          const SystemConfig& cfg);
/// 1 / (averaged F_xx + 1/var_x)
double bcrb_1d(double x_t, double x_r, const TargetPrior& prior, const GhqRule& rule, const SystemConfig& cfg);

struct Displacement {
  double exact = 0.0;
  double approx = 0.0;
};
Displacement sc_displacement(const SystemConfig& cfg);

/// Relative residual of -2k^2 s^2 - (k^2 D^2 + 3) s + (k^2 D^4 + D^2) at s = d^2.
double displacement_residual(double d, const SystemConfig& cfg);

/// Both PAs at mean_x - d*, clamped into [0, D_x] with a warning.
TransceiverLayout sc_optimal_layout(const TargetPrior& prior, const SystemConfig& cfg);

/// Mirror rule 2 mean_x - x_t, clamped into [0, D_x].
double rx_best_response(double x_t, const TargetPrior& prior, const SystemConfig& cfg);

/// Grid minimiser of bcrb_1d(x_t, .); ties go to the smaller x.
double rx_best_response_exact(double x_t, const TargetPrior& prior, const SystemConfig& cfg);

inline constexpr double kProfileDelta = 1e-6;

/// min{rate / (alpha + delta), sensing_rate / (1 - alpha + delta)}
double rate_profile_utility(double rate, double sensing_rate, double alpha);
/// Sum of the two scaled terms; used to break utility ties.
double rate_profile_sum(double rate, double sensing_rate, double alpha);

enum class RxPolicy {
  exact,   // grid minimiser of the 1D BCRB given x_t
  mirror,  // rx_best_response
};

struct SingleParetoPoint {
  double alpha = 0.0;
  double x_t = 0.0;
  double x_r = 0.0;
  double utility = 0.0;
  double rate = 0.0;
  double sensing_rate = 0.0;
  double bcrb = 0.0;
};

SingleParetoPoint pareto_single(double alpha, const UserSet& users, const TargetPrior& prior,
                                const SystemConfig& cfg, RxPolicy policy = RxPolicy::exact);
std::vector<SingleParetoPoint> pareto_single_sweep(std::span<const double> alphas, const UserSet& users,
                                                   const TargetPrior& prior, const SystemConfig& cfg,
                                                   RxPolicy policy = RxPolicy::exact);

/// 1 / (R_t^2 R_r^2) with lateral offsets m + eps and m - eps.
double path_loss_factor(double m, double eps, const SystemConfig& cfg);

}  // namespace pinch
