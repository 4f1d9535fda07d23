#pragma once

// Free-space and in-waveguide propagation, per-user SNR and the max-min
// multicast rate.

#include <complex>
#include <cstdint>
#include <span>
#include <vector>

#include "pinch/scenario.hpp"

namespace pinch {

using cplx = std::complex<double>;

/// Radiating elements on one line y = const at height h. For a pinching
/// antenna waveguide the weights are the in-waveguide coefficients; a fixed
/// array carries arbitrary beamforming weights instead.
struct Aperture {
  double y = 0.0;
  std::vector<double> x;
  std::vector<cplx> w;

  std::size_t size() const noexcept { return x.size(); }
};

/// Aperture of the PAs of one waveguide of the layout.
Aperture pass_aperture(const TransceiverLayout& layout, Side side, const SystemConfig& cfg);

/// sqrt(eta) exp(-j k0 r) / r between `point` and the PA at (pa_x, waveguide_y, h).
/// Throws DegenerateGeometry for r < 1e-9 m.
cplx freespace_gain(const Point3& point, double pa_x, double waveguide_y, const SystemConfig& cfg);

/// exp(-j kg pa_x) / sqrt(n_total); the feed sits at x = 0.
cplx inwaveguide_coeff(double pa_x, int n_total, const SystemConfig& cfg);

struct EffectiveChannel {
  cplx value;
  std::vector<cplx> per_element;
};

/// Sum over elements of freespace_gain * weight. Pairwise summation above 64
/// elements.
EffectiveChannel effective_channel(const Point3& point, const Aperture& ap, const SystemConfig& cfg);
cplx effective_gain(const Point3& point, const Aperture& ap, const SystemConfig& cfg);

/// Pairwise (cascade) sum; plain loop for short inputs.
cplx pairwise_sum(std::span<const cplx> v);

double user_snr(const Point2& user, const Aperture& tx, const SystemConfig& cfg);
double user_snr(const Point2& user, const TransceiverLayout& layout, const SystemConfig& cfg);

double rate_from_snrs(std::span<const double> snrs);
double multicast_rate(const UserSet& users, const Aperture& tx, const SystemConfig& cfg);
double multicast_rate(const UserSet& users, const TransceiverLayout& layout, const SystemConfig& cfg);
double min_user_snr(const UserSet& users, const TransceiverLayout& layout, const SystemConfig& cfg);

/// User SNRs as explicit functions of the position of Tx element q with the
/// rest of the layout frozen: |c_k + a_k(x)|^2 = C_k + Q_k(x) + L_k(x).
/// The complement c_k is computed once at construction.
class ElementwiseSnr {
 public:
  ElementwiseSnr(const UserSet& users, const TransceiverLayout& layout, int q, const SystemConfig& cfg);

  struct Terms {
    double constant = 0.0;   // |c_k|^2
    double quadratic = 0.0;  // |a_k(x)|^2
    double linear = 0.0;     // 2 Re{c_k^* a_k(x)}
  };

  Terms terms(int k, double x) const;
  double snr(int k, double x) const;
  /// min_k SNR with element q at x.
  double min_snr(double x) const;

  std::uint64_t evaluations() const noexcept { return evals_; }

 private:
  const SystemConfig* cfg_;
  std::vector<Point2> users_;
  std::vector<cplx> complement_;
  int n_total_;
  double scale_;  // P_t / sigma^2
  mutable std::uint64_t evals_ = 0;
};

}  // namespace pinch
