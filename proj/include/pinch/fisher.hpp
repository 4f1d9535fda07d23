#pragma once

// Prior and observation Fisher information, Gauss-Hermite averaging over the
// target prior, the closed-form 2x2 BCRB and the element-wise decomposition
// used by the placement sweeps.

#include <atomic>
#include <cstdint>
#include <span>
#include <vector>

#include "pinch/channel.hpp"

namespace pinch {

class UnsupportedOrder : public Error {
 public:
  using Error::Error;
};

class DegeneratePrior : public Error {
 public:
  using Error::Error;
};

class IllConditioned : public Error {
 public:
  using Error::Error;
};

class StaleCache : public Error {
 public:
  using Error::Error;
};

enum class Axis { x, y };

struct GhqRule {
  std::vector<double> nodes;
  std::vector<double> weights;
  std::size_t size() const noexcept { return nodes.size(); }
};

/// Gauss-Hermite rule for weight exp(-x^2), 1 <= T <= 64, from the
/// eigen-decomposition of the Jacobi matrix.
GhqRule ghq_rule(int T);

/// Symmetric 2x2 matrix.
struct Sym2 {
  double xx = 0.0;
  double xy = 0.0;
  double yy = 0.0;

  double yx() const noexcept { return xy; }
  double trace() const noexcept { return xx + yy; }
  Sym2& operator+=(const Sym2& o) noexcept {
    xx += o.xx;
    xy += o.xy;
    yy += o.yy;
    return *this;
  }
  friend Sym2 operator+(Sym2 a, const Sym2& b) noexcept { return a += b; }
  friend Sym2 operator*(double s, Sym2 a) noexcept {
    a.xx *= s;
    a.xy *= s;
    a.yy *= s;
    return a;
  }
};

struct Bfim {
  double f_xx = 0.0;
  double f_xy = 0.0;
  double f_yy = 0.0;
  double prior_xx = 0.0;
  double prior_yy = 0.0;
  double bcrb = 0.0;
};

/// Channel sum g and kernel sums S_x, S_y of one aperture seen from a
/// ground target.
struct SideSums {
  cplx g;
  cplx sx;
  cplx sy;
};

/// Unnormalised kernel of element n, K = sqrt(eta) w exp(-j k0 R) chi (1 + j k0 R) / R^3,
/// with chi_x = u^x - x_n and chi_y = u^y - y_p.
cplx derivative_kernel(Axis alpha, Side p, int n, const Point2& target, const TransceiverLayout& layout,
                       const SystemConfig& cfg);

SideSums side_sums(const Point2& target, const Aperture& ap, const SystemConfig& cfg);

/// d mu / d u^alpha with mu = g_r g_t: f = -(g_r S_t + g_t S_r).
cplx jacobian_entry(Axis alpha, const Point2& target, const TransceiverLayout& layout,
                    const SystemConfig& cfg);

struct MeanJacobian {
  cplx mu;
  cplx fx;
  cplx fy;
};
MeanJacobian mean_jacobian(const Point2& target, const Aperture& tx, const Aperture& rx,
                           const SystemConfig& cfg);

/// Prior-averaged observation FIM, scaled by 2 P_t / sigma_s^2. Node
/// integrands are evaluated in parallel and reduced serially in node order,
/// so the result does not depend on the thread count.
Sym2 ofim(const TransceiverLayout& layout, const TargetPrior& prior, const GhqRule& rule,
          const SystemConfig& cfg);
Sym2 ofim(const Aperture& tx, const Aperture& rx, const TargetPrior& prior, const GhqRule& rule,
          const SystemConfig& cfg);
/// Single-threaded reference of ofim().
Sym2 ofim_serial(const Aperture& tx, const Aperture& rx, const TargetPrior& prior, const GhqRule& rule,
                 const SystemConfig& cfg);

/// diag(1/var_x, 1/var_y). Throws DegeneratePrior for non-positive variances.
Sym2 pfim(const TargetPrior& prior);

/// Adds the prior and evaluates trace(F^-1). Throws IllConditioned when the
/// determinant falls below 1e-30.
Bfim assemble_bfim(const Sym2& observation, const TargetPrior& prior);
/// Same value without the Bfim record; +inf when ill-conditioned.
double bcrb_value(const Sym2& observation, const TargetPrior& prior) noexcept;

Bfim bcrb(const TransceiverLayout& layout, const TargetPrior& prior, const GhqRule& rule,
          const SystemConfig& cfg);
Bfim bcrb(const Aperture& tx, const Aperture& rx, const TargetPrior& prior, const GhqRule& rule,
          const SystemConfig& cfg);

/// Fingerprint of everything an ElementwiseFim for (p, q) depends on apart
/// from x_{p,q} itself.
std::uint64_t complement_fingerprint(Side p, int q, const TransceiverLayout& layout,
                                     const TargetPrior& prior, const GhqRule& rule, const SystemConfig& cfg);

/// OFIM as a function of the position x of element (p, q) with every other
/// element frozen: F(x) = Phi + Lambda(x) + Omega(x). The frozen sums at all
/// quadrature nodes are cached once, so each x costs O(T^2).
class ElementwiseFim {
 public:
  ElementwiseFim(Side p, int q, const TransceiverLayout& layout, const TargetPrior& prior, const GhqRule& rule,
                 const SystemConfig& cfg);
  ElementwiseFim(const ElementwiseFim&) = delete;
  ElementwiseFim& operator=(const ElementwiseFim&) = delete;

  struct Parts {
    Sym2 phi;
    Sym2 lambda;
    Sym2 omega;
  };

  Parts parts(double x) const;
  Sym2 evaluate(double x) const;
  /// Throws StaleCache if `current` differs from the cached layout anywhere
  /// other than element (p, q).
  Sym2 evaluate(const TransceiverLayout& current, double x) const;

  std::vector<Sym2> evaluate_many(std::span<const double> xs) const;
  std::vector<Sym2> evaluate_many_serial(std::span<const double> xs) const;

  std::uint64_t fingerprint() const noexcept { return fingerprint_; }
  std::uint64_t node_evaluations() const noexcept { return node_evals_.load(); }

 private:
  struct Node {
    double ux, uy, weight;
    cplx gbar, sbar_x, sbar_y;  // other waveguide
    cplx cx, cy;                // frozen part of f
  };

  Sym2 accumulate(double x, Sym2* lambda, Sym2* omega) const;

  const SystemConfig* cfg_;
  Side side_;
  int q_;
  int n_total_;
  double wy_;
  TargetPrior prior_;
  GhqRule rule_;
  std::vector<Node> nodes_;
  Sym2 phi_;
  std::uint64_t fingerprint_;
  mutable std::atomic<std::uint64_t> node_evals_{0};
};

}  // namespace pinch
