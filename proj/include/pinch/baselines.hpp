#pragma once

// Comparison schemes: randomly placed and centred PAs, and a fixed
// half-wavelength ULA with analog or digital beamforming. All of them are
// scored with the same rate and BCRB code as the optimised layouts.

#include <vector>

#include "pinch/fisher.hpp"

namespace pinch {

/// n sorted positions with gaps >= Delta_min, uniform over the admissible set.
std::vector<double> random_positions(int n, const SystemConfig& cfg, Rng& rng);
TransceiverLayout random_layout(const SystemConfig& cfg, Rng& rng);

/// n positions centred on D_x / 2 with gaps of exactly Delta_min.
std::vector<double> centered_positions(int n, const SystemConfig& cfg);
TransceiverLayout centered_layout(const SystemConfig& cfg);

struct UlaConfig {
  int n_elements = 6;
  double origin_x = 0.0;
  double spacing = 0.0;  // 0 means Delta_min
};

struct UlaResult {
  double rate = 0.0;
  double bcrb = 0.0;
  std::vector<cplx> comm_weights;
  std::vector<cplx> sense_tx_weights;
  std::vector<cplx> sense_rx_weights;
  std::vector<double> ascent_trace;  // min-user SNR per accepted step
};

/// Element positions of the array.
std::vector<double> ula_positions(const UlaConfig& ula, const SystemConfig& cfg);

/// Unit-modulus weights scaled to unit norm. Communication phases by
/// coordinate ascent on the min-user SNR from the phases of the dominant
/// eigenvector; sensing phases matched to the prior-mean target.
UlaResult ula_analog_bf(const UserSet& users, const TargetPrior& prior, const SystemConfig& cfg,
                        const UlaConfig& ula = {});

/// Unit-norm weights. Communication: best of the dominant eigenvector, each
/// user's MRT vector and the analog solution, refined by coordinate ascent on
/// the min-user SNR. Sensing: MRT / MRC towards the prior-mean target.
UlaResult ula_digital_bf(const UserSet& users, const TargetPrior& prior, const SystemConfig& cfg,
                         const UlaConfig& ula = {});

}  // namespace pinch
