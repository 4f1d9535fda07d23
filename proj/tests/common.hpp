#pragma once

#include <doctest.h>

#include "pinch/scenario.hpp"

namespace pinch::test {

inline SystemConfig config_with(int n_tx, int n_rx, int users = 4) {
  SystemParams p;
  p.n_tx = n_tx;
  p.n_rx = n_rx;
  p.num_users = users;
  return SystemConfig(p);
}

inline Realization draw(const SystemConfig& cfg, std::uint64_t index) {
  Rng rng = Rng::stream(cfg.params().rng_seed, index);
  return sample_realization(cfg, rng);
}

// Every layout an algorithm hands back must respect the waveguide rules.
inline void require_valid(const TransceiverLayout& l, const SystemConfig& cfg) {
  REQUIRE(l.tx_x.size() == static_cast<std::size_t>(cfg.params().n_tx));
  REQUIRE(l.rx_x.size() == static_cast<std::size_t>(cfg.params().n_rx));
  REQUIRE(validate_layout(l, cfg));
}

}  // namespace pinch::test
