#pragma once

#include <cstdint>

#include "pggp/serialization.hpp"

namespace pggp {

struct SelftestOptions {
  /// Skip the long-run Gibbs-versus-quadrature check.
  bool quick = false;
  std::uint64_t seed = 0;
};

/// Runs the sampler moment checks, the augmentation identity, the
/// hyperparameter gradient check and (unless quick) the n = 2 Gibbs
/// stationarity check. Returns {"pass": bool, "checks": [...]}.
Json run_selftest(const SelftestOptions& opts);

}  // namespace pggp
