#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "pggp/kernel.hpp"
#include "pggp/rng.hpp"

namespace pggp {

/// Floor applied to PG auxiliaries before any 1/w.
inline constexpr double kMinAuxiliary = 1e-10;

/// One Gibbs chain: latent function values g and PG auxiliaries w over the
/// same n points.
struct GibbsChainState {
  Vector g;
  Vector w;
  std::size_t step = 0;
};

struct GibbsConfig {
  std::size_t n_chains = 30;
  std::size_t n_steps = 10;
  std::uint64_t seed = 0;

  void validate() const;
};

/// kappa_i = y_i - 1/2. Throws unless every label is 0 or 1.
Vector centered_labels(std::span<const int> labels);

/// Gaussian pseudo-observations z = kappa / w and their variances 1 / w
/// (w floored at kMinAuxiliary).
struct PseudoObservations {
  Vector targets;
  Vector noise;
};
PseudoObservations pseudo_observations(const Vector& w, std::span<const int> labels);

/// Resamples every w_i ~ PG(1, g_i). Leaves g alone.
void step_w(GibbsChainState& state, RngStream& rng);

/// Resamples g ~ N(Sigma kappa, Sigma), Sigma = (K^-1 + diag(w))^-1, with
/// zero prior mean. The draw is exact: a prior sample is corrected towards
/// the pseudo-observations through (K + diag(w)^-1)^-1, so only the factors
/// of K and of K + diag(w)^-1 are needed. Leaves w alone.
void step_g(GibbsChainState& state, std::span<const int> labels, const PsdMatrix& k,
            RngStream& rng);

/// Explicit mean and covariance of p(g | y, w), computed as
/// K B^-1 z and K - K B^-1 K with B = K + diag(w)^-1.
struct GaussianConditional {
  Vector mean;
  Matrix covariance;
};
GaussianConditional g_conditional(const Vector& w, std::span<const int> labels,
                                  const PsdMatrix& k);

/// w ~ PG(1, 0) elementwise and g ~ N(0, K).
GibbsChainState init_chain(const PsdMatrix& k, RngStream& rng);

/// Runs cfg.n_chains independent chains for cfg.n_steps sweeps (w then g)
/// from prior initialisation and returns the final states. Chain i draws
/// from RngStream(cfg.seed, stream_id_for(stream_tag, i)); results do not
/// depend on `threads` (0 picks hardware concurrency).
std::vector<GibbsChainState> run_chains(const PsdMatrix& k, std::span<const int> labels,
                                        const GibbsConfig& cfg,
                                        const std::string& stream_tag = "chains",
                                        unsigned threads = 0);
std::vector<GibbsChainState> run_chains(const Matrix& features, std::span<const int> labels,
                                        const KernelSpec& spec, const GibbsConfig& cfg,
                                        const std::string& stream_tag = "chains",
                                        unsigned threads = 0);

/// Diagnostic mode: a single long chain with burn-in and thinning.
struct LongRunOptions {
  std::size_t n_steps = 50'000;
  std::size_t burn_in = 1'000;
  std::size_t thin = 10;
  std::uint64_t seed = 0;
  std::uint64_t stream_id = 0;
};
struct LongRunSummary {
  Vector mean;
  Vector variance;
  std::size_t n_kept = 0;
};
LongRunSummary run_long_chain(const Matrix& features, std::span<const int> labels,
                              const KernelSpec& spec, const LongRunOptions& opts);

}  // namespace pggp
