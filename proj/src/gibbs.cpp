#include "pggp/gibbs.hpp"

#include <cmath>

#include "parallel.hpp"
#include "pggp/errors.hpp"
#include "pggp/pg_random.hpp"

namespace pggp {

void GibbsConfig::validate() const {
  if (n_chains < 1) throw InvalidArgument("gibbs: n_chains must be >= 1");
  if (n_steps < 1) throw InvalidArgument("gibbs: n_steps must be >= 1");
}

Vector centered_labels(std::span<const int> labels) {
  Vector kappa(static_cast<Eigen::Index>(labels.size()));
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] != 0 && labels[i] != 1) throw InvalidArgument("labels must be 0 or 1");
    kappa(static_cast<Eigen::Index>(i)) = labels[i] - 0.5;
  }
  return kappa;
}

PseudoObservations pseudo_observations(const Vector& w, std::span<const int> labels) {
  if (static_cast<std::size_t>(w.size()) != labels.size()) {
    throw InvalidArgument("pseudo_observations: |w| != |y|");
  }
  const Vector kappa = centered_labels(labels);
  const Vector floored = w.cwiseMax(kMinAuxiliary);
  return {kappa.cwiseQuotient(floored), floored.cwiseInverse()};
}

void step_w(GibbsChainState& state, RngStream& rng) {
  for (Eigen::Index i = 0; i < state.g.size(); ++i) {
    state.w(i) = sample_pg1(state.g(i), rng).value;
  }
}

void step_g(GibbsChainState& state, std::span<const int> labels, const PsdMatrix& k,
            RngStream& rng) {
  const Eigen::Index n = k.size();
  if (state.w.size() != n || static_cast<Eigen::Index>(labels.size()) != n) {
    throw InvalidArgument("step_g: size mismatch between state, labels and K");
  }
  const auto obs = pseudo_observations(state.w, labels);

  // Pathwise update: f ~ N(0, K), e ~ N(0, W^-1),
  // g = f + K (K + W^-1)^-1 (z - f - e) ~ N(K B^-1 z, K - K B^-1 K).
  const Vector f = mvn_sample(Vector::Zero(n), k, rng);
  Vector e(n);
  for (Eigen::Index i = 0; i < n; ++i) e(i) = rng.normal() * std::sqrt(obs.noise(i));

  Matrix b = k.matrix();
  b.diagonal() += obs.noise;
  const PsdMatrix b_factor = factorize(b, 0.0);
  const Vector residual = obs.targets - f - e;
  state.g = f + k.matrix() * b_factor.solve(residual);
  ++state.step;
}

GaussianConditional g_conditional(const Vector& w, std::span<const int> labels,
                                  const PsdMatrix& k) {
  if (w.size() != k.size()) throw InvalidArgument("g_conditional: |w| != size of K");
  const auto obs = pseudo_observations(w, labels);
  Matrix b = k.matrix();
  b.diagonal() += obs.noise;
  const PsdMatrix b_factor = factorize(b, 0.0);
  const Matrix v = b_factor.solve_lower(k.matrix());
  GaussianConditional c;
  c.mean = k.matrix() * b_factor.solve(obs.targets);
  c.covariance = k.matrix() - v.transpose() * v;
  return c;
}

GibbsChainState init_chain(const PsdMatrix& k, RngStream& rng) {
  const Eigen::Index n = k.size();
  GibbsChainState s;
  s.w.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) s.w(i) = sample_pg1(0.0, rng).value;
  s.g = mvn_sample(Vector::Zero(n), k, rng);
  return s;
}

std::vector<GibbsChainState> run_chains(const PsdMatrix& k, std::span<const int> labels,
                                        const GibbsConfig& cfg, const std::string& stream_tag,
                                        unsigned threads) {
  if (cfg.n_chains < 1) throw InvalidArgument("gibbs: n_chains must be >= 1");
  if (labels.empty()) throw InvalidArgument("run_chains: no data");
  if (static_cast<Eigen::Index>(labels.size()) != k.size()) {
    throw InvalidArgument("run_chains: |y| != size of K");
  }
  std::vector<GibbsChainState> states(cfg.n_chains);
  detail::parallel_for(cfg.n_chains, threads, [&](std::size_t i) {
    RngStream rng(cfg.seed, stream_id_for(stream_tag, i));
    GibbsChainState s = init_chain(k, rng);
    for (std::size_t t = 0; t < cfg.n_steps; ++t) {
      step_w(s, rng);
      step_g(s, labels, k, rng);
    }
    states[i] = std::move(s);
  });
  return states;
}

std::vector<GibbsChainState> run_chains(const Matrix& features, std::span<const int> labels,
                                        const KernelSpec& spec, const GibbsConfig& cfg,
                                        const std::string& stream_tag, unsigned threads) {
  if (features.rows() != static_cast<Eigen::Index>(labels.size())) {
    throw InvalidArgument("run_chains: feature rows != number of labels");
  }
  const PsdMatrix k = factorize(gram_matrix(features, spec), 0.0);
  return run_chains(k, labels, cfg, stream_tag, threads);
}

LongRunSummary run_long_chain(const Matrix& features, std::span<const int> labels,
                              const KernelSpec& spec, const LongRunOptions& opts) {
  if (opts.thin < 1) throw InvalidArgument("run_long_chain: thin must be >= 1");
  if (features.rows() != static_cast<Eigen::Index>(labels.size()) || labels.empty()) {
    throw InvalidArgument("run_long_chain: feature rows != number of labels");
  }
  const PsdMatrix k = factorize(gram_matrix(features, spec), 0.0);
  RngStream rng(opts.seed, opts.stream_id);
  GibbsChainState s = init_chain(k, rng);
  for (std::size_t t = 0; t < opts.burn_in; ++t) {
    step_w(s, rng);
    step_g(s, labels, k, rng);
  }

  const Eigen::Index n = k.size();
  LongRunSummary out{Vector::Zero(n), Vector::Zero(n), 0};
  Vector m2 = Vector::Zero(n);
  for (std::size_t t = 1; t <= opts.n_steps; ++t) {
    step_w(s, rng);
    step_g(s, labels, k, rng);
    if (t % opts.thin != 0) continue;
    // Welford update.
    ++out.n_kept;
    const Vector delta = s.g - out.mean;
    out.mean += delta / static_cast<double>(out.n_kept);
    m2 += delta.cwiseProduct(s.g - out.mean);
  }
  if (out.n_kept > 1) out.variance = m2 / static_cast<double>(out.n_kept - 1);
  return out;
}

}  // namespace pggp
