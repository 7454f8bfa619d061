#pragma once

#include <cstddef>
#include <vector>

#include "pggp/kernel.hpp"
#include "pggp/training.hpp"

namespace pggp {

/// Nodes used when no rule is given. 20 nodes miss 1e-4 accuracy once the
/// latent variance reaches ~16; 48 keep the error near 1e-5 on that range.
inline constexpr std::size_t kDefaultQuadratureNodes = 48;

/// Gauss-Hermite rule for integrals against exp(-x^2). Nodes are exactly
/// antisymmetric (node[n-1-i] == -node[i]) and weights symmetric.
struct QuadratureRule {
  std::vector<double> nodes;
  std::vector<double> weights;

  static QuadratureRule gauss_hermite(std::size_t n = kDefaultQuadratureNodes);
};

struct LatentMoments {
  double mu_star = 0.0;
  double sigma_star = 0.0;
};

struct PredictiveResult {
  double mu_star = 0.0;
  double sigma_star = 0.0;
  double probability = 0.5;
};

/// Latent predictive mean and variance at x_star given one chain's w:
///   mu*    = K*^T (K + W^-1)^-1 W^-1 kappa
///   Sigma* = K** - K*^T (K + W^-1)^-1 K*
LatentMoments latent_predictive(const FittedModel& model, const Vector& w, const Vector& x_star);

/// E[sigmoid(g)] for g ~ N(mu_star, sigma_star) by Gauss-Hermite quadrature.
/// Returns exactly 0.5 when mu_star == 0.
double predictive_prob(double mu_star, double sigma_star, const QuadratureRule& rule);

/// Caches one factorization of K + W_n^-1 per stored chain so repeated
/// queries cost O(m^2) per chain.
class Predictor {
 public:
  explicit Predictor(const FittedModel& model,
                     QuadratureRule rule = QuadratureRule::gauss_hermite());

  std::size_t n_chains() const { return chains_.size(); }
  Eigen::Index dim() const { return features_.cols(); }

  LatentMoments latent(std::size_t chain, const Vector& x_star) const;
  double chain_probability(std::size_t chain, const Vector& x_star) const;
  /// Probability averaged over chains. mu_star is the chain mean of mu*,
  /// sigma_star the chain mean of Sigma* plus the spread of mu* across chains.
  PredictiveResult predict(const Vector& x_star) const;

 private:
  struct ChainCache {
    PsdMatrix factor;
    Vector alpha;
  };
  KernelSpec spec_;
  Matrix features_;
  std::vector<ChainCache> chains_;
  QuadratureRule rule_;
};

PredictiveResult predict(const FittedModel& model, const Vector& x_star);

}  // namespace pggp
