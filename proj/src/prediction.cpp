#include "pggp/prediction.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "pggp/errors.hpp"

namespace pggp {

namespace {

constexpr double kMinVariance = 1e-12;

PsdMatrix factor_with_noise(const Matrix& gram, const Vector& noise) {
  Matrix b = gram;
  b.diagonal() += noise;
  return factorize(b, 0.0);
}

void check_query(const Matrix& features, const Vector& x_star) {
  if (x_star.size() != features.cols()) {
    throw SchemaError("prediction: query has dimension " + std::to_string(x_star.size()) +
                      ", model expects " + std::to_string(features.cols()));
  }
}

}  // namespace

QuadratureRule QuadratureRule::gauss_hermite(std::size_t n) {
  if (n < 1) throw InvalidArgument("gauss_hermite: need at least one node");
  // Golub-Welsch on the Jacobi matrix of the physicists' Hermite recurrence.
  Matrix jacobi = Matrix::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  for (Eigen::Index k = 1; k < jacobi.rows(); ++k) {
    jacobi(k, k - 1) = jacobi(k - 1, k) = std::sqrt(0.5 * static_cast<double>(k));
  }
  Eigen::SelfAdjointEigenSolver<Matrix> eig(jacobi);
  const Vector& x = eig.eigenvalues();  // ascending
  const Matrix& v = eig.eigenvectors();

  QuadratureRule rule;
  rule.nodes.resize(n);
  rule.weights.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto e = static_cast<Eigen::Index>(i);
    rule.nodes[i] = x(e);
    rule.weights[i] = std::sqrt(std::numbers::pi) * v(0, e) * v(0, e);
  }
  for (std::size_t i = 0; i < n / 2; ++i) {
    const std::size_t j = n - 1 - i;
    const double node = 0.5 * (rule.nodes[j] - rule.nodes[i]);
    const double weight = 0.5 * (rule.weights[i] + rule.weights[j]);
    rule.nodes[i] = -node;
    rule.nodes[j] = node;
    rule.weights[i] = rule.weights[j] = weight;
  }
  if (n % 2 == 1) rule.nodes[n / 2] = 0.0;
  return rule;
}

double predictive_prob(double mu_star, double sigma_star, const QuadratureRule& rule) {
  if (!(sigma_star >= 0.0) || !std::isfinite(mu_star)) {
    throw InvalidArgument("predictive_prob: need finite mean and non-negative variance");
  }
  // sigmoid(x) = 1/2 + tanh(x/2)/2; pairing +-node makes mu = 0 cancel exactly.
  const double scale = std::sqrt(2.0 * sigma_star);
  const std::size_t n = rule.nodes.size();
  double acc = 0.0;
  for (std::size_t i = 0; i < n / 2; ++i) {
    const double offset = scale * rule.nodes[n - 1 - i];
    acc += rule.weights[i] *
           (std::tanh(0.5 * (mu_star + offset)) + std::tanh(0.5 * (mu_star - offset)));
  }
  if (n % 2 == 1) acc += rule.weights[n / 2] * std::tanh(0.5 * mu_star);
  const double p = 0.5 + 0.5 * acc / std::sqrt(std::numbers::pi);
  return std::clamp(p, 0.0, 1.0);
}

LatentMoments latent_predictive(const FittedModel& model, const Vector& w,
                                const Vector& x_star) {
  check_query(model.reference_features, x_star);
  const auto obs = pseudo_observations(w, model.reference_labels);
  const PsdMatrix factor =
      factor_with_noise(gram_matrix(model.reference_features, model.spec), obs.noise);
  const Vector k_star = kernel_column(model.reference_features, x_star, model.spec);
  const Vector v = factor.solve_lower(k_star);
  const double prior = kernel_value(x_star, x_star, model.spec);
  return {k_star.dot(factor.solve(obs.targets)), std::max(prior - v.squaredNorm(), kMinVariance)};
}

Predictor::Predictor(const FittedModel& model, QuadratureRule rule)
    : spec_(model.spec), features_(model.reference_features), rule_(std::move(rule)) {
  model.validate();
  const Matrix gram = gram_matrix(features_, spec_);
  chains_.reserve(model.reference_w.size());
  for (const Vector& w : model.reference_w) {
    const auto obs = pseudo_observations(w, model.reference_labels);
    ChainCache c{factor_with_noise(gram, obs.noise), Vector()};
    c.alpha = c.factor.solve(obs.targets);
    chains_.push_back(std::move(c));
  }
}

LatentMoments Predictor::latent(std::size_t chain, const Vector& x_star) const {
  check_query(features_, x_star);
  const ChainCache& c = chains_.at(chain);
  const Vector k_star = kernel_column(features_, x_star, spec_);
  const Vector v = c.factor.solve_lower(k_star);
  const double prior = kernel_value(x_star, x_star, spec_);
  return {k_star.dot(c.alpha), std::max(prior - v.squaredNorm(), kMinVariance)};
}

double Predictor::chain_probability(std::size_t chain, const Vector& x_star) const {
  const LatentMoments m = latent(chain, x_star);
  return predictive_prob(m.mu_star, m.sigma_star, rule_);
}

PredictiveResult Predictor::predict(const Vector& x_star) const {
  check_query(features_, x_star);
  const Vector k_star = kernel_column(features_, x_star, spec_);
  const double prior = kernel_value(x_star, x_star, spec_);
  const double n = static_cast<double>(chains_.size());

  double prob = 0.0, mu_sum = 0.0, mu_sq = 0.0, var_sum = 0.0;
  for (const ChainCache& c : chains_) {
    const double mu = k_star.dot(c.alpha);
    const double var = std::max(prior - c.factor.solve_lower(k_star).squaredNorm(), kMinVariance);
    prob += predictive_prob(mu, var, rule_);
    mu_sum += mu;
    mu_sq += mu * mu;
    var_sum += var;
  }
  PredictiveResult r;
  r.mu_star = mu_sum / n;
  r.sigma_star = var_sum / n + std::max(0.0, mu_sq / n - r.mu_star * r.mu_star);
  r.probability = std::clamp(prob / n, 0.0, 1.0);
  return r;
}

PredictiveResult predict(const FittedModel& model, const Vector& x_star) {
  return Predictor(model).predict(x_star);
}

}  // namespace pggp
