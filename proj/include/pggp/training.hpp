#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "pggp/dataset.hpp"
#include "pggp/gibbs.hpp"
#include "pggp/kernel.hpp"

namespace pggp {

enum class Trainable { KernelParams, None };

std::string to_string(Trainable t);
Trainable parse_trainable(const std::string& name);

struct TrainConfig {
  double learning_rate = 3e-3;
  std::size_t epochs = 1;
  std::size_t batch_size = 16;
  GibbsConfig gibbs;
  Trainable trainable = Trainable::None;
  /// Upper bound on the number of training points kept for prediction.
  std::size_t reference_size = 512;
  /// Worker threads for chains; 0 means hardware concurrency.
  unsigned threads = 0;

  void validate() const;
};

/// Everything prediction needs: the kernel, a reference subset of the
/// training data and the final w of every chain run on that subset.
struct FittedModel {
  KernelSpec spec;
  Matrix reference_features;
  std::vector<int> reference_labels;
  std::vector<Vector> reference_w;
  TrainConfig config;

  std::uint64_t seed() const { return config.gibbs.seed; }
  /// Throws InvalidArgument on inconsistent sizes or non-positive w.
  void validate() const;
};

/// log N(z | 0, K + diag(w)^-1) with z = (y - 1/2) / w: the part of
/// log p(y | x, w) that depends on the kernel hyperparameters.
double conditional_log_marginal(const Matrix& features, std::span<const int> labels,
                                const Vector& w, const KernelSpec& spec);

/// Gradient with respect to (log length_scale, log output_scale).
struct HyperGradient {
  double d_log_length = 0.0;
  double d_log_scale = 0.0;
};

/// Fisher-identity estimator: the mean over w_samples of the gradient of
/// conditional_log_marginal. The jitter is held fixed.
HyperGradient grad_log_marginal(const Matrix& features, std::span<const int> labels,
                                std::span<const Vector> w_samples, const KernelSpec& spec);

/// Value and gradient in one factorization per sample, averaged.
struct MarginalEstimate {
  double value = 0.0;
  HyperGradient gradient;
};
MarginalEstimate estimate_log_marginal(const Matrix& features, std::span<const int> labels,
                                       std::span<const Vector> w_samples,
                                       const KernelSpec& spec);

/// Emitted after every minibatch.
struct BatchLog {
  std::size_t epoch = 0;
  std::size_t batch = 0;
  double log_marginal = 0.0;
  double length_scale = 0.0;
  double output_scale = 0.0;
};

/// Minibatch stochastic gradient ascent on (log l, log sigma) with fresh
/// Gibbs chains per batch, followed by a final Gibbs pass on the reference
/// subset. With Trainable::None the kernel is never touched.
FittedModel fit(const EmbeddingDataset& dataset, const KernelSpec& initial,
                const TrainConfig& cfg,
                const std::function<void(const BatchLog&)>& on_batch = {});

}  // namespace pggp
