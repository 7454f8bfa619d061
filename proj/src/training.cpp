#include "pggp/training.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

#include "pggp/errors.hpp"

namespace pggp {

std::string to_string(Trainable t) {
  return t == Trainable::KernelParams ? "kernel_params" : "none";
}

Trainable parse_trainable(const std::string& name) {
  if (name == "kernel_params") return Trainable::KernelParams;
  if (name == "none") return Trainable::None;
  throw InvalidArgument("unknown trainable mode '" + name + "' (expected kernel_params or none)");
}

void TrainConfig::validate() const {
  if (!(std::isfinite(learning_rate) && learning_rate > 0.0)) {
    throw InvalidArgument("train: learning_rate must be positive");
  }
  if (batch_size < 1) throw InvalidArgument("train: batch_size must be >= 1");
  if (reference_size < 1) throw InvalidArgument("train: reference_size must be >= 1");
  gibbs.validate();
}

void FittedModel::validate() const {
  spec.validate();
  const auto m = reference_features.rows();
  if (m < 1) throw InvalidArgument("model: empty reference set");
  if (static_cast<Eigen::Index>(reference_labels.size()) != m) {
    throw InvalidArgument("model: reference labels do not match reference features");
  }
  if (reference_w.empty()) throw InvalidArgument("model: no stored chains");
  for (const auto& w : reference_w) {
    if (w.size() != m) throw InvalidArgument("model: stored w has wrong length");
    if (!(w.array() > 0.0).all() || !w.allFinite()) {
      throw InvalidArgument("model: stored w must be positive");
    }
  }
  for (int y : reference_labels) {
    if (y != 0 && y != 1) throw InvalidArgument("model: labels must be 0 or 1");
  }
}

namespace {

struct SampleTerms {
  double value;
  HyperGradient gradient;
};

SampleTerms sample_terms(const Matrix& gram, const GramGradients* grads,
                         std::span<const int> labels, const Vector& w) {
  const auto obs = pseudo_observations(w, labels);
  Matrix c = gram;
  c.diagonal() += obs.noise;
  const PsdMatrix factor = factorize(c, 0.0);
  const Vector alpha = factor.solve(obs.targets);
  const double n = static_cast<double>(labels.size());

  SampleTerms t{};
  t.value = -0.5 * obs.targets.dot(alpha) - 0.5 * factor.log_determinant() -
            0.5 * n * std::log(2.0 * std::numbers::pi);
  if (grads != nullptr) {
    // d/dtheta = 1/2 tr((alpha alpha^T - C^-1) dK)
    const Matrix c_inv = factor.solve(Matrix(Matrix::Identity(c.rows(), c.cols())));
    const Matrix inner = alpha * alpha.transpose() - c_inv;
    t.gradient.d_log_length = 0.5 * inner.cwiseProduct(grads->d_log_length).sum();
    t.gradient.d_log_scale = 0.5 * inner.cwiseProduct(grads->d_log_scale).sum();
  }
  return t;
}

void check_inputs(const Matrix& features, std::span<const int> labels) {
  if (features.rows() != static_cast<Eigen::Index>(labels.size())) {
    throw InvalidArgument("feature rows != number of labels");
  }
  if (labels.empty()) throw InvalidArgument("no data");
}

}  // namespace

double conditional_log_marginal(const Matrix& features, std::span<const int> labels,
                                const Vector& w, const KernelSpec& spec) {
  check_inputs(features, labels);
  if (!(w.array() > 0.0).all()) {
    throw InvalidArgument("conditional_log_marginal: w must be positive");
  }
  return sample_terms(gram_matrix(features, spec), nullptr, labels, w).value;
}

MarginalEstimate estimate_log_marginal(const Matrix& features, std::span<const int> labels,
                                       std::span<const Vector> w_samples,
                                       const KernelSpec& spec) {
  check_inputs(features, labels);
  if (w_samples.empty()) throw InvalidArgument("estimate_log_marginal: no w samples");
  const Matrix gram = gram_matrix(features, spec);
  const GramGradients grads = gram_gradients(features, spec);
  MarginalEstimate est;
  for (const Vector& w : w_samples) {
    const SampleTerms t = sample_terms(gram, &grads, labels, w);
    est.value += t.value;
    est.gradient.d_log_length += t.gradient.d_log_length;
    est.gradient.d_log_scale += t.gradient.d_log_scale;
  }
  const double inv = 1.0 / static_cast<double>(w_samples.size());
  est.value *= inv;
  est.gradient.d_log_length *= inv;
  est.gradient.d_log_scale *= inv;
  return est;
}

HyperGradient grad_log_marginal(const Matrix& features, std::span<const int> labels,
                                std::span<const Vector> w_samples, const KernelSpec& spec) {
  return estimate_log_marginal(features, labels, w_samples, spec).gradient;
}

namespace {

void shuffle_indices(std::vector<std::size_t>& idx, RngStream& rng) {
  for (std::size_t i = idx.size(); i > 1; --i) {
    std::swap(idx[i - 1], idx[rng.below(i)]);
  }
}

std::vector<Vector> final_w(const std::vector<GibbsChainState>& chains) {
  std::vector<Vector> out;
  out.reserve(chains.size());
  for (const auto& c : chains) out.push_back(c.w);
  return out;
}

}  // namespace

FittedModel fit(const EmbeddingDataset& dataset, const KernelSpec& initial,
                const TrainConfig& cfg, const std::function<void(const BatchLog&)>& on_batch) {
  if (dataset.empty()) throw InvalidArgument("fit: empty dataset");
  const std::size_t n_pos = dataset.count_positive();
  if (n_pos == 0 || n_pos == dataset.size()) {
    throw InvalidArgument("fit: dataset must contain both labels");
  }
  cfg.validate();
  initial.validate();

  const Matrix features = dataset.features();
  const std::vector<int> labels = dataset.labels();
  const std::uint64_t seed = cfg.gibbs.seed;

  KernelSpec spec = initial;
  double log_l = std::log(spec.length_scale);
  double log_s = std::log(spec.output_scale);

  std::vector<std::size_t> order(dataset.size());
  std::size_t global_batch = 0;
  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    std::iota(order.begin(), order.end(), std::size_t{0});
    RngStream shuffle_rng(seed, stream_id_for("train/shuffle", epoch));
    shuffle_indices(order, shuffle_rng);

    for (std::size_t start = 0, b = 0; start < order.size(); start += cfg.batch_size, ++b) {
      const std::size_t stop = std::min(order.size(), start + cfg.batch_size);
      const auto m = static_cast<Eigen::Index>(stop - start);
      Matrix xb(m, features.cols());
      std::vector<int> yb(static_cast<std::size_t>(m));
      for (Eigen::Index i = 0; i < m; ++i) {
        const std::size_t src = order[start + static_cast<std::size_t>(i)];
        xb.row(i) = features.row(static_cast<Eigen::Index>(src));
        yb[static_cast<std::size_t>(i)] = labels[src];
      }

      const auto chains = run_chains(xb, yb, spec, cfg.gibbs,
                                     "train/chains/" + std::to_string(global_batch), cfg.threads);
      const auto ws = final_w(chains);
      const MarginalEstimate est = estimate_log_marginal(xb, yb, ws, spec);

      if (cfg.trainable == Trainable::KernelParams) {
        log_l += cfg.learning_rate * est.gradient.d_log_length;
        log_s += cfg.learning_rate * est.gradient.d_log_scale;
        spec.length_scale = std::exp(log_l);
        spec.output_scale = std::exp(log_s);
      }
      if (on_batch) {
        on_batch(BatchLog{epoch, b, est.value, spec.length_scale, spec.output_scale});
      }
      ++global_batch;
    }
  }

  // Reference set: a seeded uniform subsample, kept in dataset order.
  std::vector<std::size_t> ref(dataset.size());
  std::iota(ref.begin(), ref.end(), std::size_t{0});
  if (ref.size() > cfg.reference_size) {
    RngStream sub_rng(seed, stream_id_for("reference-subsample"));
    for (std::size_t i = 0; i < cfg.reference_size; ++i) {
      std::swap(ref[i], ref[i + sub_rng.below(ref.size() - i)]);
    }
    ref.resize(cfg.reference_size);
    std::sort(ref.begin(), ref.end());
  }

  FittedModel model;
  model.spec = spec;
  model.config = cfg;
  model.reference_features.resize(static_cast<Eigen::Index>(ref.size()), features.cols());
  model.reference_labels.reserve(ref.size());
  for (std::size_t i = 0; i < ref.size(); ++i) {
    model.reference_features.row(static_cast<Eigen::Index>(i)) =
        features.row(static_cast<Eigen::Index>(ref[i]));
    model.reference_labels.push_back(labels[ref[i]]);
  }
  const auto chains = run_chains(model.reference_features, model.reference_labels, spec,
                                 cfg.gibbs, "reference/chains", cfg.threads);
  model.reference_w = final_w(chains);
  return model;
}

}  // namespace pggp
