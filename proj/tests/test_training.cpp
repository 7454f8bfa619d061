#include <doctest.h>

#include <cmath>
#include <numbers>
#include <vector>

#include "pggp/dataset.hpp"
#include "pggp/errors.hpp"
#include "pggp/pg_random.hpp"
#include "pggp/prediction.hpp"
#include "pggp/training.hpp"

using namespace pggp;

namespace {

EmbeddingDataset blobs200() { return generate_synthetic(SynthSpec{Generator::Blobs, 200, 2, 1.0, 7}); }

double mean_fresh_log_marginal(const EmbeddingDataset& ds, const KernelSpec& spec) {
  const Matrix x = ds.features();
  const auto y = ds.labels();
  const auto chains = run_chains(x, y, spec, GibbsConfig{30, 10, 555}, "eval");
  std::vector<Vector> ws;
  for (const auto& c : chains) ws.push_back(c.w);
  return estimate_log_marginal(x, y, ws, spec).value;
}

}  // namespace

TEST_CASE("conditional log marginal, one point") {
  Matrix x = Matrix::Zero(1, 1);
  const KernelSpec spec{KernelFamily::Rbf, 1.0, 1.0, 0.0};
  const double v = conditional_log_marginal(x, std::vector<int>{1}, Vector::Ones(1), spec);
  CHECK(v == doctest::Approx(-0.5 * std::log(4.0 * std::numbers::pi) - 0.0625).epsilon(1e-14));
  CHECK(v == doctest::Approx(-1.3280).epsilon(1e-4));
}

TEST_CASE("label flip leaves the value unchanged") {
  RngStream rng(1, 1);
  Matrix x(5, 2);
  for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = rng.normal();
  const std::vector<int> y{1, 0, 0, 1, 1}, flipped{0, 1, 1, 0, 0};
  Vector w(5);
  for (int i = 0; i < 5; ++i) w(i) = sample_pg1(1.0, rng).value;
  const KernelSpec spec = KernelSpec::with_default_jitter(KernelFamily::Rbf, 1.0, 2.0);
  CHECK(conditional_log_marginal(x, y, w, spec) ==
        doctest::Approx(conditional_log_marginal(x, flipped, w, spec)).epsilon(1e-14));
}

TEST_CASE("rejects non-positive w") {
  Matrix x = Matrix::Zero(2, 1);
  Vector w(2);
  w << 1.0, 0.0;
  CHECK_THROWS_AS(conditional_log_marginal(x, std::vector<int>{1, 0}, w, KernelSpec{}),
                  InvalidArgument);
}

TEST_CASE("analytic gradient matches central finite differences") {
  RngStream rng(2024, 0);
  const double h = 1e-5;
  for (int inst = 0; inst < 20; ++inst) {
    const auto n = static_cast<Eigen::Index>(2 + rng.below(15));
    const auto d = static_cast<Eigen::Index>(1 + rng.below(4));
    const auto family = static_cast<KernelFamily>(inst % 3);
    const KernelSpec spec{family, 0.5 + 1.5 * rng.uniform(), 0.5 + 2.5 * rng.uniform(), 1e-6};
    Matrix x(n, d);
    for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = rng.normal();
    std::vector<int> y(static_cast<std::size_t>(n));
    Vector w(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      y[static_cast<std::size_t>(i)] = static_cast<int>(rng.below(2));
      w(i) = sample_pg1(3.0 * rng.normal(), rng).value;
    }
    const std::vector<Vector> ws{w};
    const auto g = grad_log_marginal(x, y, ws, spec);
    auto at = [&](double dl, double ds) {
      KernelSpec s = spec;
      s.length_scale = std::exp(std::log(spec.length_scale) + dl);
      s.output_scale = std::exp(std::log(spec.output_scale) + ds);
      return conditional_log_marginal(x, y, w, s);
    };
    const double fd_l = (at(h, 0) - at(-h, 0)) / (2 * h);
    const double fd_s = (at(0, h) - at(0, -h)) / (2 * h);
    CAPTURE(inst);
    CHECK(std::hypot(g.d_log_length - fd_l, g.d_log_scale - fd_s) /
              std::max(std::hypot(fd_l, fd_s), 1e-8) <
          1e-4);
  }
}

TEST_CASE("estimator averaging") {
  RngStream rng(3, 3);
  Matrix x(6, 2);
  for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = rng.normal();
  const std::vector<int> y{1, 0, 1, 0, 0, 1};
  const KernelSpec spec = KernelSpec::with_default_jitter(KernelFamily::Matern52, 1.2, 3.0);
  Vector w1(6), w2(6);
  for (int i = 0; i < 6; ++i) {
    w1(i) = sample_pg1(0.0, rng).value;
    w2(i) = sample_pg1(2.0, rng).value;
  }
  const std::vector<Vector> one{w1};
  const std::vector<Vector> four{w1, w1, w1, w1};
  const auto g1 = grad_log_marginal(x, y, one, spec);
  const auto g4 = grad_log_marginal(x, y, four, spec);
  CHECK(g1.d_log_length == g4.d_log_length);
  CHECK(g1.d_log_scale == g4.d_log_scale);

  const std::vector<Vector> two{w1, w2};
  const std::vector<Vector> only2{w2};
  const auto g2 = grad_log_marginal(x, y, two, spec);
  const auto gb = grad_log_marginal(x, y, only2, spec);
  CHECK(g2.d_log_scale == doctest::Approx(0.5 * (g1.d_log_scale + gb.d_log_scale)).epsilon(1e-13));
}

TEST_CASE("fit argument checks") {
  const KernelSpec spec;
  TrainConfig cfg;
  std::vector<Record> same_class;
  for (int i = 0; i < 4; ++i) same_class.push_back({"r" + std::to_string(i), "g", 1, Vector::Ones(2) * i});
  CHECK_THROWS_AS(fit(EmbeddingDataset(same_class), spec, cfg), InvalidArgument);
  CHECK_THROWS_AS(fit(EmbeddingDataset(), spec, cfg), InvalidArgument);
  cfg.learning_rate = 0.0;
  same_class[0].label = 0;
  CHECK_THROWS_AS(fit(EmbeddingDataset(same_class), spec, cfg), InvalidArgument);
}

TEST_CASE("frozen kernel on separable blobs") {
  const auto ds = blobs200();
  const KernelSpec spec = KernelSpec::with_default_jitter(KernelFamily::Rbf, 1.0, 8.0);
  TrainConfig cfg;
  cfg.gibbs = GibbsConfig{30, 10, 11};
  cfg.trainable = Trainable::None;
  std::size_t batches = 0;
  const FittedModel model = fit(ds, spec, cfg, [&](const BatchLog& b) {
    ++batches;
    CHECK(std::isfinite(b.log_marginal));
  });
  CHECK(batches == 13);
  CHECK(model.spec == spec);
  CHECK(model.reference_features.rows() == 200);
  CHECK(model.reference_w.size() == 30);
  for (const auto& w : model.reference_w) CHECK((w.array() > 0).all());

  const Predictor predictor(model);
  std::size_t right = 0;
  for (const auto& r : ds.records()) {
    right += (predictor.predict(r.embedding).probability >= 0.5) == (r.label == 1);
  }
  CHECK(static_cast<double>(right) / 200.0 >= 0.95);

  const FittedModel again = fit(ds, spec, cfg);
  CHECK(again.reference_w.size() == model.reference_w.size());
  for (std::size_t i = 0; i < model.reference_w.size(); ++i) {
    CHECK(again.reference_w[i] == model.reference_w[i]);
  }
}

TEST_CASE("learning the kernel does not lower the marginal likelihood") {
  const auto ds = blobs200();
  const KernelSpec spec = KernelSpec::with_default_jitter(KernelFamily::Rbf, 1.0, 8.0);
  TrainConfig cfg;
  cfg.gibbs = GibbsConfig{30, 10, 12};
  cfg.trainable = Trainable::KernelParams;
  cfg.epochs = 3;
  const FittedModel model = fit(ds, spec, cfg);
  CHECK(model.spec != spec);
  CHECK(model.spec.length_scale > 0.0);
  CHECK(model.spec.output_scale > 0.0);
  CHECK(model.spec.jitter == spec.jitter);
  MESSAGE("learned l=" << model.spec.length_scale << " sigma=" << model.spec.output_scale);
  CHECK(mean_fresh_log_marginal(ds, model.spec) >= mean_fresh_log_marginal(ds, spec));
}

TEST_CASE("reference subsampling is bounded and seeded") {
  const auto ds = generate_synthetic(SynthSpec{Generator::TwoMoons, 120, 2, 0.2, 1});
  TrainConfig cfg;
  cfg.gibbs = GibbsConfig{2, 2, 5};
  cfg.reference_size = 50;
  const auto a = fit(ds, KernelSpec{}, cfg);
  const auto b = fit(ds, KernelSpec{}, cfg);
  CHECK(a.reference_features.rows() == 50);
  CHECK(a.reference_features == b.reference_features);
  CHECK(a.reference_labels == b.reference_labels);
}
