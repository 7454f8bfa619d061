#include "pggp/selftest.hpp"

#include <cmath>
#include <numbers>
#include <vector>

#include "pggp/gibbs.hpp"
#include "pggp/pg_random.hpp"
#include "pggp/training.hpp"

namespace pggp {

namespace {

Json check_pg_moments(std::uint64_t seed) {
  constexpr std::size_t kDraws = 100'000;
  Json results = Json::array();
  bool pass = true;
  std::uint64_t idx = 0;
  for (double c : {0.0, 0.5, 1.0, 2.0, 4.0}) {
    RngStream rng(seed, stream_id_for("selftest/pg", idx++));
    double sum = 0.0, sum_sq = 0.0;
    for (std::size_t i = 0; i < kDraws; ++i) {
      const double w = sample_pg1(c, rng).value;
      sum += w;
      sum_sq += w * w;
    }
    const double n = static_cast<double>(kDraws);
    const double mean = sum / n;
    const double var = (sum_sq - n * mean * mean) / (n - 1.0);
    const double se = std::sqrt(var / n);
    const double expected = pg1_mean(c);
    const bool ok_mean = std::fabs(mean - expected) <= 3.0 * se;
    Json r{{"c", c}, {"mean", mean}, {"expected_mean", expected}, {"se", se}, {"pass", ok_mean}};
    if (c == 0.0) {
      const bool ok_var = std::fabs(var - 1.0 / 24.0) <= 0.1 / 24.0;
      r["variance"] = var;
      r["expected_variance"] = 1.0 / 24.0;
      r["pass"] = ok_mean && ok_var;
    }
    pass = pass && r["pass"].get<bool>();
    results.push_back(std::move(r));
  }
  return Json{{"name", "pg_moments"}, {"pass", pass}, {"results", std::move(results)}};
}

Json check_identity(std::uint64_t seed) {
  Json results = Json::array();
  bool pass = true;
  std::uint64_t idx = 0;
  for (double psi : {-3.0, -1.0, 0.0, 1.0, 3.0}) {
    for (int y : {0, 1}) {
      RngStream rng(seed, stream_id_for("selftest/identity", idx++));
      const IdentityReport rep = verify_augmentation_identity(psi, y, 100'000, rng);
      const bool ok = rep.rel_error < 0.01;
      pass = pass && ok;
      results.push_back(Json{{"psi", psi}, {"y", y}, {"lhs", rep.lhs}, {"rhs", rep.rhs},
                             {"rel_error", rep.rel_error}, {"pass", ok}});
    }
  }
  return Json{{"name", "augmentation_identity"}, {"pass", pass}, {"results", std::move(results)}};
}

Json check_gradients(std::uint64_t seed) {
  constexpr int kInstances = 20;
  constexpr double kStep = 1e-5;
  RngStream rng(seed, stream_id_for("selftest/gradient"));
  double worst = 0.0;
  for (int inst = 0; inst < kInstances; ++inst) {
    const auto n = static_cast<Eigen::Index>(2 + rng.below(15));
    const auto d = static_cast<Eigen::Index>(1 + rng.below(3));
    const auto family = static_cast<KernelFamily>(rng.below(3));
    KernelSpec spec{family, 0.5 + 1.5 * rng.uniform(), 0.5 + 2.5 * rng.uniform(), 1e-6};
    Matrix x(n, d);
    for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = rng.normal();
    std::vector<int> y(static_cast<std::size_t>(n));
    Vector w(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      y[static_cast<std::size_t>(i)] = static_cast<int>(rng.below(2));
      w(i) = sample_pg1(2.0 * rng.normal(), rng).value;
    }
    const std::vector<Vector> ws{w};
    const HyperGradient g = grad_log_marginal(x, y, ws, spec);

    auto at = [&](double dl, double ds) {
      KernelSpec s = spec;
      s.length_scale = std::exp(std::log(spec.length_scale) + dl);
      s.output_scale = std::exp(std::log(spec.output_scale) + ds);
      return conditional_log_marginal(x, y, w, s);
    };
    const double fd_l = (at(kStep, 0) - at(-kStep, 0)) / (2 * kStep);
    const double fd_s = (at(0, kStep) - at(0, -kStep)) / (2 * kStep);
    const double err = std::hypot(g.d_log_length - fd_l, g.d_log_scale - fd_s) /
                       std::max(std::hypot(fd_l, fd_s), 1e-8);
    worst = std::max(worst, err);
  }
  return Json{{"name", "gradient_finite_difference"},
              {"pass", worst < 1e-4},
              {"instances", kInstances},
              {"max_rel_error", worst}};
}

// Posterior moments of g for n = 2 by brute-force grid integration of
// N(g | 0, K) prod sigmoid(g_i)^y_i (1 - sigmoid(g_i))^(1 - y_i).
void grid_posterior(const Matrix& k, const std::vector<int>& y, Vector& mean, Vector& var) {
  constexpr double kLo = -8.0, kStep = 0.01;
  constexpr int kPoints = 1601;
  const Matrix prec = k.inverse();
  double z = 0.0, m0 = 0.0, m1 = 0.0, s0 = 0.0, s1 = 0.0;
  for (int a = 0; a < kPoints; ++a) {
    const double g0 = kLo + a * kStep;
    for (int b = 0; b < kPoints; ++b) {
      const double g1 = kLo + b * kStep;
      const double quad = prec(0, 0) * g0 * g0 + 2 * prec(0, 1) * g0 * g1 + prec(1, 1) * g1 * g1;
      const double l0 = y[0] == 1 ? -std::log1p(std::exp(-g0)) : -std::log1p(std::exp(g0));
      const double l1 = y[1] == 1 ? -std::log1p(std::exp(-g1)) : -std::log1p(std::exp(g1));
      const double p = std::exp(-0.5 * quad + l0 + l1);
      z += p;
      m0 += p * g0;
      m1 += p * g1;
      s0 += p * g0 * g0;
      s1 += p * g1 * g1;
    }
  }
  mean = Vector(2);
  var = Vector(2);
  mean << m0 / z, m1 / z;
  var << s0 / z - mean(0) * mean(0), s1 / z - mean(1) * mean(1);
}

Json check_gibbs_stationarity(std::uint64_t seed) {
  Matrix x(2, 1);
  x << 0.0, 0.8;
  const std::vector<int> y{1, 0};
  const KernelSpec spec = KernelSpec::with_default_jitter(KernelFamily::Rbf, 1.0, 1.0);
  Vector ref_mean, ref_var;
  grid_posterior(gram_matrix(x, spec), y, ref_mean, ref_var);

  LongRunOptions opts;
  opts.seed = seed;
  opts.stream_id = stream_id_for("selftest/long-run");
  const LongRunSummary run = run_long_chain(x, y, spec, opts);
  const double err = std::max((run.mean - ref_mean).cwiseAbs().maxCoeff(),
                              (run.variance - ref_var).cwiseAbs().maxCoeff());
  return Json{{"name", "gibbs_vs_quadrature"},
              {"pass", err <= 0.05},
              {"max_abs_error", err},
              {"gibbs_mean", std::vector<double>(run.mean.begin(), run.mean.end())},
              {"gibbs_variance", std::vector<double>(run.variance.begin(), run.variance.end())},
              {"oracle_mean", std::vector<double>(ref_mean.begin(), ref_mean.end())},
              {"oracle_variance", std::vector<double>(ref_var.begin(), ref_var.end())}};
}

}  // namespace

Json run_selftest(const SelftestOptions& opts) {
  Json checks = Json::array();
  checks.push_back(check_pg_moments(opts.seed));
  checks.push_back(check_identity(opts.seed));
  checks.push_back(check_gradients(opts.seed));
  if (!opts.quick) checks.push_back(check_gibbs_stationarity(opts.seed));
  bool pass = true;
  for (const auto& c : checks) pass = pass && c["pass"].get<bool>();
  return Json{{"pass", pass}, {"quick", opts.quick}, {"checks", std::move(checks)}};
}

}  // namespace pggp
