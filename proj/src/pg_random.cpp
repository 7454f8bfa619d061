#include "pggp/pg_random.hpp"

#include <atomic>
#include <cmath>
#include <numbers>

#include "pggp/errors.hpp"

namespace pggp {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kTrunc = 0.64;
constexpr long kMaxIterations = 1'000'000;

std::atomic<double> g_fault_bias{0.0};

// log Phi(x) for the standard normal CDF; asymptotic expansion deep in the
// left tail where erfc underflows.
double log_norm_cdf(double x) {
  if (x > -30.0) return std::log(0.5 * std::erfc(-x / std::numbers::sqrt2));
  const double x2 = x * x;
  const double series = 1.0 - 1.0 / x2 + 3.0 / (x2 * x2) - 15.0 / (x2 * x2 * x2);
  return -0.5 * x2 - std::log(-x) - 0.5 * std::log(2.0 * kPi) + std::log(series);
}

// n-th coefficient of the alternating series for the J*(1, z) density,
// piecewise around the truncation point. Evaluated in log space.
double series_coef(int n, double x) {
  const double k = (n + 0.5) * kPi;
  if (x > kTrunc) {
    return std::exp(std::log(k) - 0.5 * k * k * x);
  }
  if (x > 0.0) {
    const double h = n + 0.5;
    return std::exp(-1.5 * (std::log(0.5 * kPi) + std::log(x)) + std::log(k) - 2.0 * h * h / x);
  }
  return 0.0;
}

// Probability of proposing from the exponential tail (right of kTrunc).
double tail_mass(double z) {
  const double fz = 0.125 * kPi * kPi + 0.5 * z * z;
  const double rt = std::sqrt(1.0 / kTrunc);
  const double b = rt * (kTrunc * z - 1.0);
  const double a = -rt * (kTrunc * z + 1.0);
  const double x0 = std::log(fz) + fz * kTrunc;
  const double xb = x0 - z + log_norm_cdf(b);
  const double xa = x0 + z + log_norm_cdf(a);
  const double q_over_p = 4.0 / kPi * (std::exp(xb) + std::exp(xa));
  return 1.0 / (1.0 + q_over_p);
}

// Inverse-Gaussian(1/z, 1) truncated to (0, kTrunc].
double truncated_inverse_gaussian(double z, RngStream& rng, long& budget) {
  double x = kTrunc + 1.0;
  if (1.0 / kTrunc > z) {
    // Mean exceeds the truncation point: reject from the z = 0 law.
    double alpha = 0.0;
    while (rng.uniform() > alpha) {
      double e1 = rng.exponential();
      double e2 = rng.exponential();
      while (e1 * e1 > 2.0 * e2 / kTrunc) {
        if (--budget <= 0) throw InternalError("PG sampler: iteration cap exceeded");
        e1 = rng.exponential();
        e2 = rng.exponential();
      }
      x = 1.0 + e1 * kTrunc;
      x = kTrunc / (x * x);
      alpha = std::exp(-0.5 * z * z * x);
      if (--budget <= 0) throw InternalError("PG sampler: iteration cap exceeded");
    }
  } else {
    const double mu = 1.0 / z;
    while (x > kTrunc) {
      const double y = rng.normal();
      const double half_mu = 0.5 * mu;
      const double mu_y = mu * y * y;
      x = mu + half_mu * mu_y - half_mu * std::sqrt(4.0 * mu_y + mu_y * mu_y);
      if (rng.uniform() > mu / (mu + x)) x = mu * mu / x;
      if (--budget <= 0) throw InternalError("PG sampler: iteration cap exceeded");
    }
  }
  return x;
}

}  // namespace

PgDraw sample_pg1(double c, RngStream& rng) {
  if (!std::isfinite(c)) throw InvalidArgument("sample_pg1: tilt parameter must be finite");

  // PG(1, c) = J*(1, |c|/2) / 4.
  const double z = 0.5 * std::fabs(c);
  const double fz = 0.125 * kPi * kPi + 0.5 * z * z;
  const double p_tail = tail_mass(z);
  long budget = kMaxIterations;

  while (budget-- > 0) {
    double x;
    if (rng.uniform() < p_tail) {
      x = kTrunc + rng.exponential() / fz;
    } else {
      x = truncated_inverse_gaussian(z, rng, budget);
    }

    double s = series_coef(0, x);
    const double u = rng.uniform() * s;
    for (int n = 1;; ++n) {
      if (--budget <= 0) throw InternalError("PG sampler: iteration cap exceeded");
      if (n % 2 == 1) {
        s -= series_coef(n, x);
        if (u <= s) {
          const double w = 0.25 * x + g_fault_bias.load(std::memory_order_relaxed);
          return PgDraw{w};
        }
      } else {
        s += series_coef(n, x);
        if (u > s) break;
      }
    }
  }
  throw InternalError("PG sampler: iteration cap exceeded");
}

double pg1_mean(double c) {
  const double a = std::fabs(c);
  if (a < 1e-6) return 0.25 - a * a / 96.0;
  return std::tanh(0.5 * a) / (2.0 * a);
}

IdentityReport verify_augmentation_identity(double psi, int y, std::size_t n_samples,
                                            RngStream& rng) {
  if (!std::isfinite(psi)) throw InvalidArgument("verify_augmentation_identity: psi must be finite");
  if (y != 0 && y != 1) throw InvalidArgument("verify_augmentation_identity: label must be 0 or 1");
  if (n_samples < 10'000) {
    throw InvalidArgument("verify_augmentation_identity: need at least 10^4 samples");
  }

  // sigmoid(psi)^y (1 - sigmoid(psi))^(1-y) = sigmoid((2y - 1) psi)
  const double signed_psi = y == 1 ? psi : -psi;
  const double lhs = 1.0 / (1.0 + std::exp(-signed_psi));

  double acc = 0.0;
  for (std::size_t i = 0; i < n_samples; ++i) {
    const double w = sample_pg1(0.0, rng).value;
    acc += std::exp(-0.5 * w * psi * psi);
  }
  const double rhs = 0.5 * std::exp((y - 0.5) * psi) * (acc / static_cast<double>(n_samples));
  return IdentityReport{lhs, rhs, std::fabs(rhs - lhs) / lhs};
}

namespace testing {
void set_pg_fault_bias(double bias) { g_fault_bias.store(bias, std::memory_order_relaxed); }
double pg_fault_bias() { return g_fault_bias.load(std::memory_order_relaxed); }
}  // namespace testing

}  // namespace pggp
