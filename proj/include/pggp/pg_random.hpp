#pragma once

#include <cstddef>

#include "pggp/rng.hpp"

namespace pggp {

/// One draw of the Polya-Gamma auxiliary variable. Always strictly positive.
struct PgDraw {
  double value;
};

/// Exact draw from PG(1, c) using the alternating-series rejection sampler
/// (inverse-Gaussian proposal left of t = 0.64, exponential tail right of it).
/// Throws InvalidArgument for non-finite c.
PgDraw sample_pg1(double c, RngStream& rng);

/// Closed-form mean of PG(1, c): tanh(c/2) / (2c), with limit 1/4 at c = 0.
double pg1_mean(double c);

struct IdentityReport {
  double lhs;
  double rhs;
  double rel_error;
};

/// Monte-Carlo check of the logistic augmentation identity
///   sigmoid(psi)^y (1 - sigmoid(psi))^(1-y)
///     = 1/2 exp((y - 1/2) psi) E_{w ~ PG(1,0)}[exp(-w psi^2 / 2)].
/// Requires n_samples >= 10^4 and y in {0, 1}.
IdentityReport verify_augmentation_identity(double psi, int y, std::size_t n_samples,
                                            RngStream& rng);

namespace testing {
/// Adds a constant to every PG draw. Sensitivity canary for the self-test;
/// never set outside tests.
void set_pg_fault_bias(double bias);
double pg_fault_bias();
}  // namespace testing

}  // namespace pggp
