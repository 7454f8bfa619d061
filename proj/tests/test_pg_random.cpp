#include <doctest.h>

#include <cmath>
#include <vector>

#include "oracles.hpp"
#include "pggp/errors.hpp"
#include "pggp/pg_random.hpp"

using namespace pggp;

namespace {

struct Moments {
  double mean;
  double var;
  double se;
};

Moments draw_moments(double c, std::size_t n, std::uint64_t stream) {
  RngStream rng(42, stream);
  double s = 0, s2 = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double w = sample_pg1(c, rng).value;
    s += w;
    s2 += w * w;
  }
  const double dn = static_cast<double>(n);
  const double mean = s / dn;
  const double var = (s2 - dn * mean * mean) / (dn - 1);
  return {mean, var, std::sqrt(var / dn)};
}

}  // namespace

TEST_CASE("closed-form PG(1,c) mean") {
  CHECK(pg1_mean(0.0) == doctest::Approx(0.25).epsilon(1e-15));
  CHECK(pg1_mean(2.0) == doctest::Approx(std::tanh(1.0) / 4.0).epsilon(1e-15));
  CHECK(pg1_mean(2.0) == doctest::Approx(0.19040).epsilon(1e-4));
  CHECK(pg1_mean(-3.0) == pg1_mean(3.0));
}

TEST_CASE("sum-of-gammas oracle agrees with the closed-form mean") {
  for (double c : {0.0, 2.0}) {
    oracle::TruncatedPgSampler ref(c, 17);
    double s = 0, s2 = 0;
    const int n = 20'000;
    for (int i = 0; i < n; ++i) {
      const double w = ref();
      s += w;
      s2 += w * w;
    }
    const double mean = s / n;
    const double se = std::sqrt((s2 / n - mean * mean) / n);
    CHECK(std::fabs(mean - pg1_mean(c)) < 3.0 * se);
  }
}

TEST_CASE("sampler mean matches closed form within 3 SE") {
  std::uint64_t stream = 0;
  for (double c : {0.0, 0.5, 1.0, 2.0, 4.0}) {
    CAPTURE(c);
    const Moments m = draw_moments(c, 100'000, stream++);
    CHECK(std::fabs(m.mean - pg1_mean(c)) < 3.0 * m.se);
  }
}

TEST_CASE("sampler variance at c = 0 is 1/24") {
  const Moments m = draw_moments(0.0, 100'000, 99);
  CHECK(std::fabs(m.var - 1.0 / 24.0) < 0.1 / 24.0);
}

TEST_CASE("sampler and sum-of-gammas oracle are the same distribution") {
  RngStream rng(5, 0);
  oracle::TruncatedPgSampler ref(1.0, 8);
  std::vector<double> a, b;
  for (int i = 0; i < 10'000; ++i) {
    a.push_back(sample_pg1(1.0, rng).value);
    b.push_back(ref());
  }
  CHECK(oracle::ks_statistic(a, b) < 1.628 * std::sqrt(2.0 / 10'000));
}

TEST_CASE("PG(1,c) and PG(1,-c) are identically distributed") {
  RngStream r1(11, 1), r2(11, 2);
  std::vector<double> a, b;
  for (int i = 0; i < 10'000; ++i) {
    a.push_back(sample_pg1(1.7, r1).value);
    b.push_back(sample_pg1(-1.7, r2).value);
  }
  // 1% critical value of the two-sample KS statistic, n = m = 10^4.
  CHECK(oracle::ks_statistic(a, b) < 1.628 * std::sqrt(2.0 / 10'000));
}

TEST_CASE("draws are positive across a range of tilts") {
  RngStream rng(3, 3);
  for (double c : {0.0, 1e-8, 0.3, 1.56, 5.0, 30.0, -70.0, 200.0, 1e4}) {
    for (int i = 0; i < 2000; ++i) REQUIRE(sample_pg1(c, rng).value > 0.0);
  }
}

TEST_CASE("large tilts keep the right mean") {
  const Moments m = draw_moments(150.0, 50'000, 7);
  CHECK(std::fabs(m.mean - pg1_mean(150.0)) < 3.0 * m.se);
}

TEST_CASE("fixed stream replays bit-exactly") {
  RngStream a(123, 9), b(123, 9), c(123, 10);
  bool any_diff = false;
  for (int i = 0; i < 1000; ++i) {
    const double x = sample_pg1(0.7, a).value;
    REQUIRE(x == sample_pg1(0.7, b).value);
    any_diff = any_diff || x != sample_pg1(0.7, c).value;
  }
  CHECK(any_diff);
}

TEST_CASE("non-finite tilt is rejected") {
  RngStream rng(0, 0);
  CHECK_THROWS_AS(sample_pg1(std::nan(""), rng), InvalidArgument);
  CHECK_THROWS_AS(sample_pg1(INFINITY, rng), InvalidArgument);
}

TEST_CASE("augmentation identity") {
  RngStream rng(1, 1);
  SUBCASE("psi = 0 is exact") {
    const auto r = verify_augmentation_identity(0.0, 1, 10'000, rng);
    CHECK(r.lhs == 0.5);
    CHECK(r.rhs == 0.5);
    CHECK(r.rel_error == 0.0);
  }
  SUBCASE("psi = 1, y = 1") {
    const auto r = verify_augmentation_identity(1.0, 1, 100'000, rng);
    CHECK(r.lhs == doctest::Approx(0.73106).epsilon(1e-5));
    CHECK(r.rel_error < 0.01);
  }
  SUBCASE("psi = -3, y = 0") {
    const auto r = verify_augmentation_identity(-3.0, 0, 100'000, rng);
    CHECK(r.lhs == doctest::Approx(0.95257).epsilon(1e-5));
    CHECK(r.rel_error < 0.01);
  }
  SUBCASE("bad inputs") {
    CHECK_THROWS_AS(verify_augmentation_identity(1.0, 1, 9'999, rng), InvalidArgument);
    CHECK_THROWS_AS(verify_augmentation_identity(1.0, 2, 10'000, rng), InvalidArgument);
    CHECK_THROWS_AS(verify_augmentation_identity(NAN, 1, 10'000, rng), InvalidArgument);
  }
}
