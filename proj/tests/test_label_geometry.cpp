#include <cmath>
#include <doctest.h>

#include "labeldyn/errors.hpp"
#include "labeldyn/label_geometry.hpp"
#include "labeldyn/rng.hpp"

using namespace labeldyn;

namespace {
LabelDistribution random_simplex(Rng& rng, int n) {
  return LabelDistribution(rng.dirichlet(n, 1.0));
}
}  // namespace

TEST_CASE("label distribution construction") {
  CHECK_THROWS_AS(LabelDistribution({0.5, 0.6}), InvalidLabel);       // mass 1.1
  CHECK_THROWS_AS(LabelDistribution({-0.2, 1.2}), InvalidLabel);      // negative weight
  const LabelDistribution drifted({0.5 + 4e-10, 0.5});                // renormalized
  CHECK(drifted[0] + drifted[1] == doctest::Approx(1.0).epsilon(1e-15));
  const LabelDistribution dust({1.0, -5e-11});                        // clamped to zero
  CHECK(dust[1] == 0.0);
}

TEST_CASE("label metric validation") {
  CHECK_NOTHROW(LabelMetricSpace::discrete(4));
  // triangle violation: d(0,2) = 5 > d(0,1) + d(1,2) = 2
  CHECK_THROWS_AS(LabelMetricSpace(3, {0, 1, 5, 1, 0, 1, 5, 1, 0}), ContractViolation);
  CHECK_THROWS_AS(LabelMetricSpace(2, {0, 1, 2, 0}), ContractViolation);  // asymmetric
  CHECK_THROWS_AS(LabelMetricSpace(2, {0, 0, 0, 0}), ContractViolation);  // zero off-diagonal
}

TEST_CASE("tv norm examples") {
  CHECK(tv_norm(SignedLabelMeasure({0.0, 0.0})) == 0.0);
  CHECK(tv_norm(SignedLabelMeasure({1.0, -1.0})) == 2.0);
  CHECK(tv_norm(SignedLabelMeasure({0.5, -0.5, 0.0})) == 1.0);
}

TEST_CASE("bl norm examples") {
  const auto discrete2 = LabelMetricSpace::discrete(2);
  CHECK(bl_norm(SignedLabelMeasure({0.0, 0.0}), discrete2) == doctest::Approx(0.0));
  // optimal phi = (1/3, -1/3): value 2/3
  CHECK(bl_norm(SignedLabelMeasure({1.0, -1.0}), discrete2) ==
        doctest::Approx(2.0 / 3.0).epsilon(1e-12));
  // a probability: phi = 1 is feasible and optimal
  CHECK(bl_norm(SignedLabelMeasure({1.0, 0.0}), discrete2) == doctest::Approx(1.0));
  CHECK_THROWS_AS(bl_norm(SignedLabelMeasure({1.0, 0.0, 0.0}), discrete2), ContractViolation);
}

TEST_CASE("bl norm closed form on two labels matches the LP") {
  Rng rng(11);
  for (int trial = 0; trial < 400; ++trial) {
    const double d = rng.uniform(0.05, 4.0);
    const LabelMetricSpace space(2, {0.0, d, d, 0.0});
    const double m = rng.uniform(-2.0, 2.0);
    const double lp_value = bl_norm(SignedLabelMeasure({m, -m}), space);
    CHECK(lp_value == doctest::Approx(bl_norm_two_labels_zero_sum(m, d)).epsilon(1e-10));
  }
}

TEST_CASE("bl norm of probabilities is at most one") {
  Rng rng(12);
  for (int n = 2; n <= 6; ++n) {
    const auto space = LabelMetricSpace::discrete(n);
    for (int trial = 0; trial < 50; ++trial) {
      const LabelDistribution lam = random_simplex(rng, n);
      const double v = bl_norm(SignedLabelMeasure(lam.weights()), space);
      CHECK(v <= 1.0 + 1e-10);
      CHECK(v == doctest::Approx(1.0).epsilon(1e-9));  // mass 1 attains the cap
    }
  }
}

TEST_CASE("hellinger examples") {
  const LabelDistribution a({1.0, 0.0}), b({0.0, 1.0}), u({0.5, 0.5});
  CHECK(hellinger(a, a) == 0.0);
  CHECK(hellinger(a, b) == doctest::Approx(std::sqrt(2.0)));
  CHECK(hellinger(u, a) == doctest::Approx(0.76536686473017945));  // sqrt((sqrt(.5)-1)^2 + .5)
}

TEST_CASE("spherical hellinger examples") {
  const LabelDistribution a({1.0, 0.0}), b({0.0, 1.0}), u({0.5, 0.5});
  CHECK(spherical_hellinger(a, a) == 0.0);
  CHECK(spherical_hellinger(a, b) == doctest::Approx(M_PI / 2));
  CHECK(spherical_hellinger(u, a) == doctest::Approx(M_PI / 4));
}

TEST_CASE("norm chain bl <= tv <= 2H <= 2HS on random pairs") {
  Rng rng(13);
  for (int n = 2; n <= 6; ++n) {
    const auto space = LabelMetricSpace::discrete(n);
    for (int trial = 0; trial < 200; ++trial) {
      const LabelDistribution a = random_simplex(rng, n);
      const LabelDistribution b = random_simplex(rng, n);
      const double bl = bl_norm(a - b, space);
      const double tv = tv_norm(a - b);
      const double h = hellinger(a, b);
      const double hs = spherical_hellinger(a, b);
      CHECK(bl <= tv + 1e-9);
      CHECK(tv <= 2.0 * h + 1e-9);
      CHECK(h <= hs + 1e-9);
    }
  }
}

TEST_CASE("hellinger metric properties and algebraic identity") {
  Rng rng(14);
  for (int trial = 0; trial < 300; ++trial) {
    const int n = 2 + trial % 4;
    const LabelDistribution a = random_simplex(rng, n);
    const LabelDistribution b = random_simplex(rng, n);
    const LabelDistribution c = random_simplex(rng, n);

    CHECK(hellinger(a, b) == doctest::Approx(hellinger(b, a)).epsilon(1e-14));
    CHECK(spherical_hellinger(a, b) ==
          doctest::Approx(spherical_hellinger(b, a)).epsilon(1e-14));
    CHECK(hellinger(a, c) <= hellinger(a, b) + hellinger(b, c) + 1e-12);
    CHECK(spherical_hellinger(a, c) <=
          spherical_hellinger(a, b) + spherical_hellinger(b, c) + 1e-12);

    double bc = 0.0;
    for (int h = 0; h < n; ++h) bc += std::sqrt(a[h] * b[h]);
    const double h2 = hellinger(a, b) * hellinger(a, b);
    CHECK(h2 == doctest::Approx(2.0 * (1.0 - bc)).epsilon(1e-11));
  }
}

TEST_CASE("bl norm with a non-discrete metric") {
  // wider metric loosens the Lipschitz constraint, raising the norm
  const LabelMetricSpace wide(2, {0.0, 3.0, 3.0, 0.0});
  const LabelMetricSpace narrow(2, {0.0, 0.5, 0.5, 0.0});
  const SignedLabelMeasure mu({1.0, -1.0});
  CHECK(bl_norm(mu, wide) > bl_norm(mu, narrow));
  CHECK(bl_norm(mu, wide) == doctest::Approx(2.0 * 3.0 / 5.0));
  CHECK(bl_norm(mu, narrow) == doctest::Approx(2.0 * 0.5 / 2.5));
}
