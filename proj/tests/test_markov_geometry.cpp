#include <cmath>
#include <doctest.h>

#include "labeldyn/errors.hpp"
#include "labeldyn/markov_geometry.hpp"
#include "labeldyn/numerics.hpp"
#include "labeldyn/rng.hpp"
#include "oracles.hpp"

using namespace labeldyn;

namespace {

Eigen::MatrixXd two_state(double a, double b) {
  Eigen::MatrixXd Q(2, 2);
  Q << -a, b, a, -b;
  return Q;
}

LabelDistribution interior_sample(Rng& rng, int n, double margin) {
  auto w = rng.dirichlet(n, 1.0);
  for (auto& v : w) v = margin + (1.0 - margin * n) * v;
  return LabelDistribution(w);
}

}  // namespace

TEST_CASE("stationary distribution examples") {
  Eigen::MatrixXd sym(3, 3);
  sym << -2, 1, 1, 1, -2, 1, 1, 1, -2;
  const auto uniform = stationary_distribution(sym);
  for (int h = 0; h < 3; ++h) CHECK(uniform[h] == doctest::Approx(1.0 / 3.0).epsilon(1e-12));

  const auto sigma = stationary_distribution(two_state(1.0, 2.0));
  CHECK(sigma[0] == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
  CHECK(sigma[1] == doctest::Approx(1.0 / 3.0).epsilon(1e-12));

  // birth-death chain with up rates (1,1) and down rates (2,2): sigma ~ (4,2,1)
  Eigen::MatrixXd tri(3, 3);
  tri << -1, 2, 0, 1, -3, 2, 0, 1, -2;
  const auto ladder = stationary_distribution(tri);
  CHECK(ladder[0] == doctest::Approx(4.0 / 7.0).epsilon(1e-12));
  CHECK(ladder[1] == doctest::Approx(2.0 / 7.0).epsilon(1e-12));
  CHECK(ladder[2] == doctest::Approx(1.0 / 7.0).epsilon(1e-12));
}

TEST_CASE("stationary distribution rejects reducible and non-reversible chains") {
  Eigen::MatrixXd blockdiag(4, 4);
  blockdiag.setZero();
  blockdiag.block(0, 0, 2, 2) = two_state(1.0, 1.0);
  blockdiag.block(2, 2, 2, 2) = two_state(2.0, 2.0);
  CHECK_THROWS_AS(stationary_distribution(blockdiag), ReducibleChain);

  // three-cycle with asymmetric rates: uniform is stationary, balance fails
  Eigen::MatrixXd cycle(3, 3);
  cycle << -3, 2, 1, 1, -3, 2, 2, 1, -3;
  CHECK_THROWS_AS(stationary_distribution(cycle), NotReversible);
}

TEST_CASE("logarithmic mean examples and stability") {
  CHECK(log_mean(1.0, 1.0) == 1.0);
  CHECK(log_mean(4.0, 1.0) == doctest::Approx(3.0 / std::log(4.0)).epsilon(1e-14));
  CHECK(log_mean(0.7, 0.0) == 0.0);
  CHECK(log_mean(0.0, 0.3) == 0.0);
  CHECK_THROWS_AS(log_mean(-1.0, 2.0), ContractViolation);

  // series branch agrees with the direct quotient just above the switch
  for (double gap : {1e-5, 1e-6, 1e-7, 1e-9}) {
    const double a = 0.8, b = a * (1.0 + gap);
    const double direct = (a - b) / (std::log(a) - std::log(b));
    CHECK(log_mean(a, b) == doctest::Approx(direct).epsilon(1e-12));
    CHECK(log_mean(a, b) >= std::min(a, b));
    CHECK(log_mean(a, b) <= std::max(a, b));
  }

  // partial derivative: finite differences away from the diagonal, 1/2 on it
  for (double a : {0.4, 1.3}) {
    for (double b : {0.2, 0.9}) {
      const double h = 1e-7;
      const double fd = (log_mean(a + h, b) - log_mean(a - h, b)) / (2.0 * h);
      CHECK(log_mean_partial_a(a, b) == doctest::Approx(fd).epsilon(1e-5));
    }
  }
  CHECK(log_mean_partial_a(0.5, 0.5) == doctest::Approx(0.5).epsilon(1e-10));
}

TEST_CASE("entropy examples") {
  const MarkovGeometry geom(two_state(1.0, 2.0));  // sigma = (2/3, 1/3)
  CHECK(entropy(LabelDistribution({2.0 / 3.0, 1.0 / 3.0}), geom) ==
        doctest::Approx(0.0).epsilon(1e-12));
  CHECK(entropy(LabelDistribution({1.0, 0.0}), geom) ==
        doctest::Approx(std::log(1.5)).epsilon(1e-12));
  CHECK(entropy(LabelDistribution({0.5, 0.5}), geom) ==
        doctest::Approx(0.5 * std::log(0.75) + 0.5 * std::log(1.5)).epsilon(1e-12));
}

TEST_CASE("onsager matrix examples") {
  const MarkovGeometry geom(two_state(1.0, 2.0));
  const double w = geom.Q()(0, 1) * geom.sigma()[1];  // 2/3

  // at sigma both ratios are 1, so Phi = 1
  const Eigen::MatrixXd K = onsager_matrix(geom.sigma(), geom);
  Eigen::Vector2d mu(1.0, -1.0);
  CHECK((K * mu - 2.0 * w * mu).cwiseAbs().maxCoeff() <= 1e-13);

  // a vertex kills the logarithmic mean
  const Eigen::MatrixXd K0 = onsager_matrix(LabelDistribution({1.0, 0.0}), geom);
  CHECK(K0.cwiseAbs().maxCoeff() <= 1e-15);

  // constants always lie in the kernel
  Rng rng(61);
  Eigen::MatrixXd tri(3, 3);
  tri << -1, 2, 0, 1, -3, 2, 0, 1, -2;
  const MarkovGeometry geom3(tri);
  for (int trial = 0; trial < 20; ++trial) {
    const Eigen::MatrixXd K3 = onsager_matrix(LabelDistribution(rng.dirichlet(3, 0.7)), geom3);
    CHECK((K3 * Eigen::Vector3d::Ones()).cwiseAbs().maxCoeff() <= 1e-14);
    CHECK((K3 - K3.transpose()).cwiseAbs().maxCoeff() <= 1e-14);
  }
}

TEST_CASE("metric tensor inverts the onsager matrix on the hyperplane") {
  const MarkovGeometry geom(two_state(1.0, 2.0));
  const double w = geom.Q()(0, 1) * geom.sigma()[1];
  const Eigen::MatrixXd G = metric_tensor(geom.sigma(), geom);
  Eigen::Vector2d mu(1.0, -1.0);
  CHECK((G * mu - mu / (2.0 * w)).cwiseAbs().maxCoeff() <= 1e-12);

  Rng rng(62);
  for (int n : {2, 3, 4}) {
    Eigen::MatrixXd Q(n, n);
    Q.setZero();
    for (int h = 0; h + 1 < n; ++h) {  // random birth-death chain is reversible
      const double up = rng.uniform(0.5, 2.0), down = rng.uniform(0.5, 2.0);
      Q(h + 1, h) += up;
      Q(h, h) -= up;
      Q(h, h + 1) += down;
      Q(h + 1, h + 1) -= down;
    }
    const MarkovGeometry g(Q);
    const Eigen::MatrixXd B = zero_sum_basis(n);
    for (int trial = 0; trial < 10; ++trial) {
      const LabelDistribution lam = interior_sample(rng, n, 0.02);
      const Eigen::MatrixXd K = onsager_matrix(lam, g);
      const Eigen::MatrixXd G2 = metric_tensor(lam, g);
      for (int col = 0; col < n - 1; ++col) {
        const Eigen::VectorXd mu_col = B.col(col);
        CHECK((G2 * (K * mu_col) - mu_col).cwiseAbs().maxCoeff() <= 1e-9);
      }
    }
  }

  CHECK_THROWS_AS(metric_tensor(LabelDistribution({1.0, 0.0}), geom), NearSingularMetric);
}

TEST_CASE("probed spectral bounds sandwich fresh samples") {
  const MarkovGeometry geom(two_state(1.0, 2.0));
  const double delta = 0.05;
  const GeometryConstants c = probe_constants(geom, delta, 4000);
  REQUIRE(c.c1 > 0.0);
  REQUIRE(c.c4 > 0.0);
  CHECK(c.c1 <= c.c3);
  CHECK(c.c4 <= c.c2);

  Rng rng(63);
  const Eigen::MatrixXd B = zero_sum_basis(2);
  for (int trial = 0; trial < 200; ++trial) {
    const LabelDistribution lam = interior_sample(rng, 2, delta);
    const Eigen::VectorXd mu = B.col(0) * rng.uniform(0.1, 2.0);
    const double g_quad = metric_quadform(lam, geom, mu);
    const double k_quad = mu.dot(onsager_matrix(lam, geom) * mu);
    const double m2 = mu.squaredNorm();
    // factor-2 slack around the sampled constants
    CHECK(g_quad >= 0.5 * c.c1 * m2);
    CHECK(g_quad <= 2.0 * c.c3 * m2);
    CHECK(k_quad <= 2.0 * c.c2 * m2);
    CHECK(k_quad >= 0.5 * c.c4 * m2);
  }
}

TEST_CASE("geodesic distance: degenerate and two-label cases") {
  const MarkovGeometry geom(two_state(1.0, 2.0));
  const LabelDistribution a({0.3, 0.7});

  const GeodesicPath trivial = geodesic_distance(a, a, geom, 16);
  CHECK(trivial.length == 0.0);

  Rng rng(64);
  for (int trial = 0; trial < 6; ++trial) {
    const LabelDistribution l1 = interior_sample(rng, 2, 0.05);
    const LabelDistribution l2 = interior_sample(rng, 2, 0.05);
    const GeodesicPath path = geodesic_distance_auto(l1, l2, geom);
    const double ref = oracle::geodesic_length_quadrature(l1, l2, geom);
    if (ref > 1e-12) {
      CHECK(std::abs(path.length - ref) / ref <= 1e-6);
    }
  }
}

TEST_CASE("geodesic refinement never lengthens the path") {
  const MarkovGeometry geom(two_state(1.0, 2.0));
  const LabelDistribution l1({0.2, 0.8}), l2({0.85, 0.15});
  const GeodesicPath coarse = geodesic_distance(l1, l2, geom, 16);
  const GeodesicPath fine = geodesic_distance(l1, l2, geom, 32);
  CHECK(fine.length <= coarse.length + 1e-8);
}

TEST_CASE("geodesic length obeys the probed norm sandwich") {
  Eigen::MatrixXd tri(3, 3);
  tri << -1, 2, 0, 1, -3, 2, 0, 1, -2;
  const MarkovGeometry geom(tri);
  const double delta = 0.05;
  const GeometryConstants c = probe_constants(geom, delta, 3000);
  Rng rng(65);
  for (int trial = 0; trial < 8; ++trial) {
    const LabelDistribution l1 = interior_sample(rng, 3, delta);
    const LabelDistribution l2 = interior_sample(rng, 3, delta);
    Eigen::Vector3d gap;
    for (int h = 0; h < 3; ++h) gap[h] = l1[h] - l2[h];
    const double euclid = gap.norm();
    if (euclid < 1e-10) continue;
    const GeodesicPath path = geodesic_distance(l1, l2, geom, 32);
    CHECK(path.length >= 0.5 * c.m1 * euclid);
    CHECK(path.length <= 2.0 * c.m2 * euclid);

    // comparison with the frozen-metric norm at one endpoint
    const double frozen = std::sqrt(metric_quadform(l1, geom, gap));
    const double m34 = std::max(c.m3, c.m4);
    CHECK(std::abs(path.length - frozen) <= 2.0 * m34 * std::pow(euclid, 1.5) + 1e-9);
  }
}

TEST_CASE("geodesic rejects boundary endpoints and tiny segment counts") {
  const MarkovGeometry geom(two_state(1.0, 2.0));
  const LabelDistribution inner({0.4, 0.6});
  CHECK_THROWS_AS(geodesic_distance(LabelDistribution({1.0, 0.0}), inner, geom, 16),
                  NearSingularMetric);
  CHECK_THROWS_AS(geodesic_distance(inner, inner, geom, 1), ContractViolation);
}
