#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "labeldyn/label_geometry.hpp"

namespace labeldyn {

// Stationary distribution of an irreducible rate matrix, by full-pivot
// null-space extraction. Detailed balance is verified, not derived.
LabelDistribution stationary_distribution(const Eigen::MatrixXd& Q);

// Reversible chain frozen at one (x, Psi): rate matrix plus its stationary
// distribution, the carrier of the discrete Riemannian structure.
class MarkovGeometry {
  public:
  explicit MarkovGeometry(Eigen::MatrixXd Q);
  MarkovGeometry(Eigen::MatrixXd Q, LabelDistribution sigma);

  int size() const { return n_; }
  const Eigen::MatrixXd& Q() const { return Q_; }
  const LabelDistribution& sigma() const { return sigma_; }

  private:
  void check() const;
  Eigen::MatrixXd Q_;
  LabelDistribution sigma_;
  int n_;
};

// logarithmic mean; (a-b)/(ln a - ln b), a on the diagonal, 0 on the axes
double log_mean(double a, double b);
double log_mean_partial_a(double a, double b);

// relative entropy sum_h lambda_h ln(lambda_h / sigma_h), with 0 ln 0 = 0
double entropy(const LabelDistribution& lam, const MarkovGeometry& geom);
// ln(lambda/sigma) + 1; requires a strictly interior lambda
Eigen::VectorXd entropy_gradient(const LabelDistribution& lam, const MarkovGeometry& geom);

Eigen::MatrixXd onsager_matrix(const LabelDistribution& lam, const MarkovGeometry& geom);
// derivative of the Onsager matrix in the m-th coordinate
Eigen::MatrixXd onsager_partial(const LabelDistribution& lam, const MarkovGeometry& geom, int m);

// Pseudo-inverse of K on the zero-sum hyperplane.
Eigen::MatrixXd metric_tensor(const LabelDistribution& lam, const MarkovGeometry& geom);

// <G(lam) mu, mu> and G(lam) mu for zero-sum mu, via a reduced solve.
double metric_quadform(const LabelDistribution& lam, const MarkovGeometry& geom,
                       const Eigen::VectorXd& mu);
Eigen::VectorXd metric_apply(const LabelDistribution& lam, const MarkovGeometry& geom,
                             const Eigen::VectorXd& mu);

struct GeodesicPath {
  std::vector<LabelDistribution> nodes;
  double length = 0.0;
};

struct GeodesicOptions {
  double length_tol = 1e-8;
  int max_iterations = 2000;
};

// Piecewise-linear path of minimal Riemannian length between two interior
// points, by gradient descent on the interior nodes from the straight-line
// start. Deterministic.
GeodesicPath geodesic_distance(const LabelDistribution& lam1, const LabelDistribution& lam2,
                               const MarkovGeometry& geom, int segments,
                               const GeodesicOptions& opts = {});

// Doubles the segment count from `segments` until the length moves by less
// than rel_tol relatively.
GeodesicPath geodesic_distance_auto(const LabelDistribution& lam1, const LabelDistribution& lam2,
                                    const MarkovGeometry& geom, int segments = 64,
                                    double rel_tol = 1e-7);

struct GeodesicWithGradient {
  GeodesicPath path;
  Eigen::VectorXd endpoint_gradient;  // d length / d lam2, zero-sum
};

GeodesicWithGradient geodesic_with_gradient(const LabelDistribution& lam1,
                                            const LabelDistribution& lam2,
                                            const MarkovGeometry& geom, int segments,
                                            const GeodesicOptions& opts = {});

// Sampled spectral and regularity constants of the geometry on the closed
// simplex and on the delta-interior. These feed the quantitative checks; the
// test-side comparisons apply a factor-2 slack.
struct GeometryConstants {
  double delta = 0.0;
  double alpha = 0.5;
  double c1 = 0.0, c2 = 0.0, c3 = 0.0, c4 = 0.0;
  double m1 = 0.0, m2 = 0.0, m3 = 0.0, m4 = 0.0;
  double L_G = 0.0, L_E = 0.0, C_E_alpha = 0.0;
};

GeometryConstants probe_constants(const MarkovGeometry& geom, double delta, int samples,
                                  double alpha = 0.5, std::uint64_t seed = 0x9e0deULL);

}  // namespace labeldyn
