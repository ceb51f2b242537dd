#pragma once

// Brute-force reference computations for the test suites. Everything here is
// deliberately independent of the solver paths it checks: exhaustive grids,
// pattern search, quadrature, and permutation enumeration only.

#include <Eigen/Dense>
#include <functional>
#include <vector>

#include "labeldyn/label_geometry.hpp"
#include "labeldyn/markov_geometry.hpp"

namespace labeldyn::oracle {

struct GridMin {
  std::vector<double> lambda;
  double value = 0.0;
};

// Minimize a function over the closed simplex: exhaustive grid with the given
// step, refined by compass pattern search down to `refine`. n in {2, 3}.
GridMin minimize_on_simplex(const std::function<double(const std::vector<double>&)>& f, int n,
                            double grid_step = 1e-3, double refine = 1e-6);

// 1-D golden-section refinement for two labels; grid then bracket shrink.
GridMin minimize_on_segment(const std::function<double(double)>& f, double grid_step = 1e-4,
                            double refine = 1e-10);

// Riemannian length of the forced path between two interior points of the
// two-label simplex, by adaptive quadrature of the closed-form line element.
double geodesic_length_quadrature(const LabelDistribution& a, const LabelDistribution& b,
                                  const MarkovGeometry& geom, double tol = 1e-10);

// Exact optimal transport between equal-count uniform clouds by enumerating
// all assignments; sizes up to 8.
double transport_by_permutations(const std::vector<std::vector<double>>& cost);

// exp(tQ) for a 2x2 rate matrix [[-a, b], [a, -b]] in closed form.
Eigen::Matrix2d expm_two_state(double a, double b, double t);

}  // namespace labeldyn::oracle
