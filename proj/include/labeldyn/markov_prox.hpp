#pragma once

#include <optional>
#include <utility>

#include "labeldyn/markov_geometry.hpp"
#include "labeldyn/replicator_prox.hpp"
#include "labeldyn/scheme.hpp"

namespace labeldyn {

// Runtime guard that labels stay delta-interior; once a violation is recorded
// the run is considered terminated at that step.
struct MarginMonitor {
  double delta = 0.01;
  double eta = 0.1;
  std::optional<std::pair<int, int>> violated_at;  // (step, agent)

  MarginMonitor() = default;
  MarginMonitor(double delta_, double eta_);
};

struct MarkovProxOptions {
  int segments = 64;        // geodesic discretization inside the objective
  int max_iterations = 500;
  double tolerance = 1e-9;  // projected-gradient stationarity
};

// Minimizing movement of the entropy against the squared geodesic distance.
// Nested: the outer candidate moves by projected gradient descent (with a
// bisection polish on two labels), the inner distance is the path optimizer.
ProxResult prox_markov_full(const LabelDistribution& lambda_hat, const MarkovGeometry& geom,
                            double tau, const MarkovProxOptions& opts = {});

// Linearized movement: entropy against the fixed quadratic form G(lambda_ref),
// solved by damped Newton on the zero-sum hyperplane.
ProxResult prox_markov_surrogate(const LabelDistribution& lambda_hat,
                                 const LabelDistribution& lambda_ref, const MarkovGeometry& geom,
                                 double tau);

// | (lambda_new - lambda_hat)/tau - Q lambda_new |_2
double el_residual_markov(const LabelDistribution& lambda_hat, const LabelDistribution& lambda_new,
                          const MarkovGeometry& geom, double tau);

// Proximity hypothesis for the quantitative Euler-Lagrange bound:
// sqrt(c3/c1) |l1 - l2| < min distance of either point to the delta-shell
// boundary, measured inside the hyperplane.
bool proximity_condition(const LabelDistribution& l1, const LabelDistribution& l2, double delta,
                         double c_ratio_sqrt);

// Alternate scheme with the proximal label substep; labels of the initial
// datum must be eta-interior. On a margin violation the run stops cleanly at
// the last valid node and the monitor records the location.
Trajectory run_implicit_markov(const EmpiricalMeasure& initial, const VelocityField& v,
                               const RateMatrixField& rates, const SchemeConfig& config,
                               MarginMonitor& monitor);

}  // namespace labeldyn
