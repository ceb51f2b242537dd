#pragma once

#include <vector>

#include "labeldyn/fields.hpp"
#include "labeldyn/label_geometry.hpp"
#include "labeldyn/scheme.hpp"

namespace labeldyn {

struct ProxResult {
  LabelDistribution lambda_new;
  double objective_value = 0.0;
  int iterations = 0;
  bool converged = false;
};

struct ProxOptions {
  int max_iterations = 10000;
  double tolerance = 1e-10;  // first-order stationarity in the sqrt chart
};

// -(1/4) <(J*Psi)(x, .), lambda>
double payoff_functional(const std::vector<double>& x, const LabelDistribution& lam,
                         const EmpiricalMeasure& psi, const PayoffKernel& J);

// One minimizing-movement step of the payoff against the squared spherical
// Hellinger distance, over the closed simplex. Solved in the sqrt chart
// q = sqrt(lambda) by projected Riemannian gradient descent with Armijo line
// search, deterministic start at sqrt(lambda_hat).
ProxResult prox_hs_payoff(const std::vector<double>& payoff, const LabelDistribution& lambda_hat,
                          double tau, HsConvention convention = HsConvention::Geodesic,
                          const ProxOptions& opts = {});

ProxResult prox_hs(const std::vector<double>& x, const LabelDistribution& lambda_hat,
                   const EmpiricalMeasure& psi, double tau, const PayoffKernel& J,
                   HsConvention convention = HsConvention::Geodesic, const ProxOptions& opts = {});

// || (lambda_new - lambda_hat)/tau - T(x, lambda_new) ||_BL
double el_residual_hs(const LabelDistribution& lambda_hat, const LabelDistribution& lambda_new,
                      double tau, const std::vector<double>& x, const EmpiricalMeasure& psi,
                      const PayoffKernel& J, const LabelMetricSpace& space);

// Same alternating loop as run_explicit with the label substep replaced by
// prox_hs; no step-size guard is needed.
Trajectory run_implicit_replicator(const EmpiricalMeasure& initial, const VelocityField& v,
                                   const PayoffKernel& J, const SchemeConfig& config);

// Squared label-step distance used by the prox objective, as a function of
// the Bhattacharyya cosine; exposed for the convention switch.
double hs_squared_from_cosine(double c, HsConvention convention);

}  // namespace labeldyn
