#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <vector>

#include "labeldyn/ensemble.hpp"
#include "labeldyn/label_geometry.hpp"

namespace labeldyn {

// Payoff of strategy u at x against strategy u' of an opponent at x'.
// growth bounds |J| <= growth * (1 + |x| + |x'|) on the sampled range.
struct PayoffKernel {
  std::function<double(const std::vector<double>&, int, const std::vector<double>&, int)> eval;
  double growth = 1.0;
};

// (x, Psi) -> rate matrix; off-diagonal entries nonnegative, columns sum to 0.
struct RateMatrixField {
  std::function<Eigen::MatrixXd(const std::vector<double>&, const EmpiricalMeasure&)> eval;
  double growth = 1.0;
};

struct VelocityField {
  std::function<std::vector<double>(const std::vector<double>&, const LabelDistribution&,
                                    const EmpiricalMeasure&)>
      eval;
  double growth = 1.0;
};

// Label drift T_Psi(y); outputs are zero-sum. Closures must be reentrant.
struct LabelOperator {
  std::function<SignedLabelMeasure(const std::vector<double>&, const LabelDistribution&,
                                   const EmpiricalMeasure&)>
      eval;
  double growth = 1.0;
};

// (J * Psi)(x, .): expected payoff of each pure strategy against the ensemble.
std::vector<double> payoff_profile(const std::vector<double>& x, const EmpiricalMeasure& psi,
                                   const PayoffKernel& J, int n);

// ((J*Psi)(x,.) - mean payoff) lambda
SignedLabelMeasure replicator_operator(const std::vector<double>& x, const LabelDistribution& lam,
                                       const EmpiricalMeasure& psi, const PayoffKernel& J);

// Q(x, Psi) lambda, after checking the column-sum structure of Q.
SignedLabelMeasure markov_operator(const std::vector<double>& x, const LabelDistribution& lam,
                                   const EmpiricalMeasure& psi, const RateMatrixField& Q);
void check_rate_matrix(const Eigen::MatrixXd& Q);

VelocityField make_zero_velocity();
// v(x, lambda) = sum_h lambda_h c_h with one constant vector per label
VelocityField make_per_label_drift(std::vector<std::vector<double>> coefficients);
// v = kappa (barycenter(Psi) - x)
VelocityField make_mean_field_attraction(double kappa);

LabelOperator make_replicator_label_operator(PayoffKernel J, int n);
LabelOperator make_markov_label_operator(RateMatrixField Q);

// Empirical lower estimate of the positivity margin delta_R: the largest
// sampled value of max_h(-T_h / lambda_h) over states in the R-ball.
double delta_estimate(const LabelOperator& T, double R, int samples, int d, int n,
                      std::uint64_t seed = 0x5eedULL);

}  // namespace labeldyn
