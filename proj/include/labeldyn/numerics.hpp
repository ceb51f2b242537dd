#pragma once

#include <Eigen/Dense>
#include <functional>
#include <vector>

namespace labeldyn {

// exp(A) by scaling-and-squaring with a (6,6) Pade approximant
Eigen::MatrixXd matrix_exponential(const Eigen::MatrixXd& A);

// Orthonormal basis of the zero-sum hyperplane, as columns of an n x (n-1) matrix.
Eigen::MatrixXd zero_sum_basis(int n);

struct SlopeFit {
  double slope = 0.0;
  double intercept = 0.0;
  int points_used = 0;
  bool valid = false;
};

// Least-squares slope of log(y) against log(x); pairs with y <= floor are dropped.
SlopeFit fit_loglog(const std::vector<double>& x, const std::vector<double>& y, double floor = 0.0);

double golden_section_minimize(const std::function<double(double)>& f, double lo, double hi,
                               double tol, int max_iter = 400);

double adaptive_simpson(const std::function<double(double)>& f, double a, double b, double tol,
                        int max_depth = 40);

// Runs fn(i) for i in [0, count). With threads <= 1 the loop is serial. Each
// index owns its outputs, so results do not depend on the thread count.
void parallel_for(int count, int threads, const std::function<void(int)>& fn);

}  // namespace labeldyn
