#include "labeldyn/numerics.hpp"

#include <atomic>
#include <cmath>
#include <thread>

#include "labeldyn/errors.hpp"

namespace labeldyn {

Eigen::MatrixXd matrix_exponential(const Eigen::MatrixXd& A) {
  const int n = static_cast<int>(A.rows());
  if (A.cols() != n) throw ContractViolation("matrix_exponential needs a square matrix");
  const double norm = A.cwiseAbs().rowwise().sum().maxCoeff();
  int squarings = 0;
  if (norm > 0.2) {
    squarings = std::max(0, static_cast<int>(std::ceil(std::log2(norm / 0.2))));
  }
  const Eigen::MatrixXd As = A / std::pow(2.0, squarings);

  // Pade (6,6)
  const double b[] = {1.0, 0.5, 3.0 / 26.0, 5.0 / 312.0, 5.0 / 3432.0, 1.0 / 11440.0,
                      1.0 / 308880.0};
  const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(n, n);
  const Eigen::MatrixXd A2 = As * As;
  const Eigen::MatrixXd A4 = A2 * A2;
  const Eigen::MatrixXd A6 = A4 * A2;
  const Eigen::MatrixXd U = As * (b[1] * I + b[3] * A2 + b[5] * A4);
  const Eigen::MatrixXd V = b[0] * I + b[2] * A2 + b[4] * A4 + b[6] * A6;
  Eigen::MatrixXd E = (V - U).partialPivLu().solve(V + U);
  for (int s = 0; s < squarings; ++s) E = E * E;
  return E;
}

Eigen::MatrixXd zero_sum_basis(int n) {
  // Helmert columns: deterministic and orthonormal.
  Eigen::MatrixXd B = Eigen::MatrixXd::Zero(n, n - 1);
  for (int j = 1; j < n; ++j) {
    const double scale = 1.0 / std::sqrt(static_cast<double>(j) * (j + 1));
    for (int i = 0; i < j; ++i) B(i, j - 1) = scale;
    B(j, j - 1) = -static_cast<double>(j) * scale;
  }
  return B;
}

SlopeFit fit_loglog(const std::vector<double>& x, const std::vector<double>& y, double floor) {
  SlopeFit fit;
  std::vector<double> lx, ly;
  for (std::size_t i = 0; i < x.size() && i < y.size(); ++i) {
    if (x[i] > 0.0 && y[i] > floor) {
      lx.push_back(std::log(x[i]));
      ly.push_back(std::log(y[i]));
    }
  }
  fit.points_used = static_cast<int>(lx.size());
  if (fit.points_used < 2) return fit;
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    sx += lx[i];
    sy += ly[i];
    sxx += lx[i] * lx[i];
    sxy += lx[i] * ly[i];
  }
  const double m = static_cast<double>(lx.size());
  const double denom = m * sxx - sx * sx;
  if (std::abs(denom) < 1e-14) return fit;
  fit.slope = (m * sxy - sx * sy) / denom;
  fit.intercept = (sy - fit.slope * sx) / m;
  fit.valid = true;
  return fit;
}

double golden_section_minimize(const std::function<double(double)>& f, double lo, double hi,
                               double tol, int max_iter) {
  const double phi = 0.6180339887498948482;
  double a = lo, b = hi;
  double c = b - phi * (b - a);
  double d = a + phi * (b - a);
  double fc = f(c), fd = f(d);
  for (int it = 0; it < max_iter && (b - a) > tol; ++it) {
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - phi * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + phi * (b - a);
      fd = f(d);
    }
  }
  return 0.5 * (a + b);
}

namespace {
double simpson_rule(const std::function<double(double)>& f, double a, double fa, double b,
                    double fb, double m, double fm) {
  return (b - a) / 6.0 * (fa + 4.0 * fm + fb);
}

double simpson_rec(const std::function<double(double)>& f, double a, double fa, double b,
                   double fb, double m, double fm, double whole, double tol, int depth) {
  const double lm = 0.5 * (a + m);
  const double rm = 0.5 * (m + b);
  const double flm = f(lm);
  const double frm = f(rm);
  const double left = simpson_rule(f, a, fa, m, fm, lm, flm);
  const double right = simpson_rule(f, m, fm, b, fb, rm, frm);
  const double delta = left + right - whole;
  if (depth <= 0 || std::abs(delta) <= 15.0 * tol) {
    return left + right + delta / 15.0;
  }
  return simpson_rec(f, a, fa, m, fm, lm, flm, left, 0.5 * tol, depth - 1) +
         simpson_rec(f, m, fm, b, fb, rm, frm, right, 0.5 * tol, depth - 1);
}
}  // namespace

double adaptive_simpson(const std::function<double(double)>& f, double a, double b, double tol,
                        int max_depth) {
  if (a == b) return 0.0;
  const double m = 0.5 * (a + b);
  const double fa = f(a), fb = f(b), fm = f(m);
  const double whole = simpson_rule(f, a, fa, b, fb, m, fm);
  return simpson_rec(f, a, fa, b, fb, m, fm, whole, tol, max_depth);
}

void parallel_for(int count, int threads, const std::function<void(int)>& fn) {
  if (count <= 0) return;
  if (threads <= 1 || count == 1) {
    for (int i = 0; i < count; ++i) fn(i);
    return;
  }
  const int workers = std::min(threads, count);
  std::atomic<int> next{0};
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&]() {
      for (;;) {
        const int i = next.fetch_add(1);
        if (i >= count) return;
        fn(i);
      }
    });
  }
  for (auto& t : pool) t.join();
}

}  // namespace labeldyn
