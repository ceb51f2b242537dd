#include "labeldyn/linprog.hpp"

#include <cmath>
#include <cstddef>

#include "labeldyn/errors.hpp"

namespace labeldyn::lp {

namespace {
constexpr double kEps = 1e-11;
}

Solution maximize_free(const std::vector<double>& c,
                       const std::vector<std::vector<double>>& A,
                       const std::vector<double>& b) {
  const std::size_t n = c.size();
  const std::size_t m = A.size();
  for (const auto& row : A) {
    if (row.size() != n) throw ContractViolation("LP row width does not match objective");
  }
  for (double v : b) {
    if (v < -kEps) throw ContractViolation("LP requires nonnegative right-hand side");
  }

  // Free variables split as x = u - v; columns [u | v | slacks].
  const std::size_t cols = 2 * n + m;
  std::vector<std::vector<double>> T(m + 1, std::vector<double>(cols + 1, 0.0));
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      T[i][j] = A[i][j];
      T[i][n + j] = -A[i][j];
    }
    T[i][2 * n + i] = 1.0;
    T[i][cols] = std::max(b[i], 0.0);
  }
  for (std::size_t j = 0; j < n; ++j) {
    T[m][j] = -c[j];
    T[m][n + j] = c[j];
  }

  std::vector<std::size_t> basis(m);
  for (std::size_t i = 0; i < m; ++i) basis[i] = 2 * n + i;

  const std::size_t max_pivots = 2000 + 40 * (m + cols);
  const std::size_t bland_after = 500 + 10 * (m + cols);
  for (std::size_t iter = 0; iter < max_pivots; ++iter) {
    // entering column
    std::size_t enter = cols;
    if (iter < bland_after) {
      double best = -kEps;
      for (std::size_t j = 0; j < cols; ++j) {
        if (T[m][j] < best) {
          best = T[m][j];
          enter = j;
        }
      }
    } else {
      for (std::size_t j = 0; j < cols; ++j) {
        if (T[m][j] < -kEps) {
          enter = j;
          break;
        }
      }
    }
    if (enter == cols) {
      Solution s;
      s.x.assign(n, 0.0);
      for (std::size_t i = 0; i < m; ++i) {
        if (basis[i] < n) {
          s.x[basis[i]] += T[i][cols];
        } else if (basis[i] < 2 * n) {
          s.x[basis[i] - n] -= T[i][cols];
        }
      }
      s.value = T[m][cols];
      s.optimal = true;
      return s;
    }

    // ratio test; Bland tie-break on the basis index for determinism
    std::size_t leave = m;
    double best_ratio = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
      if (T[i][enter] > kEps) {
        const double ratio = T[i][cols] / T[i][enter];
        if (leave == m || ratio < best_ratio - kEps ||
            (ratio < best_ratio + kEps && basis[i] < basis[leave])) {
          leave = i;
          best_ratio = ratio;
        }
      }
    }
    if (leave == m) throw ContractViolation("LP is unbounded");

    const double piv = T[leave][enter];
    for (std::size_t j = 0; j <= cols; ++j) T[leave][j] /= piv;
    for (std::size_t i = 0; i <= m; ++i) {
      if (i == leave) continue;
      const double f = T[i][enter];
      if (f == 0.0) continue;
      for (std::size_t j = 0; j <= cols; ++j) T[i][j] -= f * T[leave][j];
      T[i][enter] = 0.0;
    }
    basis[leave] = enter;
  }
  throw NonConvergence("simplex pivot limit exceeded");
}

}  // namespace labeldyn::lp
