#pragma once

#include <vector>

namespace labeldyn::lp {

struct Solution {
  std::vector<double> x;
  double value = 0.0;
  bool optimal = false;
};

// maximize c.x subject to A x <= b, x free, with b >= 0 componentwise.
// The nonnegative right-hand side makes the slack basis feasible, so a single
// primal simplex phase suffices. Dantzig pricing with a Bland fallback keeps
// the pivot sequence finite and deterministic.
Solution maximize_free(const std::vector<double>& c,
                       const std::vector<std::vector<double>>& A,
                       const std::vector<double>& b);

}  // namespace labeldyn::lp
