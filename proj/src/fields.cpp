#include "labeldyn/fields.hpp"

#include <algorithm>
#include <cmath>
#include <utility>

#include "labeldyn/errors.hpp"
#include "labeldyn/rng.hpp"

namespace labeldyn {

std::vector<double> payoff_profile(const std::vector<double>& x, const EmpiricalMeasure& psi,
                                   const PayoffKernel& J, int n) {
  if (psi.size() <= 0) throw ContractViolation("payoff profile against an empty measure");
  std::vector<double> p(n, 0.0);
  for (int h = 0; h < n; ++h) {
    double acc = 0.0;
    for (int a = 0; a < psi.size(); ++a) {
      const auto& opp = psi.agent(a);
      double inner = 0.0;
      for (int hp = 0; hp < n; ++hp) {
        const double w = opp.label[hp];
        if (w != 0.0) inner += J.eval(x, h, opp.x, hp) * w;
      }
      acc += psi.weight(a) * inner;
    }
    p[h] = acc;
  }
  return p;
}

SignedLabelMeasure replicator_operator(const std::vector<double>& x, const LabelDistribution& lam,
                                       const EmpiricalMeasure& psi, const PayoffKernel& J) {
  const int n = lam.size();
  if (psi.label_count() != n) throw ContractViolation("replicator operator: label count mismatch");
  const std::vector<double> p = payoff_profile(x, psi, J, n);
  double mean = 0.0;
  for (int h = 0; h < n; ++h) mean += p[h] * lam[h];
  std::vector<double> t(n);
  for (int h = 0; h < n; ++h) t[h] = (p[h] - mean) * lam[h];
  return SignedLabelMeasure(std::move(t));
}

void check_rate_matrix(const Eigen::MatrixXd& Q) {
  const int n = static_cast<int>(Q.rows());
  if (Q.cols() != n) throw InvalidRateMatrix("rate matrix must be square");
  const double scale = std::max(1.0, Q.cwiseAbs().maxCoeff());
  for (int l = 0; l < n; ++l) {
    double col = 0.0;
    for (int h = 0; h < n; ++h) {
      if (h != l && Q(h, l) < -1e-12 * scale)
        throw InvalidRateMatrix("negative off-diagonal rate at (" + std::to_string(h) + "," +
                                std::to_string(l) + ")");
      col += Q(h, l);
    }
    if (std::abs(col) > 1e-10 * scale)
      throw InvalidRateMatrix("column " + std::to_string(l) + " sums to " + std::to_string(col));
  }
}

SignedLabelMeasure markov_operator(const std::vector<double>& x, const LabelDistribution& lam,
                                   const EmpiricalMeasure& psi, const RateMatrixField& Q) {
  const Eigen::MatrixXd q = Q.eval(x, psi);
  if (q.rows() != lam.size()) throw ContractViolation("markov operator: label count mismatch");
  check_rate_matrix(q);
  const int n = lam.size();
  std::vector<double> t(n, 0.0);
  for (int h = 0; h < n; ++h) {
    double acc = 0.0;
    for (int l = 0; l < n; ++l) acc += q(h, l) * lam[l];
    t[h] = acc;
  }
  return SignedLabelMeasure(std::move(t));
}

VelocityField make_zero_velocity() {
  VelocityField v;
  v.growth = 0.0;
  v.eval = [](const std::vector<double>& x, const LabelDistribution&, const EmpiricalMeasure&) {
    return std::vector<double>(x.size(), 0.0);
  };
  return v;
}

VelocityField make_per_label_drift(std::vector<std::vector<double>> coefficients) {
  if (coefficients.empty()) throw ContractViolation("per-label drift needs coefficients");
  double growth = 0.0;
  for (const auto& c : coefficients) growth = std::max(growth, position_norm(c));
  VelocityField v;
  v.growth = growth;
  v.eval = [coeff = std::move(coefficients)](const std::vector<double>& x,
                                             const LabelDistribution& lam,
                                             const EmpiricalMeasure&) {
    if (lam.size() != static_cast<int>(coeff.size()))
      throw ContractViolation("per-label drift: label count mismatch");
    std::vector<double> out(x.size(), 0.0);
    for (int h = 0; h < lam.size(); ++h) {
      for (std::size_t j = 0; j < out.size(); ++j) out[j] += lam[h] * coeff[h][j];
    }
    return out;
  };
  return v;
}

VelocityField make_mean_field_attraction(double kappa) {
  VelocityField v;
  v.growth = std::abs(kappa);
  v.eval = [kappa](const std::vector<double>& x, const LabelDistribution&,
                   const EmpiricalMeasure& psi) {
    const std::vector<double> c = barycenter(psi);
    std::vector<double> out(x.size());
    for (std::size_t j = 0; j < out.size(); ++j) out[j] = kappa * (c[j] - x[j]);
    return out;
  };
  return v;
}

LabelOperator make_replicator_label_operator(PayoffKernel J, int n) {
  LabelOperator op;
  // |T_h| <= 2 max|J| lambda_h and |J| grows linearly in |x|, |x'|.
  op.growth = 4.0 * J.growth;
  op.eval = [J = std::move(J)](const std::vector<double>& x, const LabelDistribution& lam,
                               const EmpiricalMeasure& psi) {
    return replicator_operator(x, lam, psi, J);
  };
  (void)n;
  return op;
}

LabelOperator make_markov_label_operator(RateMatrixField Q) {
  LabelOperator op;
  op.growth = 2.0 * Q.growth;
  op.eval = [Q = std::move(Q)](const std::vector<double>& x, const LabelDistribution& lam,
                               const EmpiricalMeasure& psi) {
    return markov_operator(x, lam, psi, Q);
  };
  return op;
}

double delta_estimate(const LabelOperator& T, double R, int samples, int d, int n,
                      std::uint64_t seed) {
  if (samples < 1) throw ContractViolation("delta_estimate needs at least one sample");
  Rng rng(seed);
  const double pos_radius = std::max(0.0, R - 1.0);
  // Dirichlet concentration cycles toward the vertices, where the positivity
  // margin of T + delta lambda is tightest.
  const double alphas[] = {1.0, 0.3, 0.05};
  double worst = 0.0;
  const int support = 8;
  for (int s = 0; s < samples; ++s) {
    std::vector<AgentState> agents;
    agents.reserve(support);
    for (int a = 0; a < support; ++a) {
      agents.push_back(
          {rng.ball(d, pos_radius), LabelDistribution(rng.dirichlet(n, 1.0))});
    }
    const EmpiricalMeasure psi = EmpiricalMeasure::uniform(std::move(agents));
    const std::vector<double> x = rng.ball(d, pos_radius);
    const LabelDistribution lam(rng.dirichlet(n, alphas[s % 3]));
    const SignedLabelMeasure t = T.eval(x, lam, psi);
    for (int h = 0; h < n; ++h) {
      if (lam[h] > 1e-12) worst = std::max(worst, -t[h] / lam[h]);
    }
  }
  return worst;
}

}  // namespace labeldyn
