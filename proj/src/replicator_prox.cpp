#include "labeldyn/replicator_prox.hpp"

#include <algorithm>
#include <cmath>

#include "labeldyn/errors.hpp"
#include "labeldyn/numerics.hpp"

namespace labeldyn {

namespace {

constexpr double kActiveTol = 1e-14;

double clamp_cos(double c) { return std::clamp(c, -1.0, 1.0); }

// derivative of the squared step distance with respect to the cosine
double hs_squared_derivative(double c, HsConvention convention) {
  c = clamp_cos(c);
  if (convention == HsConvention::Geodesic) {
    const double theta = std::acos(c);
    double ratio;  // theta / sin(theta)
    if (theta < 1e-4) {
      const double t2 = theta * theta;
      ratio = 1.0 + t2 / 6.0 + 7.0 * t2 * t2 / 360.0;
    } else {
      ratio = theta / std::sin(theta);
    }
    return -2.0 * ratio;
  }
  // literal reading: arccos(1 - (H^2)^2 / 2) with H^2 = 2(1 - c)
  const double e = 1.0 - c;
  if (e < 1e-8) return 2.0;
  const double u = 1.0 - 2.0 * e * e;
  const double denom = std::max(1e-12, std::sqrt(std::max(0.0, 1.0 - u * u)));
  return 4.0 * e / denom;
}

struct QState {
  std::vector<double> q;
  double cosine = 1.0;
  double value = 0.0;
};

}  // namespace

double hs_squared_from_cosine(double c, HsConvention convention) {
  c = clamp_cos(c);
  if (convention == HsConvention::Geodesic) {
    const double theta = std::acos(c);
    return theta * theta;
  }
  const double e = 1.0 - c;
  return std::acos(std::clamp(1.0 - 2.0 * e * e, -1.0, 1.0));
}

double payoff_functional(const std::vector<double>& x, const LabelDistribution& lam,
                         const EmpiricalMeasure& psi, const PayoffKernel& J) {
  const std::vector<double> p = payoff_profile(x, psi, J, lam.size());
  double s = 0.0;
  for (int h = 0; h < lam.size(); ++h) s += p[h] * lam[h];
  return -0.25 * s;
}

ProxResult prox_hs_payoff(const std::vector<double>& payoff, const LabelDistribution& lambda_hat,
                          double tau, HsConvention convention, const ProxOptions& opts) {
  if (!(tau > 0.0)) throw ContractViolation("prox step size must be positive");
  const int n = lambda_hat.size();
  if (static_cast<int>(payoff.size()) != n)
    throw ContractViolation("payoff vector length mismatch");

  std::vector<double> q_hat(n);
  for (int h = 0; h < n; ++h) q_hat[h] = std::sqrt(lambda_hat[h]);

  auto evaluate = [&](const std::vector<double>& q) {
    QState s;
    s.q = q;
    double c = 0.0, pay = 0.0;
    for (int h = 0; h < n; ++h) {
      c += q[h] * q_hat[h];
      pay += payoff[h] * q[h] * q[h];
    }
    s.cosine = clamp_cos(c);
    s.value = -0.25 * pay + hs_squared_from_cosine(s.cosine, convention) / (2.0 * tau);
    return s;
  };

  auto retract = [&](std::vector<double> q) {
    double norm2 = 0.0;
    for (auto& v : q) {
      if (v < 0.0) v = 0.0;
      norm2 += v * v;
    }
    const double norm = std::sqrt(norm2);
    if (norm <= 0.0) throw NonConvergence("prox step collapsed the sqrt chart");
    for (auto& v : q) v /= norm;
    return q;
  };

  // projected gradient, stationarity residual and steepest feasible direction
  auto first_order = [&](const QState& s, std::vector<double>& dir) {
    const double dcoef = hs_squared_derivative(s.cosine, convention) / (2.0 * tau);
    double radial = 0.0;
    std::vector<double> grad(n);
    for (int h = 0; h < n; ++h) {
      grad[h] = -0.5 * payoff[h] * s.q[h] + dcoef * q_hat[h];
      radial += grad[h] * s.q[h];
    }
    double residual = 0.0;
    for (int h = 0; h < n; ++h) {
      double r = grad[h] - radial * s.q[h];
      if (s.q[h] <= kActiveTol) {
        // pinned component: only inward movement is feasible
        residual = std::max(residual, std::max(0.0, -r));
        r = std::min(r, 0.0);
      } else {
        residual = std::max(residual, std::abs(r));
      }
      dir[h] = -r;
    }
    return residual;
  };

  QState cur = evaluate(q_hat);
  std::vector<double> dir(n), trial_dir(n);
  double residual = first_order(cur, dir);

  // inverse of the dominant curvature: 1/tau from the distance term plus the
  // payoff curvature
  double pmax = 0.0;
  for (double v : payoff) pmax = std::max(pmax, std::abs(v));
  const double natural_step = tau / (1.0 + 0.5 * tau * pmax);

  double alpha = natural_step;
  int iter = 0;
  bool converged = false;

  for (; iter < opts.max_iterations; ++iter) {
    if (residual <= opts.tolerance) {
      converged = true;
      break;
    }
    double dir_norm2 = 0.0;
    for (double v : dir) dir_norm2 += v * v;

    bool accepted = false;
    double step = std::max(alpha, natural_step);
    for (int bt = 0; bt < 60; ++bt) {
      std::vector<double> trial(n);
      for (int h = 0; h < n; ++h) trial[h] = cur.q[h] + step * dir[h];
      QState cand = evaluate(retract(std::move(trial)));
      if (cand.q == cur.q) break;  // below representable resolution
      const double cand_residual = first_order(cand, trial_dir);
      // Armijo decrease, or a contraction of the stationarity residual once
      // objective differences drop below what doubles can certify
      const bool armijo = cand.value <= cur.value - 1e-4 * step * dir_norm2;
      const bool contraction = cand_residual <= 0.9 * residual &&
                               cand.value <= cur.value + 1e-14 * (1.0 + std::abs(cur.value));
      if (armijo || contraction) {
        cur = std::move(cand);
        dir = trial_dir;
        residual = cand_residual;
        alpha = std::min(step * 1.5, 8.0 * natural_step);
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) break;  // no certifiable progress at this precision
  }

  std::vector<double> lam(n);
  for (int h = 0; h < n; ++h) lam[h] = cur.q[h] * cur.q[h];
  ProxResult res{LabelDistribution(std::move(lam)), cur.value, iter, converged};
  return res;
}

ProxResult prox_hs(const std::vector<double>& x, const LabelDistribution& lambda_hat,
                   const EmpiricalMeasure& psi, double tau, const PayoffKernel& J,
                   HsConvention convention, const ProxOptions& opts) {
  const std::vector<double> p = payoff_profile(x, psi, J, lambda_hat.size());
  return prox_hs_payoff(p, lambda_hat, tau, convention, opts);
}

double el_residual_hs(const LabelDistribution& lambda_hat, const LabelDistribution& lambda_new,
                      double tau, const std::vector<double>& x, const EmpiricalMeasure& psi,
                      const PayoffKernel& J, const LabelMetricSpace& space) {
  const SignedLabelMeasure drift = replicator_operator(x, lambda_new, psi, J);
  std::vector<double> r(lambda_hat.size());
  for (int h = 0; h < lambda_hat.size(); ++h)
    r[h] = (lambda_new[h] - lambda_hat[h]) / tau - drift[h];
  return bl_norm(SignedLabelMeasure(std::move(r)), space);
}

Trajectory run_implicit_replicator(const EmpiricalMeasure& initial, const VelocityField& v,
                                   const PayoffKernel& J, const SchemeConfig& config) {
  config.validate();
  const double tau = config.tau();
  const int n = initial.label_count();

  std::vector<EmpiricalMeasure> nodes{initial};
  std::vector<EmpiricalMeasure> intermediates;
  for (int i = 0; i < config.k; ++i) {
    const EmpiricalMeasure& cur = nodes.back();
    std::vector<LabelDistribution> labels(cur.size(), LabelDistribution::uniform(n));
    std::vector<int> failed(cur.size(), 0);
    parallel_for(cur.size(), config.threads, [&](int a) {
      const auto& st = cur.agent(a);
      const std::vector<double> p = payoff_profile(st.x, cur, J, n);
      const ProxResult res = prox_hs_payoff(p, st.label, tau, config.hs_convention);
      if (!res.converged) failed[a] = 1;
      labels[a] = res.lambda_new;
    });
    for (int a = 0; a < cur.size(); ++a) {
      if (failed[a]) {
        throw NonConvergence("hellinger prox for agent " + std::to_string(a) + " at step " +
                             std::to_string(i));
      }
    }
    EmpiricalMeasure mid = intermediate_measure(cur, labels);
    auto xs = position_step(cur, mid, labels, v, tau, config.threads);
    std::vector<AgentState> agents;
    agents.reserve(cur.size());
    for (int a = 0; a < cur.size(); ++a) agents.push_back({std::move(xs[a]), labels[a]});
    intermediates.push_back(std::move(mid));
    nodes.emplace_back(std::move(agents), cur.weights());
  }
  return Trajectory(std::move(nodes), std::move(intermediates), config, config.k, std::nullopt);
}

}  // namespace labeldyn
