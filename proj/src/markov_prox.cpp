#include "labeldyn/markov_prox.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "labeldyn/errors.hpp"
#include "labeldyn/numerics.hpp"

namespace labeldyn {

namespace {

Eigen::VectorXd to_eigen(const LabelDistribution& lam) {
  Eigen::VectorXd v(lam.size());
  for (int h = 0; h < lam.size(); ++h) v[h] = lam[h];
  return v;
}

LabelDistribution to_label(const Eigen::VectorXd& v) {
  return LabelDistribution(std::vector<double>(v.data(), v.data() + v.size()));
}

double entropy_vec(const Eigen::VectorXd& lam, const MarkovGeometry& geom) {
  double e = 0.0;
  for (int h = 0; h < lam.size(); ++h) {
    if (lam[h] > 0.0) e += lam[h] * std::log(lam[h] / geom.sigma()[h]);
  }
  return e;
}

}  // namespace

MarginMonitor::MarginMonitor(double delta_, double eta_) : delta(delta_), eta(eta_) {
  if (!(eta > delta) || !(delta > 0.0))
    throw ContractViolation("margin monitor needs eta > delta > 0");
}

ProxResult prox_markov_surrogate(const LabelDistribution& lambda_hat,
                                 const LabelDistribution& lambda_ref, const MarkovGeometry& geom,
                                 double tau) {
  if (!(tau > 0.0)) throw ContractViolation("prox step size must be positive");
  const int n = geom.size();
  if (lambda_hat.size() != n || lambda_ref.size() != n)
    throw ContractViolation("surrogate prox: dimension mismatch");
  if (lambda_ref.min_weight() < 1e-12)
    throw NearSingularMetric("surrogate prox reference point too close to the boundary");

  const Eigen::MatrixXd A = metric_tensor(lambda_ref, geom);
  const Eigen::MatrixXd B = zero_sum_basis(n);
  const Eigen::VectorXd hat = to_eigen(lambda_hat);

  // entropy repels from the boundary, so the minimizer is interior; start
  // from an interior lift of lambda_hat
  Eigen::VectorXd lam = hat;
  if (lam.minCoeff() < 1e-12) {
    lam = 0.999999 * lam + (1e-6 / n) * Eigen::VectorXd::Ones(n);
  }

  auto objective = [&](const Eigen::VectorXd& v) {
    const Eigen::VectorXd diff = v - hat;
    return entropy_vec(v, geom) + diff.dot(A * diff) / (2.0 * tau);
  };

  double value = objective(lam);
  int iter = 0;
  bool converged = false;
  for (; iter < 200; ++iter) {
    Eigen::VectorXd grad(n);
    for (int h = 0; h < n; ++h) grad[h] = std::log(lam[h] / geom.sigma()[h]) + 1.0;
    grad += A * (lam - hat) / tau;
    const Eigen::VectorXd g_r = B.transpose() * grad;
    if (g_r.lpNorm<Eigen::Infinity>() <= 1e-12 * std::max(1.0, 1.0 / tau)) {
      converged = true;
      break;
    }
    Eigen::MatrixXd H = A / tau;
    for (int h = 0; h < n; ++h) H(h, h) += 1.0 / lam[h];
    const Eigen::MatrixXd H_r = B.transpose() * H * B;
    Eigen::LLT<Eigen::MatrixXd> llt(H_r);
    if (llt.info() != Eigen::Success)
      throw NearSingularMetric("surrogate prox Hessian is not positive definite");
    const Eigen::VectorXd step_r = llt.solve(-g_r);
    const Eigen::VectorXd dir = B * step_r;

    // fraction-to-boundary, then Armijo
    double t_max = 1.0;
    for (int h = 0; h < n; ++h) {
      if (dir[h] < 0.0) t_max = std::min(t_max, -0.99 * lam[h] / dir[h]);
    }
    const double slope = g_r.dot(step_r);
    double t = t_max;
    bool moved = false;
    for (int bt = 0; bt < 60; ++bt) {
      const Eigen::VectorXd trial = lam + t * dir;
      if (trial.minCoeff() > 0.0) {
        const double trial_value = objective(trial);
        if (trial_value <= value + 1e-4 * t * slope) {
          lam = trial;
          value = trial_value;
          moved = true;
          break;
        }
      }
      t *= 0.5;
    }
    if (!moved) break;
  }
  return ProxResult{to_label(lam), value, iter, converged};
}

namespace {

struct FullObjective {
  const MarkovGeometry& geom;
  const LabelDistribution& hat;
  double tau;
  const MarkovProxOptions& opts;

  double value(const Eigen::VectorXd& lam) const {
    const GeodesicPath p = geodesic_distance(hat, to_label(lam), geom, opts.segments);
    return entropy_vec(lam, geom) + p.length * p.length / (2.0 * tau);
  }

  Eigen::VectorXd gradient(const Eigen::VectorXd& lam, double* value_out) const {
    const GeodesicWithGradient g =
        geodesic_with_gradient(hat, to_label(lam), geom, opts.segments);
    Eigen::VectorXd grad(geom.size());
    for (int h = 0; h < geom.size(); ++h)
      grad[h] = std::log(lam[h] / geom.sigma()[h]) + 1.0;
    grad.array() -= grad.mean();
    grad += (g.path.length / tau) * g.endpoint_gradient;
    if (value_out)
      *value_out = entropy_vec(lam, geom) + g.path.length * g.path.length / (2.0 * tau);
    return grad;
  }
};

}  // namespace

ProxResult prox_markov_full(const LabelDistribution& lambda_hat, const MarkovGeometry& geom,
                            double tau, const MarkovProxOptions& opts) {
  if (!(tau > 0.0)) throw ContractViolation("prox step size must be positive");
  const int n = geom.size();
  if (lambda_hat.size() != n) throw ContractViolation("full prox: dimension mismatch");
  if (lambda_hat.min_weight() < 1e-12)
    throw NearSingularMetric("full prox needs an interior starting label");

  const FullObjective F{geom, lambda_hat, tau, opts};

  // surrogate solution as the outer starting candidate
  Eigen::VectorXd lam = to_eigen(prox_markov_surrogate(lambda_hat, lambda_hat, geom, tau).lambda_new);
  double value = 0.0;
  Eigen::VectorXd grad = F.gradient(lam, &value);

  const double hat_value = entropy_vec(to_eigen(lambda_hat), geom);
  if (value > hat_value) {
    lam = to_eigen(lambda_hat);
    grad = F.gradient(lam, &value);
  }

  int iter = 0;
  bool converged = false;
  double step = tau;
  for (; iter < opts.max_iterations; ++iter) {
    if (grad.lpNorm<Eigen::Infinity>() <= opts.tolerance) {
      converged = true;
      break;
    }
    const double g2 = grad.squaredNorm();
    double t = step;
    bool moved = false;
    for (int bt = 0; bt < 60; ++bt) {
      Eigen::VectorXd trial = lam - t * grad;
      if (trial.minCoeff() > 1e-12) {
        double trial_value = 0.0;
        const Eigen::VectorXd trial_grad = F.gradient(trial, &trial_value);
        if (trial_value <= value - 1e-4 * t * g2) {
          lam = std::move(trial);
          value = trial_value;
          grad = trial_grad;
          step = std::min(t * 1.5, 1e3 * tau);
          moved = true;
          break;
        }
      }
      t *= 0.5;
    }
    if (!moved) break;
  }

  if (n == 2) {
    // one-dimensional polish: bisect the projected gradient to a sign change
    const Eigen::Vector2d dir(M_SQRT1_2, -M_SQRT1_2);
    auto slope = [&](double z) {
      Eigen::VectorXd v = lam + z * Eigen::VectorXd(dir);
      if (v.minCoeff() <= 1e-12) return std::numeric_limits<double>::quiet_NaN();
      return F.gradient(v, nullptr).dot(Eigen::VectorXd(dir));
    };
    double s0 = slope(0.0);
    if (std::isfinite(s0) && s0 != 0.0) {
      const double sign = s0 > 0.0 ? -1.0 : 1.0;
      double hi = 0.0, width = 1e-8;
      double s_hi = s0;
      for (int it = 0; it < 60; ++it) {
        const double cand = hi + sign * width;
        const double sc = slope(cand);
        if (!std::isfinite(sc)) break;
        hi = cand;
        s_hi = sc;
        if (s_hi == 0.0 || (s_hi > 0.0) != (s0 > 0.0)) break;
        width *= 2.0;
      }
      if (std::isfinite(s_hi) && (s_hi > 0.0) != (s0 > 0.0)) {
        double lo = 0.0;
        for (int it = 0; it < 100 && std::abs(hi - lo) > 1e-14; ++it) {
          const double mid = 0.5 * (lo + hi);
          const double sm = slope(mid);
          if (!std::isfinite(sm)) break;
          if ((sm > 0.0) == (s0 > 0.0)) {
            lo = mid;
          } else {
            hi = mid;
          }
        }
        const double z = 0.5 * (lo + hi);
        Eigen::VectorXd polished = lam + z * Eigen::VectorXd(dir);
        if (polished.minCoeff() > 1e-12) {
          const double polished_value = F.value(polished);
          if (polished_value <= value + 1e-12) {
            lam = polished;
            value = polished_value;
            converged = true;
          }
        }
      }
    }
  }

  return ProxResult{to_label(lam), value, iter, converged};
}

double el_residual_markov(const LabelDistribution& lambda_hat, const LabelDistribution& lambda_new,
                          const MarkovGeometry& geom, double tau) {
  const Eigen::VectorXd hat = to_eigen(lambda_hat);
  const Eigen::VectorXd next = to_eigen(lambda_new);
  const Eigen::VectorXd r = (next - hat) / tau - geom.Q() * next;
  return r.norm();
}

bool proximity_condition(const LabelDistribution& l1, const LabelDistribution& l2, double delta,
                         double c_ratio_sqrt) {
  const int n = l1.size();
  const double face_scale = std::sqrt(1.0 - 1.0 / n);
  double dist1 = std::numeric_limits<double>::infinity();
  double dist2 = dist1;
  for (int h = 0; h < n; ++h) {
    dist1 = std::min(dist1, (l1[h] - delta) / face_scale);
    dist2 = std::min(dist2, (l2[h] - delta) / face_scale);
  }
  const Eigen::VectorXd gap = to_eigen(l1) - to_eigen(l2);
  return c_ratio_sqrt * gap.norm() < std::min(dist1, dist2);
}

Trajectory run_implicit_markov(const EmpiricalMeasure& initial, const VelocityField& v,
                               const RateMatrixField& rates, const SchemeConfig& config,
                               MarginMonitor& monitor) {
  config.validate();
  if (!(monitor.eta > monitor.delta) || !(monitor.delta > 0.0))
    throw ContractViolation("margin monitor needs eta > delta > 0");
  const double tau = config.tau();
  const int n = initial.label_count();

  for (int a = 0; a < initial.size(); ++a) {
    if (initial.agent(a).label.min_weight() < monitor.eta - 1e-12) {
      throw ScenarioError("invalid initial datum: agent " + std::to_string(a) +
                          " starts outside the eta-interior (eta = " +
                          std::to_string(monitor.eta) + ")");
    }
  }

  std::vector<EmpiricalMeasure> nodes{initial};
  std::vector<EmpiricalMeasure> intermediates;
  std::optional<std::string> abort;
  for (int i = 0; i < config.k && !abort; ++i) {
    const EmpiricalMeasure& cur = nodes.back();
    std::vector<LabelDistribution> labels(cur.size(), LabelDistribution::uniform(n));
    std::vector<int> failed(cur.size(), 0);
    parallel_for(cur.size(), config.threads, [&](int a) {
      const auto& st = cur.agent(a);
      const MarkovGeometry geom(rates.eval(st.x, cur));
      ProxResult res = [&]() {
        if (n <= 2) return prox_markov_full(st.label, geom, tau);
        // surrogate with a single fixed-point refresh of the reference metric
        ProxResult first = prox_markov_surrogate(st.label, st.label, geom, tau);
        return prox_markov_surrogate(st.label, first.lambda_new, geom, tau);
      }();
      if (!res.converged) failed[a] = 1;
      labels[a] = res.lambda_new;
    });
    for (int a = 0; a < cur.size(); ++a) {
      if (failed[a])
        throw NonConvergence("markov prox for agent " + std::to_string(a) + " at step " +
                             std::to_string(i));
    }

    // margin check before accepting the step; deterministic agent order
    for (int a = 0; a < cur.size(); ++a) {
      if (labels[a].min_weight() < monitor.delta) {
        monitor.violated_at = std::make_pair(i, a);
        abort = "margin violation at step " + std::to_string(i) + ", agent " + std::to_string(a);
        break;
      }
    }
    if (abort) break;

    EmpiricalMeasure mid = intermediate_measure(cur, labels);
    auto xs = position_step(cur, mid, labels, v, tau, config.threads);
    std::vector<AgentState> agents;
    agents.reserve(cur.size());
    for (int a = 0; a < cur.size(); ++a) agents.push_back({std::move(xs[a]), labels[a]});
    intermediates.push_back(std::move(mid));
    nodes.emplace_back(std::move(agents), cur.weights());
  }
  const int completed = static_cast<int>(nodes.size()) - 1;
  return Trajectory(std::move(nodes), std::move(intermediates), config, completed, abort);
}

}  // namespace labeldyn
