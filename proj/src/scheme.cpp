#include "labeldyn/scheme.hpp"

#include <algorithm>
#include <cmath>

#include "labeldyn/errors.hpp"
#include "labeldyn/numerics.hpp"

namespace labeldyn {

void SchemeConfig::validate() const {
  if (!(T_final > 0.0)) throw ContractViolation("horizon must be positive");
  if (k < 1) throw ContractViolation("step count must be positive");
  double prev = 0.0;
  for (double t : snapshot_times) {
    if (t < prev - 1e-12 || t < -1e-12 || t > T_final + 1e-12)
      throw ContractViolation("snapshot times must be sorted within [0, T]");
    prev = t;
  }
  if (threads < 1) throw ContractViolation("thread count must be positive");
}

Trajectory::Trajectory(std::vector<EmpiricalMeasure> nodes,
                       std::vector<EmpiricalMeasure> intermediates, SchemeConfig config,
                       int completed_steps, std::optional<std::string> abort_reason)
    : nodes_(std::move(nodes)),
      intermediates_(std::move(intermediates)),
      config_(std::move(config)),
      completed_steps_(completed_steps),
      abort_reason_(std::move(abort_reason)) {
  if (nodes_.empty()) throw ContractViolation("trajectory without nodes");
  if (static_cast<int>(nodes_.size()) != completed_steps_ + 1)
    throw ContractViolation("trajectory node count does not match completed steps");
  if (intermediates_.size() + 1 != nodes_.size())
    throw ContractViolation("trajectory intermediate count mismatch");
}

int Trajectory::interval_of(double t) const {
  const double tau = config_.tau();
  const double span = final_time();
  if (t < -1e-12 || t > span + 1e-12)
    throw ContractViolation("time " + std::to_string(t) + " outside the covered span");
  int i = static_cast<int>(std::floor(std::min(t, span) / tau));
  i = std::clamp(i, 0, completed_steps_ - 1);
  return i;
}

EmpiricalMeasure Trajectory::at(double t) const {
  if (completed_steps_ == 0) return nodes_.front();
  const int i = interval_of(t);
  const double tau = config_.tau();
  const double theta = std::clamp((t - i * tau) / tau, 0.0, 1.0);
  if (theta == 0.0) return nodes_[i];
  if (theta == 1.0) return nodes_[i + 1];
  const EmpiricalMeasure& lo = nodes_[i];
  const EmpiricalMeasure& hi = nodes_[i + 1];
  std::vector<AgentState> agents;
  agents.reserve(lo.size());
  for (int a = 0; a < lo.size(); ++a) {
    const auto& sa = lo.agent(a);
    const auto& sb = hi.agent(a);
    std::vector<double> x(sa.x.size());
    for (std::size_t j = 0; j < x.size(); ++j) x[j] = (1.0 - theta) * sa.x[j] + theta * sb.x[j];
    std::vector<double> w(sa.label.size());
    for (int h = 0; h < sa.label.size(); ++h)
      w[h] = (1.0 - theta) * sa.label[h] + theta * sb.label[h];
    agents.push_back({std::move(x), LabelDistribution(std::move(w))});
  }
  return EmpiricalMeasure(std::move(agents), lo.weights());
}

double gronwall_radius(double r, double M_v, double T) {
  const double rp = 1.0 + (r + 3.0 * M_v * T) * std::exp(3.0 * M_v * T);
  return std::max(rp, r + 2.0 * M_v * (1.0 + rp) * T + 1.0);
}

bool step_size_guard(const LabelOperator& T, double R, double tau, int d, int n, int samples,
                     double safety) {
  const double delta = delta_estimate(T, R, samples, d, n);
  return tau * safety * delta <= 1.0;
}

std::vector<LabelDistribution> label_step_explicit(const EmpiricalMeasure& psi,
                                                   const LabelOperator& T, double tau,
                                                   int threads) {
  std::vector<std::vector<double>> raw(psi.size());
  std::vector<int> bad(psi.size(), -1);
  parallel_for(psi.size(), threads, [&](int a) {
    const auto& st = psi.agent(a);
    const SignedLabelMeasure drift = T.eval(st.x, st.label, psi);
    std::vector<double> w(st.label.size());
    for (int h = 0; h < st.label.size(); ++h) {
      w[h] = st.label[h] + tau * drift[h];
      if (w[h] < -1e-10) bad[a] = h;
    }
    raw[a] = std::move(w);
  });
  for (int a = 0; a < psi.size(); ++a) {
    if (bad[a] >= 0) {
      throw SimplexViolation("agent " + std::to_string(a) + " leaves the simplex at component " +
                             std::to_string(bad[a]) + " (weight " +
                             std::to_string(raw[a][bad[a]]) + "); reduce the step size");
    }
  }
  std::vector<LabelDistribution> out;
  out.reserve(psi.size());
  for (auto& w : raw) out.emplace_back(std::move(w));
  return out;
}

EmpiricalMeasure intermediate_measure(const EmpiricalMeasure& psi,
                                      const std::vector<LabelDistribution>& labels) {
  if (static_cast<int>(labels.size()) != psi.size())
    throw ContractViolation("intermediate measure: label list length mismatch");
  std::vector<AgentState> agents;
  agents.reserve(psi.size());
  for (int a = 0; a < psi.size(); ++a) agents.push_back({psi.agent(a).x, labels[a]});
  return EmpiricalMeasure(std::move(agents), psi.weights());
}

std::vector<std::vector<double>> position_step(const EmpiricalMeasure& psi,
                                               const EmpiricalMeasure& intermediate,
                                               const std::vector<LabelDistribution>& labels,
                                               const VelocityField& v, double tau, int threads) {
  if (static_cast<int>(labels.size()) != psi.size())
    throw ContractViolation("position step: label list length mismatch");
  std::vector<std::vector<double>> out(psi.size());
  std::vector<char> ok(psi.size(), 1);
  parallel_for(psi.size(), threads, [&](int a) {
    const auto& st = psi.agent(a);
    // velocity at the old position, the new label, the transported measure
    const std::vector<double> vel = v.eval(st.x, labels[a], intermediate);
    std::vector<double> x(st.x.size());
    for (std::size_t j = 0; j < x.size(); ++j) {
      x[j] = st.x[j] + tau * vel[j];
      if (!std::isfinite(x[j])) ok[a] = 0;
    }
    out[a] = std::move(x);
  });
  for (int a = 0; a < psi.size(); ++a) {
    if (!ok[a]) throw FieldEvaluation("non-finite velocity for agent " + std::to_string(a));
  }
  return out;
}

Trajectory run_explicit(const EmpiricalMeasure& initial, const DynamicsFields& fields,
                        const SchemeConfig& config, const LabelMetricSpace& space) {
  config.validate();
  const double tau = config.tau();
  const double r = support_radius(initial, space);
  const double R = gronwall_radius(r, fields.velocity.growth, config.T_final);
  // 2x safety on the sampled positivity margin
  if (!step_size_guard(fields.label_drift, R, tau, initial.dim(), initial.label_count(), 10000,
                       2.0)) {
    throw SimplexViolation("step size " + std::to_string(tau) +
                           " fails the positivity guard at radius " + std::to_string(R) +
                           "; increase k");
  }

  std::vector<EmpiricalMeasure> nodes{initial};
  std::vector<EmpiricalMeasure> intermediates;
  nodes.reserve(config.k + 1);
  intermediates.reserve(config.k);
  for (int i = 0; i < config.k; ++i) {
    const EmpiricalMeasure& cur = nodes.back();
    std::vector<LabelDistribution> labels;
    try {
      labels = label_step_explicit(cur, fields.label_drift, tau, config.threads);
    } catch (const SimplexViolation& e) {
      throw SimplexViolation("step " + std::to_string(i) + ": " + e.what());
    }
    EmpiricalMeasure mid = intermediate_measure(cur, labels);
    auto xs = position_step(cur, mid, labels, fields.velocity, tau, config.threads);
    std::vector<AgentState> agents;
    agents.reserve(cur.size());
    for (int a = 0; a < cur.size(); ++a) agents.push_back({std::move(xs[a]), labels[a]});
    intermediates.push_back(std::move(mid));
    nodes.emplace_back(std::move(agents), cur.weights());
  }
  return Trajectory(std::move(nodes), std::move(intermediates), config, config.k, std::nullopt);
}

std::vector<TestFunction> test_function_dictionary(int d, int n) {
  std::vector<TestFunction> dict;
  auto zeros_x = [d](const std::vector<double>&, const LabelDistribution&) {
    return std::vector<double>(d, 0.0);
  };
  auto zeros_l = [n](const std::vector<double>&, const LabelDistribution&) {
    return std::vector<double>(n, 0.0);
  };

  dict.push_back({"one",
                  [](const std::vector<double>&, const LabelDistribution&) { return 1.0; },
                  zeros_x, zeros_l});

  for (int j = 0; j < d; ++j) {
    dict.push_back({"x_" + std::to_string(j),
                    [j](const std::vector<double>& x, const LabelDistribution&) { return x[j]; },
                    [d, j](const std::vector<double>&, const LabelDistribution&) {
                      std::vector<double> g(d, 0.0);
                      g[j] = 1.0;
                      return g;
                    },
                    zeros_l});
  }
  for (int h = 0; h < n; ++h) {
    dict.push_back({"lambda_" + std::to_string(h),
                    [h](const std::vector<double>&, const LabelDistribution& l) { return l[h]; },
                    zeros_x,
                    [n, h](const std::vector<double>&, const LabelDistribution&) {
                      std::vector<double> g(n, 0.0);
                      g[h] = 1.0;
                      return g;
                    }});
  }
  for (int j = 0; j < d; ++j) {
    for (int h = 0; h < n; ++h) {
      dict.push_back({"x_" + std::to_string(j) + "*lambda_" + std::to_string(h),
                      [j, h](const std::vector<double>& x, const LabelDistribution& l) {
                        return x[j] * l[h];
                      },
                      [d, j, h](const std::vector<double>&, const LabelDistribution& l) {
                        std::vector<double> g(d, 0.0);
                        g[j] = l[h];
                        return g;
                      },
                      [n, j, h](const std::vector<double>& x, const LabelDistribution&) {
                        std::vector<double> g(n, 0.0);
                        g[h] = x[j];
                        return g;
                      }});
    }
  }
  dict.push_back({"bump",
                  [](const std::vector<double>& x, const LabelDistribution&) {
                    double s = 0.0;
                    for (double v : x) s += v * v;
                    return std::exp(-0.5 * s);
                  },
                  [d](const std::vector<double>& x, const LabelDistribution&) {
                    double s = 0.0;
                    for (double v : x) s += v * v;
                    const double e = std::exp(-0.5 * s);
                    std::vector<double> g(d);
                    for (int j = 0; j < d; ++j) g[j] = -x[j] * e;
                    return g;
                  },
                  zeros_l});
  return dict;
}

double weak_residual(const Trajectory& traj, const DynamicsFields& fields, const TestFunction& phi,
                     double t) {
  const double tau = traj.config().tau();
  const int i = traj.interval_of(t);
  const double off = t - i * tau;
  if (off < 1e-12 * tau || off > tau * (1.0 - 1e-12))
    throw ContractViolation("weak residual is undefined at interpolation nodes");

  const EmpiricalMeasure psi_t = traj.at(t);
  const EmpiricalMeasure& lo = traj.node(i);
  const EmpiricalMeasure& hi = traj.node(i + 1);

  double residual = 0.0;
  for (int a = 0; a < psi_t.size(); ++a) {
    const auto& st = psi_t.agent(a);
    const auto& sa = lo.agent(a);
    const auto& sb = hi.agent(a);

    const std::vector<double> gx = phi.grad_x(st.x, st.label);
    const std::vector<double> gl = phi.grad_lambda(st.x, st.label);

    const std::vector<double> vel = fields.velocity.eval(st.x, st.label, psi_t);
    const SignedLabelMeasure drift = fields.label_drift.eval(st.x, st.label, psi_t);

    double term = 0.0;
    for (std::size_t j = 0; j < gx.size(); ++j) {
      const double xdot = (sb.x[j] - sa.x[j]) / tau;
      term += gx[j] * (xdot - vel[j]);
    }
    for (int h = 0; h < st.label.size(); ++h) {
      const double ldot = (sb.label[h] - sa.label[h]) / tau;
      term += gl[h] * (ldot - drift[h]);
    }
    residual += psi_t.weight(a) * term;
  }
  return residual;
}

}  // namespace labeldyn
