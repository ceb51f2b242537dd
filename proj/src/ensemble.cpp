#include "labeldyn/ensemble.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "labeldyn/errors.hpp"
#include "labeldyn/numerics.hpp"

namespace labeldyn {

EmpiricalMeasure::EmpiricalMeasure(std::vector<AgentState> agents, std::vector<double> weights)
    : agents_(std::move(agents)), weights_(std::move(weights)) {
  if (agents_.empty()) throw ContractViolation("empirical measure needs at least one agent");
  if (weights_.size() != agents_.size())
    throw ContractViolation("weight count does not match agent count");
  const int d = static_cast<int>(agents_[0].x.size());
  const int n = agents_[0].label.size();
  double total = 0.0;
  for (std::size_t a = 0; a < agents_.size(); ++a) {
    if (static_cast<int>(agents_[a].x.size()) != d || agents_[a].label.size() != n)
      throw ContractViolation("agents must share position and label dimensions");
    for (double v : agents_[a].x) {
      if (!std::isfinite(v)) throw ContractViolation("non-finite agent position");
    }
    if (weights_[a] <= 0.0) throw ContractViolation("agent weights must be positive");
    total += weights_[a];
  }
  if (std::abs(total - 1.0) > 1e-9)
    throw ContractViolation("agent weights sum to " + std::to_string(total));
  for (auto& w : weights_) w /= total;
}

EmpiricalMeasure EmpiricalMeasure::uniform(std::vector<AgentState> agents) {
  const std::size_t count = agents.size();
  return EmpiricalMeasure(std::move(agents), std::vector<double>(count, 1.0 / count));
}

double position_norm(const std::vector<double>& x) {
  double s = 0.0;
  for (double v : x) s += v * v;
  return std::sqrt(s);
}

double position_distance(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t j = 0; j < a.size(); ++j) {
    const double d = a[j] - b[j];
    s += d * d;
  }
  return std::sqrt(s);
}

std::vector<double> barycenter(const EmpiricalMeasure& mu) {
  std::vector<double> c(mu.dim(), 0.0);
  for (int a = 0; a < mu.size(); ++a) {
    for (int j = 0; j < mu.dim(); ++j) c[j] += mu.weight(a) * mu.agent(a).x[j];
  }
  return c;
}

double first_moment(const EmpiricalMeasure& mu, const LabelMetricSpace& space) {
  double s = 0.0;
  for (int a = 0; a < mu.size(); ++a) {
    const auto& st = mu.agent(a);
    std::vector<double> w = st.label.weights();
    s += mu.weight(a) * (position_norm(st.x) + bl_norm(SignedLabelMeasure(std::move(w)), space));
  }
  return s;
}

double support_radius(const EmpiricalMeasure& mu, const LabelMetricSpace& space) {
  double r = 0.0;
  for (int a = 0; a < mu.size(); ++a) {
    const auto& st = mu.agent(a);
    std::vector<double> w = st.label.weights();
    r = std::max(r,
                 position_norm(st.x) + bl_norm(SignedLabelMeasure(std::move(w)), space));
  }
  return r;
}

namespace detail {

double min_cost_transport(const std::vector<double>& supply, const std::vector<double>& demand,
                          const std::vector<std::vector<double>>& cost) {
  const int ns = static_cast<int>(supply.size());
  const int nd = static_cast<int>(demand.size());
  constexpr double inf = std::numeric_limits<double>::infinity();

  std::vector<double> rem_s = supply;
  std::vector<double> rem_d = demand;
  std::vector<std::vector<double>> flow(ns, std::vector<double>(nd, 0.0));
  std::vector<double> pot(ns + nd, 0.0);

  double total_left = 0.0;
  for (double v : rem_s) total_left += v;
  const double done_tol = 1e-13 * std::max(1.0, total_left);

  const int node_count = ns + nd;
  std::vector<double> dist(node_count);
  std::vector<int> parent(node_count);
  std::vector<char> visited(node_count);

  const long max_rounds = 40L * (ns + nd) + 64;
  long rounds = 0;
  while (total_left > done_tol) {
    if (++rounds > max_rounds) throw NonConvergence("transport augmentation limit exceeded");

    // Dijkstra over reduced costs from all sources with remaining supply.
    std::fill(dist.begin(), dist.end(), inf);
    std::fill(parent.begin(), parent.end(), -1);
    std::fill(visited.begin(), visited.end(), 0);
    for (int i = 0; i < ns; ++i) {
      if (rem_s[i] > 0.0) dist[i] = 0.0;
    }
    // The scan continues past the first deficit node: every reachable node
    // needs a finite distance for the potential update to stay dual feasible.
    int target = -1;
    for (;;) {
      int u = -1;
      double best = inf;
      for (int v = 0; v < node_count; ++v) {
        if (!visited[v] && dist[v] < best) {
          best = dist[v];
          u = v;
        }
      }
      if (u < 0) break;
      visited[u] = 1;
      if (u >= ns && rem_d[u - ns] > 0.0 && target < 0) target = u;
      if (u < ns) {
        for (int j = 0; j < nd; ++j) {
          const double rc = cost[u][j] + pot[u] - pot[ns + j];
          const double cand = dist[u] + std::max(0.0, rc);
          if (cand < dist[ns + j]) {
            dist[ns + j] = cand;
            parent[ns + j] = u;
          }
        }
      } else {
        const int j = u - ns;
        for (int i = 0; i < ns; ++i) {
          if (flow[i][j] > 0.0 && !visited[i]) {
            const double rc = -cost[i][j] + pot[u] - pot[i];
            const double cand = dist[u] + std::max(0.0, rc);
            if (cand < dist[i]) {
              dist[i] = cand;
              parent[i] = u;
            }
          }
        }
      }
    }
    if (target < 0) throw NonConvergence("transport problem is infeasible");

    for (int v = 0; v < node_count; ++v) {
      if (dist[v] < inf) pot[v] += std::min(dist[v], dist[target]);
    }

    // bottleneck along the augmenting path
    double delta = rem_d[target - ns];
    for (int v = target; parent[v] >= 0; v = parent[v]) {
      const int p = parent[v];
      if (v >= ns) {
        // forward arc p -> v has no capacity bound
      } else {
        delta = std::min(delta, flow[v][parent[v] - ns]);
      }
      if (p < ns && parent[p] < 0) delta = std::min(delta, rem_s[p]);
    }
    for (int v = target; parent[v] >= 0; v = parent[v]) {
      const int p = parent[v];
      if (v >= ns) {
        flow[p][v - ns] += delta;
      } else {
        flow[v][p - ns] -= delta;
      }
    }
    int root = target;
    while (parent[root] >= 0) root = parent[root];
    rem_s[root] -= delta;
    rem_d[target - ns] -= delta;
    total_left -= delta;
  }

  // optimality certificate: reduced costs nonnegative, active arcs tight
  double scale = 1.0;
  for (const auto& row : cost) {
    for (double c : row) scale = std::max(scale, std::abs(c));
  }
  double value = 0.0;
  for (int i = 0; i < ns; ++i) {
    for (int j = 0; j < nd; ++j) {
      const double rc = cost[i][j] + pot[i] - pot[ns + j];
      if (rc < -1e-9 * scale) throw NonConvergence("transport dual certificate failed");
      if (flow[i][j] > 1e-12 && std::abs(rc) > 1e-9 * scale)
        throw NonConvergence("transport slackness certificate failed");
      value += flow[i][j] * cost[i][j];
    }
  }
  return value;
}

}  // namespace detail

double wasserstein1(const EmpiricalMeasure& a, const EmpiricalMeasure& b,
                    const LabelMetricSpace& space, int threads) {
  if (a.dim() != b.dim() || a.label_count() != b.label_count())
    throw ContractViolation("wasserstein1: dimension mismatch");
  if (space.size() != a.label_count())
    throw ContractViolation("wasserstein1: metric dimension mismatch");

  const int n = a.label_count();
  const bool fast_two = (n == 2);
  const double d12 = fast_two ? space(0, 1) : 0.0;

  std::vector<std::vector<double>> cost(a.size(), std::vector<double>(b.size(), 0.0));
  parallel_for(a.size(), threads, [&](int i) {
    const auto& sa = a.agent(i);
    for (int j = 0; j < b.size(); ++j) {
      const auto& sb = b.agent(j);
      double label_cost;
      if (fast_two) {
        label_cost = bl_norm_two_labels_zero_sum(sa.label[0] - sb.label[0], d12);
      } else {
        label_cost = bl_norm(sa.label - sb.label, space);
      }
      cost[i][j] = position_distance(sa.x, sb.x) + label_cost;
    }
  });
  return detail::min_cost_transport(a.weights(), b.weights(), cost);
}

EmpiricalMeasure push_forward(const EmpiricalMeasure& mu,
                              const std::function<AgentState(const AgentState&)>& f) {
  std::vector<AgentState> agents;
  agents.reserve(mu.size());
  for (int a = 0; a < mu.size(); ++a) agents.push_back(f(mu.agent(a)));
  return EmpiricalMeasure(std::move(agents), mu.weights());
}

}  // namespace labeldyn
