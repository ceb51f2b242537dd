#pragma once

#include <functional>
#include <vector>

#include "labeldyn/label_geometry.hpp"

namespace labeldyn {

// State of one agent: position in R^d and mixed strategy over the labels.
struct AgentState {
  std::vector<double> x;
  LabelDistribution label;
};

// Finite weighted collection of agent states; weights sum to one.
class EmpiricalMeasure {
  public:
  EmpiricalMeasure(std::vector<AgentState> agents, std::vector<double> weights);
  static EmpiricalMeasure uniform(std::vector<AgentState> agents);

  int size() const { return static_cast<int>(agents_.size()); }
  int dim() const { return static_cast<int>(agents_[0].x.size()); }
  int label_count() const { return agents_[0].label.size(); }
  const AgentState& agent(int a) const { return agents_[a]; }
  double weight(int a) const { return weights_[a]; }
  const std::vector<double>& weights() const { return weights_; }

  private:
  std::vector<AgentState> agents_;
  std::vector<double> weights_;
};

double position_norm(const std::vector<double>& x);
double position_distance(const std::vector<double>& a, const std::vector<double>& b);
std::vector<double> barycenter(const EmpiricalMeasure& mu);

// m1 under ||y|| = |x| + ||lambda||_BL
double first_moment(const EmpiricalMeasure& mu, const LabelMetricSpace& space);
double support_radius(const EmpiricalMeasure& mu, const LabelMetricSpace& space);

// Exact Kantorovich-Rubinstein distance with ground cost
// |x_a - x_b| + ||lambda_a - lambda_b||_BL.
double wasserstein1(const EmpiricalMeasure& a, const EmpiricalMeasure& b,
                    const LabelMetricSpace& space, int threads = 1);

EmpiricalMeasure push_forward(const EmpiricalMeasure& mu,
                              const std::function<AgentState(const AgentState&)>& f);

namespace detail {
// Exact min-cost transport between weighted point sets given the dense cost
// matrix, by successive shortest augmenting paths with potentials. The
// returned plan satisfies complementary slackness to 1e-9.
double min_cost_transport(const std::vector<double>& supply, const std::vector<double>& demand,
                          const std::vector<std::vector<double>>& cost);
}  // namespace detail

}  // namespace labeldyn
