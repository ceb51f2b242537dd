#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "labeldyn/ensemble.hpp"
#include "labeldyn/fields.hpp"

namespace labeldyn {

enum class LabelMode { Explicit, ProxHellinger, ProxMarkov };
enum class HsConvention { Geodesic, Literal };

struct SchemeConfig {
  double T_final = 1.0;
  int k = 16;
  LabelMode label_mode = LabelMode::Explicit;
  std::vector<double> snapshot_times;  // sorted, within [0, T_final]
  HsConvention hs_convention = HsConvention::Geodesic;
  int threads = 1;

  double tau() const { return T_final / k; }
  void validate() const;
};

// Velocity and label drift that steer one run, with declared growth bounds.
struct DynamicsFields {
  VelocityField velocity;
  LabelOperator label_drift;
};

// Node-indexed record of one run. Agents are tracked, never resampled, so
// every stored measure shares the weight vector of the initial datum.
// Evaluation at interior times blends the two surrounding nodes agent-wise.
class Trajectory {
  public:
  Trajectory(std::vector<EmpiricalMeasure> nodes, std::vector<EmpiricalMeasure> intermediates,
             SchemeConfig config, int completed_steps, std::optional<std::string> abort_reason);

  const SchemeConfig& config() const { return config_; }
  int completed_steps() const { return completed_steps_; }
  bool terminated_early() const { return completed_steps_ < config_.k; }
  const std::optional<std::string>& abort_reason() const { return abort_reason_; }
  // Horizon actually covered; equals T_final for complete runs.
  double final_time() const { return completed_steps_ * config_.tau(); }

  double node_time(int i) const { return i * config_.tau(); }
  const EmpiricalMeasure& node(int i) const { return nodes_[i]; }
  const EmpiricalMeasure& intermediate(int i) const { return intermediates_[i]; }
  int node_count() const { return static_cast<int>(nodes_.size()); }

  EmpiricalMeasure at(double t) const;
  // Index i with t in [t_i, t_{i+1}); rejects t outside the covered span.
  int interval_of(double t) const;

  private:
  std::vector<EmpiricalMeasure> nodes_;
  std::vector<EmpiricalMeasure> intermediates_;
  SchemeConfig config_;
  int completed_steps_;
  std::optional<std::string> abort_reason_;
};

// Gronwall envelope for the support radius: the position bound of the scheme
// run up to time T from initial radius r under growth constant M_v.
double gronwall_radius(double r, double M_v, double T);

// True when tau * safety * delta_estimate(T, R) <= 1.
bool step_size_guard(const LabelOperator& T, double R, double tau, int d, int n,
                     int samples = 10000, double safety = 1.0);

std::vector<LabelDistribution> label_step_explicit(const EmpiricalMeasure& psi,
                                                   const LabelOperator& T, double tau,
                                                   int threads = 1);

EmpiricalMeasure intermediate_measure(const EmpiricalMeasure& psi,
                                      const std::vector<LabelDistribution>& labels);

std::vector<std::vector<double>> position_step(const EmpiricalMeasure& psi,
                                               const EmpiricalMeasure& intermediate,
                                               const std::vector<LabelDistribution>& labels,
                                               const VelocityField& v, double tau,
                                               int threads = 1);

Trajectory run_explicit(const EmpiricalMeasure& initial, const DynamicsFields& fields,
                        const SchemeConfig& config, const LabelMetricSpace& space);

// C^1 test function with hand-coded gradients.
struct TestFunction {
  std::string name;
  std::function<double(const std::vector<double>&, const LabelDistribution&)> value;
  std::function<std::vector<double>(const std::vector<double>&, const LabelDistribution&)> grad_x;
  std::function<std::vector<double>(const std::vector<double>&, const LabelDistribution&)>
      grad_lambda;
};

// {1, x_j, lambda_h, x_j lambda_h, gaussian bump in x}
std::vector<TestFunction> test_function_dictionary(int d, int n);

// Defect of the interpolated trajectory in the weak continuity equation at an
// interior time t: d/dt of the phi-moment minus the drift pairing.
double weak_residual(const Trajectory& traj, const DynamicsFields& fields, const TestFunction& phi,
                     double t);

}  // namespace labeldyn
