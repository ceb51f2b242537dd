#pragma once

#include <cstdint>
#include <nlohmann/json_fwd.hpp>
#include <string>
#include <vector>

#include "labeldyn/ensemble.hpp"
#include "labeldyn/fields.hpp"
#include "labeldyn/scheme.hpp"

namespace labeldyn {

// Validated experiment description. Fields are rebuilt from the recorded
// specs on demand so the scenario itself stays a plain value.
struct Scenario {
  std::string name;
  int d = 1;
  int n = 2;
  int agent_count = 1;
  bool metric_discrete = true;
  std::vector<double> metric_matrix;  // row-major when not discrete

  std::string velocity_kind;
  std::vector<std::vector<double>> drift_coefficients;
  double attraction_kappa = 0.0;

  bool markov = false;  // otherwise replicator
  // replicator kernels
  std::string kernel_kind;
  double kernel_constant = 0.0;
  double kernel_amplitude = 1.0;
  double kernel_length_scale = 1.0;
  std::vector<std::vector<double>> kernel_matrix;
  std::vector<double> kernel_payoff_vector;
  // markov rates
  std::string rate_kind;
  std::vector<double> rate_matrix;  // row-major n x n
  double rate_damping = 0.0;        // spatial damping strength

  std::string position_law;  // uniform_box | uniform_ball | point
  double position_halfwidth = 1.0;
  double position_radius = 1.0;
  std::vector<double> position_point;
  std::string label_law;  // dirichlet | fixed
  double dirichlet_alpha = 1.0;
  double label_margin = 0.1;
  std::vector<double> fixed_label;

  double horizon = 1.0;
  std::vector<double> snapshot_times;
  HsConvention hs_convention = HsConvention::Geodesic;
  double delta = 0.01;
  double eta = 0.1;
  std::uint64_t seed = 1;
  LabelMode default_mode = LabelMode::Explicit;

  LabelMetricSpace make_metric() const;
  VelocityField make_velocity() const;
  PayoffKernel make_kernel() const;      // replicator scenarios only
  RateMatrixField make_rates() const;    // markov scenarios only
  // True when the rate field does not depend on (x, Psi); enables the
  // closed-form reference in studies.
  bool constant_dynamics() const;
};

Scenario parse_scenario(const nlohmann::json& j);
Scenario load_scenario(const std::string& path);

EmpiricalMeasure sample_initial(const Scenario& scenario, std::uint64_t seed);

LabelMode parse_label_mode(const std::string& text);
std::string label_mode_name(LabelMode mode);

}  // namespace labeldyn
