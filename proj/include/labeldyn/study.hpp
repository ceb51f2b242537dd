#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "labeldyn/markov_prox.hpp"
#include "labeldyn/numerics.hpp"
#include "labeldyn/scenario.hpp"

namespace labeldyn {

struct StudyRow {
  int k = 0;
  double tau = 0.0;
  double w1_gap = 0.0;
  double residual_max = 0.0;
  double residual_mean = 0.0;
  double runtime_s = 0.0;
};

struct StudyReport {
  std::string study;     // convergence | residual
  std::string scenario;
  std::string mode;
  std::vector<StudyRow> rows;
  // per-row samples backing the bootstrap (snapshot gaps or binned residual maxima)
  std::vector<std::vector<double>> row_samples;
  SlopeFit slope;
  double slope_ci_low = 0.0;
  double slope_ci_high = 0.0;
  bool ci_valid = false;
  double excluded_fraction = 0.0;  // residual samples outside the proximity hypothesis
  std::string notes;
};

struct StudyOptions {
  bool oracle = false;  // compare against the closed form instead of the 2k run
  int threads = 1;
  LabelMode mode = LabelMode::Explicit;
  bool mode_overridden = false;
  std::uint64_t seed = 0;
  bool seed_overridden = false;
};

// Runs the configured scheme once; the label substep follows `mode`.
Trajectory run_scenario(const Scenario& scenario, int k, LabelMode mode, int threads = 1,
                        std::uint64_t seed = 0, bool seed_overridden = false);

// Cauchy (or oracle) gaps g(k) = sup over snapshots of W1(Psi^k, Psi^{2k}).
StudyReport convergence_study(const Scenario& scenario, const std::vector<int>& ks,
                              const StudyOptions& opts = {});

// Weak-form residuals (explicit mode) or per-step Euler-Lagrange residuals
// (proximal modes), aggregated over the run.
StudyReport residual_study(const Scenario& scenario, const std::vector<int>& ks,
                           const StudyOptions& opts = {});

void export_report(const StudyReport& report, const std::string& format, const std::string& path);
std::string report_to_csv(const StudyReport& report);
std::string report_to_json_text(const StudyReport& report);

void export_trajectory(const Trajectory& traj, const std::vector<double>& snapshot_times,
                       const std::string& format, const std::string& path);
std::string trajectory_to_csv(const Trajectory& traj, const std::vector<double>& snapshot_times);

// Metric gap below which rows are excluded from slope fits.
double solver_floor();

}  // namespace labeldyn
