#include "labeldyn/study.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <nlohmann/json.hpp>

#include "labeldyn/errors.hpp"
#include "labeldyn/numerics.hpp"
#include "labeldyn/rng.hpp"

namespace labeldyn {

using nlohmann::json;

double solver_floor() { return 1e-11; }

namespace {

double now_seconds() {
  return std::chrono::duration<double>(std::chrono::steady_clock::now().time_since_epoch())
      .count();
}

SchemeConfig config_for(const Scenario& scn, int k, LabelMode mode, int threads) {
  SchemeConfig cfg;
  cfg.T_final = scn.horizon;
  cfg.k = k;
  cfg.label_mode = mode;
  cfg.snapshot_times = scn.snapshot_times;
  cfg.hs_convention = scn.hs_convention;
  cfg.threads = threads;
  cfg.validate();
  return cfg;
}

// slope CI by resampling the per-row sample axis (snapshot times or time bins)
void bootstrap_slope(StudyReport& report) {
  std::vector<double> taus, metric;
  std::vector<const std::vector<double>*> samples;
  for (std::size_t r = 0; r < report.rows.size(); ++r) {
    taus.push_back(report.rows[r].tau);
    metric.push_back(report.study == "convergence" ? report.rows[r].w1_gap
                                                   : report.rows[r].residual_max);
    samples.push_back(&report.row_samples[r]);
  }
  report.slope = fit_loglog(taus, metric, 10.0 * solver_floor());
  if (!report.slope.valid || samples.empty()) return;

  const std::size_t axis = samples.front()->size();
  for (const auto* s : samples) {
    if (s->size() != axis) return;  // heterogenous sampling; skip the CI
  }
  if (axis < 2) return;

  Rng rng(0xb007ULL);
  std::vector<double> slopes;
  slopes.reserve(200);
  std::vector<double> resampled(taus.size());
  for (int b = 0; b < 200; ++b) {
    std::vector<int> pick(axis);
    for (auto& p : pick) p = rng.uniform_int(static_cast<int>(axis));
    for (std::size_t r = 0; r < taus.size(); ++r) {
      double mx = 0.0;
      for (int p : pick) mx = std::max(mx, (*samples[r])[p]);
      resampled[r] = mx;
    }
    const SlopeFit f = fit_loglog(taus, resampled, 10.0 * solver_floor());
    if (f.valid) slopes.push_back(f.slope);
  }
  if (slopes.size() < 20) return;
  std::sort(slopes.begin(), slopes.end());
  report.slope_ci_low = slopes[static_cast<std::size_t>(0.025 * (slopes.size() - 1))];
  report.slope_ci_high = slopes[static_cast<std::size_t>(0.975 * (slopes.size() - 1))];
  report.ci_valid = true;
}

}  // namespace

Trajectory run_scenario(const Scenario& scenario, int k, LabelMode mode, int threads,
                        std::uint64_t seed, bool seed_overridden) {
  const std::uint64_t s = seed_overridden ? seed : scenario.seed;
  const EmpiricalMeasure initial = sample_initial(scenario, s);
  const SchemeConfig cfg = config_for(scenario, k, mode, threads);
  const LabelMetricSpace space = scenario.make_metric();
  const VelocityField v = scenario.make_velocity();

  switch (mode) {
    case LabelMode::Explicit: {
      DynamicsFields fields{v, scenario.markov
                                   ? make_markov_label_operator(scenario.make_rates())
                                   : make_replicator_label_operator(scenario.make_kernel(),
                                                                    scenario.n)};
      return run_explicit(initial, fields, cfg, space);
    }
    case LabelMode::ProxHellinger: {
      if (scenario.markov) throw ScenarioError("prox-hellinger needs replicator dynamics");
      return run_implicit_replicator(initial, v, scenario.make_kernel(), cfg);
    }
    case LabelMode::ProxMarkov: {
      if (!scenario.markov) throw ScenarioError("prox-markov needs markov dynamics");
      MarginMonitor monitor(scenario.delta, scenario.eta);
      return run_implicit_markov(initial, v, scenario.make_rates(), cfg, monitor);
    }
  }
  throw ScenarioError("unreachable mode");
}

StudyReport convergence_study(const Scenario& scenario, const std::vector<int>& ks,
                              const StudyOptions& opts) {
  for (std::size_t i = 1; i < ks.size(); ++i) {
    if (ks[i] <= ks[i - 1]) throw ScenarioError("step counts must be strictly increasing");
  }
  const LabelMode mode = opts.mode_overridden ? opts.mode : scenario.default_mode;
  StudyReport report;
  report.study = "convergence";
  report.scenario = scenario.name;
  report.mode = label_mode_name(mode);

  const LabelMetricSpace space = scenario.make_metric();

  // closed-form reference requires frozen coefficients and a single agent
  Eigen::MatrixXd Q;
  EmpiricalMeasure initial = sample_initial(
      scenario, opts.seed_overridden ? opts.seed : scenario.seed);
  if (opts.oracle) {
    if (!scenario.markov || !scenario.constant_dynamics() || scenario.agent_count != 1)
      throw ScenarioError(
          "oracle mode needs a single-agent markov scenario with constant coefficients");
    Q = scenario.make_rates().eval(initial.agent(0).x, initial);
  }

  for (int k : ks) {
    StudyRow row;
    row.k = k;
    row.tau = scenario.horizon / k;
    const double t0 = now_seconds();
    try {
      const Trajectory coarse = run_scenario(scenario, k, mode, opts.threads, opts.seed,
                                             opts.seed_overridden);
      std::vector<double> gaps;
      if (opts.oracle) {
        const AgentState& start = initial.agent(0);
        const VelocityField v = scenario.make_velocity();
        const std::vector<double> vel = v.eval(start.x, start.label, initial);
        Eigen::VectorXd lam0(scenario.n);
        for (int h = 0; h < scenario.n; ++h) lam0[h] = start.label[h];
        for (double t : scenario.snapshot_times) {
          if (t > coarse.final_time() + 1e-12) continue;
          const Eigen::VectorXd lam_t = matrix_exponential(Eigen::MatrixXd(t * Q)) * lam0;
          std::vector<double> x_t(start.x);
          for (std::size_t j = 0; j < x_t.size(); ++j) x_t[j] += t * vel[j];
          std::vector<double> w(lam_t.data(), lam_t.data() + lam_t.size());
          const EmpiricalMeasure ref = EmpiricalMeasure::uniform(
              {AgentState{std::move(x_t), LabelDistribution(std::move(w))}});
          gaps.push_back(wasserstein1(coarse.at(t), ref, space, opts.threads));
        }
      } else {
        const Trajectory fine = run_scenario(scenario, 2 * k, mode, opts.threads, opts.seed,
                                             opts.seed_overridden);
        const double covered = std::min(coarse.final_time(), fine.final_time());
        for (double t : scenario.snapshot_times) {
          if (t > covered + 1e-12) continue;
          gaps.push_back(wasserstein1(coarse.at(t), fine.at(t), space, opts.threads));
        }
      }
      if (gaps.empty()) throw RuntimeAbort("no snapshot inside the covered horizon");
      row.w1_gap = *std::max_element(gaps.begin(), gaps.end());
      row.runtime_s = now_seconds() - t0;
      report.rows.push_back(row);
      report.row_samples.push_back(std::move(gaps));
    } catch (const Error& e) {
      report.notes += "k=" + std::to_string(k) + " aborted: " + e.what() + "; ";
      break;
    }
  }
  bootstrap_slope(report);
  return report;
}

namespace {

// residual samples for one run, together with per-bin maxima over 8 time bins
struct ResidualSamples {
  std::vector<double> bins;
  double max = 0.0;
  double mean = 0.0;
  long excluded = 0;
  long total = 0;
};

ResidualSamples explicit_residuals(const Trajectory& traj, const Scenario& scn, int threads) {
  const LabelMetricSpace space = scn.make_metric();
  DynamicsFields fields{scn.make_velocity(),
                        scn.markov ? make_markov_label_operator(scn.make_rates())
                                   : make_replicator_label_operator(scn.make_kernel(), scn.n)};
  const auto dict = test_function_dictionary(scn.d, scn.n);
  const int k = traj.completed_steps();
  const int probes = std::min(k, 64);
  ResidualSamples out;
  out.bins.assign(8, 0.0);
  double sum = 0.0;
  std::vector<double> values(static_cast<std::size_t>(probes) * dict.size(), 0.0);
  std::vector<double> times(probes);
  for (int p = 0; p < probes; ++p) {
    const int interval = static_cast<int>((static_cast<long>(p) * k) / probes);
    times[p] = (interval + 0.5) * traj.config().tau();
  }
  parallel_for(probes, threads, [&](int p) {
    for (std::size_t f = 0; f < dict.size(); ++f) {
      values[p * dict.size() + f] = std::abs(weak_residual(traj, fields, dict[f], times[p]));
    }
  });
  for (int p = 0; p < probes; ++p) {
    const int bin = std::min<int>(7, static_cast<int>(8.0 * times[p] / traj.config().T_final));
    for (std::size_t f = 0; f < dict.size(); ++f) {
      const double r = values[p * dict.size() + f];
      out.max = std::max(out.max, r);
      out.bins[bin] = std::max(out.bins[bin], r);
      sum += r;
      ++out.total;
    }
  }
  (void)space;
  out.mean = out.total > 0 ? sum / out.total : 0.0;
  return out;
}

ResidualSamples prox_residuals(const Trajectory& traj, const Scenario& scn, int threads) {
  const LabelMetricSpace space = scn.make_metric();
  const double tau = traj.config().tau();
  const int steps = traj.completed_steps();
  ResidualSamples out;
  out.bins.assign(8, 0.0);
  if (steps == 0) return out;
  const int N = traj.node(0).size();

  const bool markov = scn.markov;
  PayoffKernel kernel;
  RateMatrixField rates;
  GeometryConstants constants;
  if (markov) {
    rates = scn.make_rates();
    // proximity constants probed on the geometry of the first agent at t = 0
    const MarkovGeometry geom0(rates.eval(traj.node(0).agent(0).x, traj.node(0)));
    constants = probe_constants(geom0, scn.delta, 2000);
  } else {
    kernel = scn.make_kernel();
  }
  const double ratio = markov ? std::sqrt(constants.c3 / constants.c1) : 0.0;

  std::vector<std::vector<double>> values(steps, std::vector<double>(N, -1.0));
  parallel_for(steps, threads, [&](int i) {
    const EmpiricalMeasure& before = traj.node(i);
    const EmpiricalMeasure& after = traj.node(i + 1);
    for (int a = 0; a < N; ++a) {
      const auto& hat = before.agent(a);
      const auto& next = after.agent(a);
      if (markov) {
        const MarkovGeometry geom(rates.eval(hat.x, before));
        if (!proximity_condition(hat.label, next.label, scn.delta, ratio)) continue;
        values[i][a] = el_residual_markov(hat.label, next.label, geom, tau);
      } else {
        values[i][a] = el_residual_hs(hat.label, next.label, tau, hat.x, before, kernel, space);
      }
    }
  });

  double sum = 0.0;
  long count = 0;
  for (int i = 0; i < steps; ++i) {
    const double t_mid = (i + 0.5) * tau;
    const int bin = std::min<int>(7, static_cast<int>(8.0 * t_mid / traj.config().T_final));
    for (int a = 0; a < N; ++a) {
      ++out.total;
      if (values[i][a] < 0.0) {
        ++out.excluded;
        continue;
      }
      out.max = std::max(out.max, values[i][a]);
      out.bins[bin] = std::max(out.bins[bin], values[i][a]);
      sum += values[i][a];
      ++count;
    }
  }
  out.mean = count > 0 ? sum / count : 0.0;
  return out;
}

}  // namespace

StudyReport residual_study(const Scenario& scenario, const std::vector<int>& ks,
                           const StudyOptions& opts) {
  for (std::size_t i = 1; i < ks.size(); ++i) {
    if (ks[i] <= ks[i - 1]) throw ScenarioError("step counts must be strictly increasing");
  }
  const LabelMode mode = opts.mode_overridden ? opts.mode : scenario.default_mode;
  StudyReport report;
  report.study = "residual";
  report.scenario = scenario.name;
  report.mode = label_mode_name(mode);

  long excluded = 0, total = 0;
  for (int k : ks) {
    StudyRow row;
    row.k = k;
    row.tau = scenario.horizon / k;
    const double t0 = now_seconds();
    try {
      const Trajectory traj = run_scenario(scenario, k, mode, opts.threads, opts.seed,
                                           opts.seed_overridden);
      const ResidualSamples samples = mode == LabelMode::Explicit
                                          ? explicit_residuals(traj, scenario, opts.threads)
                                          : prox_residuals(traj, scenario, opts.threads);
      row.residual_max = samples.max;
      row.residual_mean = samples.mean;
      row.runtime_s = now_seconds() - t0;
      excluded += samples.excluded;
      total += samples.total;
      report.rows.push_back(row);
      report.row_samples.push_back(samples.bins);
    } catch (const Error& e) {
      report.notes += "k=" + std::to_string(k) + " aborted: " + e.what() + "; ";
      break;
    }
  }
  report.excluded_fraction = total > 0 ? static_cast<double>(excluded) / total : 0.0;
  bootstrap_slope(report);
  return report;
}

namespace {
std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}
}  // namespace

std::string report_to_csv(const StudyReport& report) {
  std::string out = "k,tau,w1_gap,residual_max,residual_mean,runtime_s\n";
  for (const auto& row : report.rows) {
    out += std::to_string(row.k) + "," + format_double(row.tau) + "," +
           format_double(row.w1_gap) + "," + format_double(row.residual_max) + "," +
           format_double(row.residual_mean) + "," + format_double(row.runtime_s) + "\n";
  }
  return out;
}

std::string report_to_json_text(const StudyReport& report) {
  json j;
  j["study"] = report.study;
  j["scenario"] = report.scenario;
  j["mode"] = report.mode;
  j["rows"] = json::array();
  for (const auto& row : report.rows) {
    j["rows"].push_back({{"k", row.k},
                         {"tau", row.tau},
                         {"w1_gap", row.w1_gap},
                         {"residual_max", row.residual_max},
                         {"residual_mean", row.residual_mean},
                         {"runtime_s", row.runtime_s}});
  }
  if (report.slope.valid) {
    j["slope"] = report.slope.slope;
    j["slope_points"] = report.slope.points_used;
  } else {
    j["slope"] = nullptr;
  }
  if (report.ci_valid) {
    j["slope_ci"] = {report.slope_ci_low, report.slope_ci_high};
  }
  j["excluded_fraction"] = report.excluded_fraction;
  j["notes"] = report.notes;
  return j.dump(2) + "\n";
}

void export_report(const StudyReport& report, const std::string& format, const std::string& path) {
  std::string payload;
  if (format == "csv") {
    payload = report_to_csv(report);
  } else if (format == "json") {
    payload = report_to_json_text(report);
  } else {
    throw ScenarioError("unknown export format '" + format + "'");
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw RuntimeAbort("cannot write '" + path + "'");
  out << payload;
  if (!out) throw RuntimeAbort("write failure on '" + path + "'");
}

std::string trajectory_to_csv(const Trajectory& traj, const std::vector<double>& snapshot_times) {
  std::string out = "t,agent_id,weight";
  const EmpiricalMeasure& first = traj.node(0);
  for (int j = 0; j < first.dim(); ++j) out += ",x" + std::to_string(j);
  for (int h = 0; h < first.label_count(); ++h) out += ",lambda" + std::to_string(h);
  out += "\n";
  for (double t : snapshot_times) {
    if (t > traj.final_time() + 1e-12) continue;
    const EmpiricalMeasure snap = traj.at(t);
    for (int a = 0; a < snap.size(); ++a) {
      out += format_double(t) + "," + std::to_string(a) + "," + format_double(snap.weight(a));
      for (double v : snap.agent(a).x) out += "," + format_double(v);
      for (int h = 0; h < snap.label_count(); ++h)
        out += "," + format_double(snap.agent(a).label[h]);
      out += "\n";
    }
  }
  return out;
}

void export_trajectory(const Trajectory& traj, const std::vector<double>& snapshot_times,
                       const std::string& format, const std::string& path) {
  std::string payload;
  if (format == "csv") {
    payload = trajectory_to_csv(traj, snapshot_times);
  } else if (format == "json") {
    json j;
    j["completed_steps"] = traj.completed_steps();
    j["final_time"] = traj.final_time();
    if (traj.abort_reason()) j["abort_reason"] = *traj.abort_reason();
    j["snapshots"] = json::array();
    for (double t : snapshot_times) {
      if (t > traj.final_time() + 1e-12) continue;
      const EmpiricalMeasure snap = traj.at(t);
      json js;
      js["t"] = t;
      js["agents"] = json::array();
      for (int a = 0; a < snap.size(); ++a) {
        js["agents"].push_back({{"id", a},
                                {"weight", snap.weight(a)},
                                {"x", snap.agent(a).x},
                                {"lambda", snap.agent(a).label.weights()}});
      }
      j["snapshots"].push_back(std::move(js));
    }
    payload = j.dump(2) + "\n";
  } else {
    throw ScenarioError("unknown export format '" + format + "'");
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw RuntimeAbort("cannot write '" + path + "'");
  out << payload;
}

}  // namespace labeldyn
