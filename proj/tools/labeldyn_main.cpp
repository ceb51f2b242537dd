// Command line driver: scheme runs, convergence/residual studies, and single
// proximal-step evaluation.
//
// Exit codes: 0 success, 2 validation error, 3 runtime abort, 4 solver
// non-convergence.

#include <CLI11.hpp>
#include <Eigen/Dense>
#include <iostream>
#include <nlohmann/json.hpp>
#include <sstream>

#include "labeldyn/errors.hpp"
#include "labeldyn/markov_prox.hpp"
#include "labeldyn/replicator_prox.hpp"
#include "labeldyn/study.hpp"

namespace {

using labeldyn::ScenarioError;

std::vector<double> parse_doubles(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      out.push_back(std::stod(item));
    } catch (const std::exception&) {
      throw ScenarioError("cannot parse '" + item + "' as a number");
    }
  }
  if (out.empty()) throw ScenarioError("expected a comma-separated list of numbers");
  return out;
}

std::vector<int> parse_ints(const std::string& text) {
  std::vector<int> out;
  for (double v : parse_doubles(text)) out.push_back(static_cast<int>(v));
  return out;
}

int parse_threads(const std::string& text) {
  if (text == "pinned") return 1;
  const int t = std::stoi(text);
  if (t < 1) throw ScenarioError("thread count must be positive");
  return t;
}

// row-major matrix in the form "a,b;c,d"
Eigen::MatrixXd parse_matrix_arg(const std::string& text) {
  std::vector<std::vector<double>> rows;
  std::stringstream ss(text);
  std::string row;
  while (std::getline(ss, row, ';')) rows.push_back(parse_doubles(row));
  const int n = static_cast<int>(rows.size());
  Eigen::MatrixXd m(n, static_cast<int>(rows[0].size()));
  for (int i = 0; i < n; ++i) {
    if (static_cast<int>(rows[i].size()) != m.cols()) throw ScenarioError("ragged matrix");
    for (int j = 0; j < m.cols(); ++j) m(i, j) = rows[i][j];
  }
  return m;
}

nlohmann::json prox_result_json(const labeldyn::ProxResult& res) {
  return {{"lambda_new", res.lambda_new.weights()},
          {"objective", res.objective_value},
          {"iterations", res.iterations},
          {"converged", res.converged}};
}

}  // namespace

int main(int argc, char** argv) {
  using namespace labeldyn;

  CLI::App app{"particle schemes for spatially inhomogeneous label dynamics"};
  app.require_subcommand(1);

  std::string scenario_path, out_path, format = "csv", mode_text, ks_text, threads_text = "pinned";
  std::uint64_t seed = 0;
  bool seed_set = false, oracle = false;
  int k_override = 0;

  auto* simulate = app.add_subcommand("simulate", "run one scheme and export snapshots");
  simulate->add_option("scenario", scenario_path, "scenario file")->required();
  simulate->add_option("--k", k_override, "number of time steps");
  simulate->add_option("--mode", mode_text, "explicit | prox-hellinger | prox-markov");
  simulate->add_option("--out", out_path, "output path");
  simulate->add_option("--format", format, "csv | json");
  simulate->add_option("--seed", seed, "sampling seed")->each([&](const std::string&) {
    seed_set = true;
  });
  simulate->add_option("--threads", threads_text, "worker threads or 'pinned'");

  auto* study = app.add_subcommand("study", "convergence or residual study over a k ladder");
  std::string study_kind;
  study->add_option("kind", study_kind, "convergence | residual")->required();
  study->add_option("scenario", scenario_path, "scenario file")->required();
  study->add_option("--ks", ks_text, "comma separated step counts")->required();
  study->add_option("--out", out_path, "output path");
  study->add_option("--format", format, "csv | json");
  study->add_option("--mode", mode_text, "label substep override");
  study->add_option("--seed", seed, "sampling seed")->each([&](const std::string&) {
    seed_set = true;
  });
  study->add_option("--threads", threads_text, "worker threads or 'pinned'");
  study->add_flag("--oracle", oracle, "compare against the closed form instead of the 2k run");

  auto* prox = app.add_subcommand("prox", "proximal-step debugging");
  auto* prox_eval = prox->add_subcommand("eval", "evaluate a single proximal step");
  std::string kind, lambda_hat_text, lambda_ref_text, payoff_text, q_text, convention = "geodesic";
  double tau = 0.1;
  prox_eval->add_option("--kind", kind, "hs | markov-full | markov-surrogate")->required();
  prox_eval->add_option("--lambda-hat", lambda_hat_text, "base label, comma separated")->required();
  prox_eval->add_option("--tau", tau, "step size")->required();
  prox_eval->add_option("--payoff", payoff_text, "payoff vector for hs");
  prox_eval->add_option("--q", q_text, "rate matrix rows 'a,b;c,d' for markov kinds");
  prox_eval->add_option("--lambda-ref", lambda_ref_text, "metric reference label (surrogate)");
  prox_eval->add_option("--convention", convention, "geodesic | literal");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    const int threads = parse_threads(threads_text);

    if (simulate->parsed()) {
      Scenario scn = load_scenario(scenario_path);
      const LabelMode mode =
          mode_text.empty() ? scn.default_mode : parse_label_mode(mode_text);
      const int k = k_override > 0 ? k_override : 64;
      const Trajectory traj = run_scenario(scn, k, mode, threads, seed, seed_set);
      std::vector<double> snaps = scn.snapshot_times;
      snaps.insert(snaps.begin(), 0.0);
      if (!out_path.empty()) {
        export_trajectory(traj, snaps, format, out_path);
      }
      std::cout << "scenario " << scn.name << ": " << traj.completed_steps() << "/" << k
                << " steps, final time " << traj.final_time();
      if (traj.abort_reason()) std::cout << " (" << *traj.abort_reason() << ")";
      std::cout << "\n";
      return traj.terminated_early() ? 3 : 0;
    }

    if (study->parsed()) {
      Scenario scn = load_scenario(scenario_path);
      StudyOptions opts;
      opts.threads = threads;
      opts.oracle = oracle;
      opts.seed = seed;
      opts.seed_overridden = seed_set;
      if (!mode_text.empty()) {
        opts.mode = parse_label_mode(mode_text);
        opts.mode_overridden = true;
      }
      const std::vector<int> ks = parse_ints(ks_text);
      StudyReport report;
      if (study_kind == "convergence") {
        report = convergence_study(scn, ks, opts);
      } else if (study_kind == "residual") {
        report = residual_study(scn, ks, opts);
      } else {
        throw ScenarioError("unknown study kind '" + study_kind + "'");
      }
      if (!out_path.empty()) {
        export_report(report, format, out_path);
      } else {
        std::cout << report_to_csv(report);
      }
      if (report.slope.valid) {
        std::cout << "slope " << report.slope.slope;
        if (report.ci_valid) {
          std::cout << "  (bootstrap 95%: " << report.slope_ci_low << " .. "
                    << report.slope_ci_high << ")";
        }
        std::cout << "\n";
      }
      if (!report.notes.empty()) {
        std::cout << "notes: " << report.notes << "\n";
        return 3;
      }
      return 0;
    }

    // prox eval
    const LabelDistribution hat(parse_doubles(lambda_hat_text));
    nlohmann::json out;
    if (kind == "hs") {
      if (payoff_text.empty()) throw ScenarioError("--payoff is required for kind hs");
      const HsConvention conv =
          convention == "literal" ? HsConvention::Literal : HsConvention::Geodesic;
      out = prox_result_json(prox_hs_payoff(parse_doubles(payoff_text), hat, tau, conv));
    } else if (kind == "markov-full" || kind == "markov-surrogate") {
      if (q_text.empty()) throw ScenarioError("--q is required for markov kinds");
      const MarkovGeometry geom(parse_matrix_arg(q_text));
      if (kind == "markov-full") {
        out = prox_result_json(prox_markov_full(hat, geom, tau));
      } else {
        const LabelDistribution ref =
            lambda_ref_text.empty() ? hat : LabelDistribution(parse_doubles(lambda_ref_text));
        out = prox_result_json(prox_markov_surrogate(hat, ref, geom, tau));
      }
    } else {
      throw ScenarioError("unknown prox kind '" + kind + "'");
    }
    std::cout << out.dump(2) << "\n";
    return 0;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return e.exit_code();
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
