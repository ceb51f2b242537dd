#include <cmath>
#include <doctest.h>
#include <nlohmann/json.hpp>

#include "labeldyn/errors.hpp"
#include "labeldyn/study.hpp"

using namespace labeldyn;
using nlohmann::json;

namespace {

json minimal_replicator() {
  return json::parse(R"({
    "name": "minimal",
    "d": 1, "n": 2,
    "label_dynamics": {"replicator": {"kernel": {"kind": "constant", "c": 0.0}}},
    "initial": {"N": 1},
    "horizon": 1.0
  })");
}

json markov_two_state() {
  return json::parse(R"({
    "name": "markov-two-state",
    "d": 1, "n": 2,
    "velocity": {"kind": "zero"},
    "label_dynamics": {"markov": {"rates": {"kind": "two_state", "a": 1.0, "b": 2.0}}},
    "initial": {"N": 1,
                "positions": {"law": "point", "at": [0.25]},
                "labels": {"law": "fixed", "weights": [0.5, 0.5]}},
    "horizon": 1.0,
    "seed": 7
  })");
}

}  // namespace

TEST_CASE("minimal scenario parses with defaults") {
  const Scenario s = parse_scenario(minimal_replicator());
  CHECK(s.n == 2);
  CHECK(s.agent_count == 1);
  CHECK(s.metric_discrete);
  CHECK(s.velocity_kind == "zero");
  CHECK_FALSE(s.markov);
  CHECK(s.snapshot_times.size() == 8);
  CHECK(s.default_mode == LabelMode::Explicit);
  CHECK(s.hs_convention == HsConvention::Geodesic);
}

TEST_CASE("scenario validation names the offending fields") {
  json bad = markov_two_state();
  bad["eta"] = 0.01;
  bad["delta"] = 0.05;
  try {
    parse_scenario(bad);
    FAIL("expected a validation error");
  } catch (const ScenarioError& e) {
    const std::string msg = e.what();
    CHECK(msg.find("eta") != std::string::npos);
    CHECK(msg.find("delta") != std::string::npos);
  }

  json unknown = minimal_replicator();
  unknown["velocity"] = {{"kind", "warp"}};
  CHECK_THROWS_AS(parse_scenario(unknown), ScenarioError);

  json badkernel = minimal_replicator();
  badkernel["label_dynamics"]["replicator"]["kernel"] = {{"kind", "nope"}};
  CHECK_THROWS_AS(parse_scenario(badkernel), ScenarioError);

  json both = minimal_replicator();
  both["label_dynamics"]["markov"] = {{"rates", {{"kind", "two_state"}, {"a", 1.0}, {"b", 1.0}}}};
  CHECK_THROWS_AS(parse_scenario(both), ScenarioError);
}

TEST_CASE("identity kernel registry lookup binds the matching payoff") {
  json j = minimal_replicator();
  j["label_dynamics"]["replicator"]["kernel"] = {{"kind", "identity"}};
  const Scenario s = parse_scenario(j);
  const PayoffKernel J = s.make_kernel();
  CHECK(J.eval({0.0}, 0, {1.0}, 0) == 1.0);
  CHECK(J.eval({0.0}, 0, {1.0}, 1) == 0.0);
}

TEST_CASE("initial sampling is deterministic and respects the margin") {
  json j = minimal_replicator();
  j["initial"] = {{"N", 200},
                  {"positions", {{"law", "uniform_box"}, {"halfwidth", 1.0}}},
                  {"labels", {{"law", "dirichlet"}, {"alpha", 1.0}, {"margin", 0.1}}}};
  const Scenario s = parse_scenario(j);

  const EmpiricalMeasure m1 = sample_initial(s, 99);
  const EmpiricalMeasure m2 = sample_initial(s, 99);
  const EmpiricalMeasure m3 = sample_initial(s, 100);
  bool identical = true;
  bool distinct = false;
  for (int a = 0; a < m1.size(); ++a) {
    identical = identical && m1.agent(a).x == m2.agent(a).x &&
                m1.agent(a).label.weights() == m2.agent(a).label.weights();
    distinct = distinct || m1.agent(a).x != m3.agent(a).x;
  }
  CHECK(identical);
  CHECK(distinct);

  double least = 1.0;
  for (int a = 0; a < m1.size(); ++a) least = std::min(least, m1.agent(a).label.min_weight());
  CHECK(least >= 0.1);
  CHECK(support_radius(m1, s.make_metric()) <= 2.0 + 1e-12);
}

TEST_CASE("static scenario: zero gaps, undefined slope, tiny residuals") {
  json j = minimal_replicator();
  j["initial"]["N"] = 4;
  const Scenario s = parse_scenario(j);

  const StudyReport conv = convergence_study(s, {4, 8});
  REQUIRE(conv.rows.size() == 2);
  for (const auto& row : conv.rows) CHECK(row.w1_gap <= 1e-12);
  CHECK_FALSE(conv.slope.valid);

  const StudyReport res = residual_study(s, {4, 8});
  REQUIRE(res.rows.size() == 2);
  for (const auto& row : res.rows) CHECK(row.residual_max <= 1e-12);
}

TEST_CASE("oracle convergence study reproduces first order for the linear chain") {
  Scenario s = parse_scenario(markov_two_state());
  StudyOptions opts;
  opts.oracle = true;
  opts.mode = LabelMode::Explicit;
  opts.mode_overridden = true;
  const StudyReport report = convergence_study(s, {16, 32, 64, 128}, opts);
  REQUIRE(report.rows.size() == 4);
  REQUIRE(report.slope.valid);
  CHECK(report.slope.slope == doctest::Approx(1.0).epsilon(0.2));
  for (std::size_t i = 1; i < report.rows.size(); ++i) {
    CHECK(report.rows[i].w1_gap < report.rows[i - 1].w1_gap);
  }
}

TEST_CASE("oracle mode rejects non-constant scenarios") {
  json j = markov_two_state();
  j["initial"]["N"] = 3;
  const Scenario s = parse_scenario(j);
  StudyOptions opts;
  opts.oracle = true;
  CHECK_THROWS_AS(convergence_study(s, {8, 16}, opts), ScenarioError);
}

TEST_CASE("cauchy gaps of a replicator scenario decrease") {
  const json j = json::parse(R"({
    "name": "repl-small",
    "d": 1, "n": 2,
    "velocity": {"kind": "per_label_drift", "c": [[0.5], [-0.5]]},
    "label_dynamics": {"replicator": {"kernel": {"kind": "identity"}}},
    "initial": {"N": 16,
                "positions": {"law": "uniform_box", "halfwidth": 1.0},
                "labels": {"law": "dirichlet", "alpha": 1.0, "margin": 0.05}},
    "horizon": 1.0,
    "seed": 3
  })");
  const Scenario s = parse_scenario(j);
  const StudyReport report = convergence_study(s, {8, 16, 32});
  REQUIRE(report.rows.size() == 3);
  for (std::size_t i = 1; i < report.rows.size(); ++i) {
    CHECK(report.rows[i].w1_gap < report.rows[i - 1].w1_gap);
  }
  REQUIRE(report.slope.valid);
  CHECK(report.slope.slope > 0.5);
}

TEST_CASE("csv export shape and byte-identical determinism") {
  Scenario s = parse_scenario(markov_two_state());
  StudyOptions opts;
  opts.mode = LabelMode::Explicit;
  opts.mode_overridden = true;
  const StudyReport a = convergence_study(s, {8, 16}, opts);
  const StudyReport b = convergence_study(s, {8, 16}, opts);
  const std::string csv_a = report_to_csv(a);
  const std::string csv_b = report_to_csv(b);
  CHECK(csv_a == csv_b);

  CHECK(csv_a.rfind("k,tau,w1_gap,residual_max,residual_mean,runtime_s\n", 0) == 0);
  // runtimes differ between repeats; strip the last column before comparing
  auto strip_runtime = [](std::string text) {
    std::string out;
    std::size_t start = 0;
    while (start < text.size()) {
      std::size_t end = text.find('\n', start);
      if (end == std::string::npos) end = text.size();
      std::string line = text.substr(start, end - start);
      out += line.substr(0, line.rfind(','));
      out += '\n';
      start = end + 1;
    }
    return out;
  };
  CHECK(strip_runtime(csv_a) == strip_runtime(csv_b));

  int lines = 0;
  for (char c : csv_a) lines += c == '\n';
  CHECK(lines == 3);  // header + one row per k
}

TEST_CASE("json export round-trips every numeric field bit-exactly") {
  Scenario s = parse_scenario(markov_two_state());
  StudyOptions opts;
  opts.mode = LabelMode::Explicit;
  opts.mode_overridden = true;
  const StudyReport report = convergence_study(s, {8, 16}, opts);
  const json parsed = json::parse(report_to_json_text(report));
  REQUIRE(parsed.at("rows").size() == report.rows.size());
  for (std::size_t i = 0; i < report.rows.size(); ++i) {
    const auto& row = parsed.at("rows").at(i);
    CHECK(row.at("k").get<int>() == report.rows[i].k);
    CHECK(row.at("tau").get<double>() == report.rows[i].tau);
    CHECK(row.at("w1_gap").get<double>() == report.rows[i].w1_gap);
    CHECK(row.at("residual_max").get<double>() == report.rows[i].residual_max);
    CHECK(row.at("residual_mean").get<double>() == report.rows[i].residual_mean);
    CHECK(row.at("runtime_s").get<double>() == report.rows[i].runtime_s);
  }
}

TEST_CASE("empty report exports the bare header") {
  StudyReport empty;
  empty.study = "convergence";
  CHECK(report_to_csv(empty) == "k,tau,w1_gap,residual_max,residual_mean,runtime_s\n");
}

TEST_CASE("trajectory export lists one row per agent and snapshot") {
  Scenario s = parse_scenario(markov_two_state());
  const Trajectory traj = run_scenario(s, 8, LabelMode::Explicit);
  const std::string csv = trajectory_to_csv(traj, {0.5, 1.0});
  int lines = 0;
  for (char c : csv) lines += c == '\n';
  CHECK(lines == 1 + 2 * traj.node(0).size());
  CHECK(csv.rfind("t,agent_id,weight,x0,lambda0,lambda1\n", 0) == 0);
}

TEST_CASE("run_scenario rejects mismatched modes") {
  const Scenario repl = parse_scenario(minimal_replicator());
  CHECK_THROWS_AS(run_scenario(repl, 4, LabelMode::ProxMarkov), ScenarioError);
  const Scenario markov = parse_scenario(markov_two_state());
  CHECK_THROWS_AS(run_scenario(markov, 4, LabelMode::ProxHellinger), ScenarioError);
}

TEST_CASE("markov residual study tracks the proximity hypothesis") {
  json j = markov_two_state();
  j["initial"]["labels"]["weights"] = {0.5, 0.5};
  j["eta"] = 0.1;
  j["delta"] = 0.01;
  const Scenario s = parse_scenario(j);
  StudyOptions opts;
  opts.mode = LabelMode::ProxMarkov;
  opts.mode_overridden = true;
  const StudyReport report = residual_study(s, {10, 20, 40}, opts);
  REQUIRE(report.rows.size() == 3);
  CHECK(report.excluded_fraction <= 0.10);
  REQUIRE(report.slope.valid);
  CHECK(report.slope.slope >= 0.25);
}
