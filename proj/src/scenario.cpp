#include "labeldyn/scenario.hpp"

#include <cmath>
#include <fstream>
#include <nlohmann/json.hpp>

#include "labeldyn/errors.hpp"
#include "labeldyn/rng.hpp"

namespace labeldyn {

using nlohmann::json;

namespace {

[[noreturn]] void fail(const std::string& where, const std::string& what) {
  throw ScenarioError(where + ": " + what);
}

double require_positive(const json& j, const std::string& key, double fallback,
                        bool required = false) {
  if (!j.contains(key)) {
    if (required) fail(key, "missing required field");
    return fallback;
  }
  const double v = j.at(key).get<double>();
  if (!(v > 0.0)) fail(key, "must be positive");
  return v;
}

std::vector<std::vector<double>> parse_matrix(const json& j, const std::string& where) {
  if (!j.is_array() || j.empty()) fail(where, "expected a non-empty matrix");
  std::vector<std::vector<double>> m;
  for (const auto& row : j) {
    if (!row.is_array()) fail(where, "expected a matrix of rows");
    m.push_back(row.get<std::vector<double>>());
    if (m.back().size() != m.front().size()) fail(where, "ragged matrix");
  }
  return m;
}

}  // namespace

LabelMode parse_label_mode(const std::string& text) {
  if (text == "explicit") return LabelMode::Explicit;
  if (text == "prox-hellinger" || text == "prox_hellinger") return LabelMode::ProxHellinger;
  if (text == "prox-markov" || text == "prox_markov") return LabelMode::ProxMarkov;
  throw ScenarioError("unknown mode '" + text + "'");
}

std::string label_mode_name(LabelMode mode) {
  switch (mode) {
    case LabelMode::Explicit: return "explicit";
    case LabelMode::ProxHellinger: return "prox-hellinger";
    case LabelMode::ProxMarkov: return "prox-markov";
  }
  return "?";
}

Scenario parse_scenario(const json& j) {
  Scenario s;
  s.name = j.value("name", "unnamed");
  s.d = j.value("d", 1);
  s.n = j.value("n", 2);
  if (s.d < 1) fail("d", "space dimension must be at least 1");
  if (s.n < 1) fail("n", "label count must be at least 1");

  if (j.contains("label_metric") && !j.at("label_metric").is_string()) {
    const auto m = parse_matrix(j.at("label_metric"), "label_metric");
    if (static_cast<int>(m.size()) != s.n) fail("label_metric", "expected an n x n matrix");
    s.metric_discrete = false;
    for (const auto& row : m) {
      if (static_cast<int>(row.size()) != s.n) fail("label_metric", "expected an n x n matrix");
      s.metric_matrix.insert(s.metric_matrix.end(), row.begin(), row.end());
    }
    s.make_metric();  // validates metric axioms eagerly
  }

  // velocity
  {
    const json v = j.value("velocity", json{{"kind", "zero"}});
    s.velocity_kind = v.value("kind", "zero");
    if (s.velocity_kind == "zero") {
    } else if (s.velocity_kind == "per_label_drift") {
      if (!v.contains("c")) fail("velocity.c", "per_label_drift needs coefficient vectors");
      s.drift_coefficients = parse_matrix(v.at("c"), "velocity.c");
      if (static_cast<int>(s.drift_coefficients.size()) != s.n)
        fail("velocity.c", "expected one coefficient vector per label");
      for (const auto& row : s.drift_coefficients) {
        if (static_cast<int>(row.size()) != s.d)
          fail("velocity.c", "coefficient vectors must have length d");
      }
    } else if (s.velocity_kind == "mean_field_attraction") {
      s.attraction_kappa = v.value("kappa", 1.0);
    } else {
      fail("velocity.kind", "unknown builtin '" + s.velocity_kind + "'");
    }
  }

  // label dynamics
  {
    if (!j.contains("label_dynamics")) fail("label_dynamics", "missing required field");
    const json dyn = j.at("label_dynamics");
    if (dyn.contains("replicator") == dyn.contains("markov"))
      fail("label_dynamics", "exactly one of 'replicator' or 'markov' is required");
    if (dyn.contains("replicator")) {
      s.markov = false;
      const json kernel = dyn.at("replicator").value("kernel", json{{"kind", "constant"}});
      s.kernel_kind = kernel.value("kind", "constant");
      if (s.kernel_kind == "constant") {
        s.kernel_constant = kernel.value("c", 0.0);
      } else if (s.kernel_kind == "identity") {
        s.kernel_amplitude = kernel.value("amplitude", 1.0);
      } else if (s.kernel_kind == "matrix" || s.kernel_kind == "matrix_gauss") {
        if (!kernel.contains("A")) fail("kernel.A", "matrix kernel needs a payoff matrix");
        s.kernel_matrix = parse_matrix(kernel.at("A"), "kernel.A");
        if (static_cast<int>(s.kernel_matrix.size()) != s.n ||
            static_cast<int>(s.kernel_matrix.front().size()) != s.n)
          fail("kernel.A", "expected an n x n payoff matrix");
        s.kernel_amplitude = kernel.value("amplitude", 1.0);
        s.kernel_length_scale = require_positive(kernel, "length_scale", 1.0);
      } else if (s.kernel_kind == "payoff_vector") {
        if (!kernel.contains("p")) fail("kernel.p", "payoff_vector kernel needs p");
        s.kernel_payoff_vector = kernel.at("p").get<std::vector<double>>();
        if (static_cast<int>(s.kernel_payoff_vector.size()) != s.n)
          fail("kernel.p", "expected n entries");
      } else {
        fail("kernel.kind", "unknown kernel '" + s.kernel_kind + "'");
      }
    } else {
      s.markov = true;
      const json rates = dyn.at("markov").value("rates", json::object());
      s.rate_kind = rates.value("kind", "");
      if (s.rate_kind == "constant") {
        const auto m = parse_matrix(rates.at("Q"), "rates.Q");
        if (static_cast<int>(m.size()) != s.n || static_cast<int>(m.front().size()) != s.n)
          fail("rates.Q", "expected an n x n matrix");
        for (const auto& row : m) s.rate_matrix.insert(s.rate_matrix.end(), row.begin(), row.end());
      } else if (s.rate_kind == "two_state") {
        if (s.n != 2) fail("rates", "two_state requires n = 2");
        const double a = require_positive(rates, "a", 1.0, true);
        const double b = require_positive(rates, "b", 1.0, true);
        s.rate_matrix = {-a, b, a, -b};
      } else if (s.rate_kind == "tridiagonal") {
        const auto up = rates.at("up").get<std::vector<double>>();
        const auto down = rates.at("down").get<std::vector<double>>();
        if (static_cast<int>(up.size()) != s.n - 1 || static_cast<int>(down.size()) != s.n - 1)
          fail("rates", "tridiagonal needs n-1 up and down rates");
        std::vector<double> Q(static_cast<std::size_t>(s.n) * s.n, 0.0);
        auto at = [&](int r, int c) -> double& { return Q[static_cast<std::size_t>(r) * s.n + c]; };
        for (int h = 0; h + 1 < s.n; ++h) {
          if (!(up[h] > 0.0) || !(down[h] > 0.0)) fail("rates", "rates must be positive");
          at(h + 1, h) += up[h];
          at(h, h) -= up[h];
          at(h, h + 1) += down[h];
          at(h + 1, h + 1) -= down[h];
        }
        s.rate_matrix = std::move(Q);
      } else {
        fail("rates.kind", "unknown rate field '" + s.rate_kind + "'");
      }
      s.rate_damping = rates.value("spatial_damping", 0.0);
      if (s.rate_damping < 0.0) fail("rates.spatial_damping", "must be nonnegative");
      s.make_rates();  // validates (Q0) eagerly
    }
  }

  // initial sampling
  {
    if (!j.contains("initial")) fail("initial", "missing required field");
    const json init = j.at("initial");
    s.agent_count = init.value("N", 1);
    if (s.agent_count < 1) fail("initial.N", "need at least one agent");
    const json pos = init.value("positions", json{{"law", "point"}});
    s.position_law = pos.value("law", "point");
    if (s.position_law == "uniform_box") {
      s.position_halfwidth = require_positive(pos, "halfwidth", 1.0);
    } else if (s.position_law == "uniform_ball") {
      s.position_radius = require_positive(pos, "radius", 1.0);
    } else if (s.position_law == "point") {
      s.position_point = pos.value("at", std::vector<double>(s.d, 0.0));
      if (static_cast<int>(s.position_point.size()) != s.d)
        fail("initial.positions.at", "expected d coordinates");
    } else {
      fail("initial.positions.law", "unknown law '" + s.position_law + "'");
    }
    const json lab = init.value("labels", json{{"law", "dirichlet"}});
    s.label_law = lab.value("law", "dirichlet");
    if (s.label_law == "dirichlet") {
      s.dirichlet_alpha = require_positive(lab, "alpha", 1.0);
      s.label_margin = lab.value("margin", 0.0);
      if (s.label_margin < 0.0 || s.label_margin * s.n >= 1.0)
        fail("initial.labels.margin", "margin must satisfy 0 <= margin < 1/n");
    } else if (s.label_law == "fixed") {
      s.fixed_label = lab.at("weights").get<std::vector<double>>();
      if (static_cast<int>(s.fixed_label.size()) != s.n)
        fail("initial.labels.weights", "expected n weights");
      LabelDistribution check(s.fixed_label);  // validates simplex membership
    } else {
      fail("initial.labels.law", "unknown law '" + s.label_law + "'");
    }
  }

  s.horizon = require_positive(j, "horizon", 1.0, true);
  if (j.contains("snapshot_times")) {
    s.snapshot_times = j.at("snapshot_times").get<std::vector<double>>();
  } else {
    for (int i = 1; i <= 8; ++i) s.snapshot_times.push_back(s.horizon * i / 8.0);
  }
  double prev = 0.0;
  for (double t : s.snapshot_times) {
    if (t < 0.0 || t > s.horizon + 1e-12 || t < prev - 1e-12)
      fail("snapshot_times", "must be sorted within [0, horizon]");
    prev = t;
  }

  const std::string conv = j.value("hs_convention", "geodesic");
  if (conv == "geodesic") {
    s.hs_convention = HsConvention::Geodesic;
  } else if (conv == "literal") {
    s.hs_convention = HsConvention::Literal;
  } else {
    fail("hs_convention", "expected 'geodesic' or 'literal'");
  }

  s.delta = j.value("delta", 0.01);
  s.eta = j.value("eta", 0.1);
  if (s.markov && !(s.eta > s.delta))
    fail("eta/delta", "markov scenarios need eta > delta (eta = " + std::to_string(s.eta) +
                          ", delta = " + std::to_string(s.delta) + ")");
  if (s.markov && s.label_law == "dirichlet" && s.label_margin < s.eta)
    fail("initial.labels.margin",
         "markov scenarios need the sampling margin to be at least eta");
  s.seed = j.value("seed", static_cast<std::uint64_t>(1));
  s.default_mode = j.contains("mode") ? parse_label_mode(j.at("mode").get<std::string>())
                   : (s.markov ? LabelMode::ProxMarkov : LabelMode::Explicit);
  if (!s.markov && s.default_mode == LabelMode::ProxMarkov)
    fail("mode", "prox-markov needs markov label dynamics");
  if (s.markov && s.default_mode == LabelMode::ProxHellinger)
    fail("mode", "prox-hellinger needs replicator label dynamics");
  return s;
}

Scenario load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ScenarioError("cannot open '" + path + "'");
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ScenarioError("parse failure in '" + path + "': " + e.what());
  }
  return parse_scenario(j);
}

LabelMetricSpace Scenario::make_metric() const {
  if (metric_discrete) return LabelMetricSpace::discrete(n);
  return LabelMetricSpace(n, metric_matrix);
}

VelocityField Scenario::make_velocity() const {
  if (velocity_kind == "zero") return make_zero_velocity();
  if (velocity_kind == "per_label_drift") return make_per_label_drift(drift_coefficients);
  return make_mean_field_attraction(attraction_kappa);
}

PayoffKernel Scenario::make_kernel() const {
  if (markov) throw ScenarioError("scenario has markov dynamics, no payoff kernel");
  PayoffKernel J;
  if (kernel_kind == "constant") {
    const double c = kernel_constant;
    J.growth = std::abs(c);
    J.eval = [c](const std::vector<double>&, int, const std::vector<double>&, int) { return c; };
  } else if (kernel_kind == "identity") {
    const double amp = kernel_amplitude;
    J.growth = std::abs(amp);
    J.eval = [amp](const std::vector<double>&, int u, const std::vector<double>&, int up) {
      return u == up ? amp : 0.0;
    };
  } else if (kernel_kind == "payoff_vector") {
    const auto p = kernel_payoff_vector;
    double big = 0.0;
    for (double v : p) big = std::max(big, std::abs(v));
    J.growth = big;
    J.eval = [p](const std::vector<double>&, int u, const std::vector<double>&, int) {
      return p[u];
    };
  } else {
    const auto A = kernel_matrix;
    const double amp = kernel_amplitude;
    double big = 0.0;
    for (const auto& row : A) {
      for (double v : row) big = std::max(big, std::abs(v));
    }
    J.growth = std::abs(amp) * big;
    if (kernel_kind == "matrix") {
      J.eval = [A, amp](const std::vector<double>&, int u, const std::vector<double>&, int up) {
        return amp * A[u][up];
      };
    } else {
      const double ls2 = 2.0 * kernel_length_scale * kernel_length_scale;
      J.eval = [A, amp, ls2](const std::vector<double>& x, int u, const std::vector<double>& xp,
                             int up) {
        double d2 = 0.0;
        for (std::size_t j = 0; j < x.size(); ++j) {
          const double diff = x[j] - xp[j];
          d2 += diff * diff;
        }
        return amp * A[u][up] * std::exp(-d2 / ls2);
      };
    }
  }
  return J;
}

RateMatrixField Scenario::make_rates() const {
  if (!markov) throw ScenarioError("scenario has replicator dynamics, no rate field");
  Eigen::MatrixXd Q(n, n);
  for (int h = 0; h < n; ++h) {
    for (int l = 0; l < n; ++l) Q(h, l) = rate_matrix[static_cast<std::size_t>(h) * n + l];
  }
  check_rate_matrix(Q);
  RateMatrixField field;
  field.growth = Q.cwiseAbs().maxCoeff();
  if (rate_damping == 0.0) {
    field.eval = [Q](const std::vector<double>&, const EmpiricalMeasure&) { return Q; };
  } else {
    // positive modulation keeps detailed balance and the stationary law
    const double beta = rate_damping;
    field.eval = [Q, beta](const std::vector<double>& x, const EmpiricalMeasure& psi) {
      const std::vector<double> c = barycenter(psi);
      double d2 = 0.0;
      for (std::size_t j = 0; j < x.size(); ++j) {
        const double diff = x[j] - c[j];
        d2 += diff * diff;
      }
      return Eigen::MatrixXd(Q / (1.0 + beta * d2));
    };
  }
  return field;
}

bool Scenario::constant_dynamics() const {
  const bool velocity_constant =
      velocity_kind == "zero" ||
      (velocity_kind == "per_label_drift" && [&]() {
        for (const auto& row : drift_coefficients) {
          if (row != drift_coefficients.front()) return false;
        }
        return true;
      }());
  if (!velocity_constant) return false;
  if (markov) return rate_damping == 0.0;
  return kernel_kind == "constant" || kernel_kind == "payoff_vector";
}

EmpiricalMeasure sample_initial(const Scenario& scenario, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<AgentState> agents;
  agents.reserve(scenario.agent_count);
  for (int a = 0; a < scenario.agent_count; ++a) {
    std::vector<double> x(scenario.d, 0.0);
    if (scenario.position_law == "uniform_box") {
      for (int j = 0; j < scenario.d; ++j)
        x[j] = rng.uniform(-scenario.position_halfwidth, scenario.position_halfwidth);
    } else if (scenario.position_law == "uniform_ball") {
      x = rng.ball(scenario.d, scenario.position_radius);
    } else {
      x = scenario.position_point;
    }

    std::vector<double> w;
    if (scenario.label_law == "fixed") {
      w = scenario.fixed_label;
    } else {
      w = rng.dirichlet(scenario.n, scenario.dirichlet_alpha);
      // squeeze toward the uniform law so that every component clears the margin
      const double m = scenario.label_margin;
      for (auto& v : w) v = m + (1.0 - m * scenario.n) * v;
    }
    agents.push_back({std::move(x), LabelDistribution(std::move(w))});
  }
  return EmpiricalMeasure::uniform(std::move(agents));
}

}  // namespace labeldyn
