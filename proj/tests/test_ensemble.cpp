#include <cmath>
#include <doctest.h>

#include "labeldyn/ensemble.hpp"
#include "labeldyn/errors.hpp"
#include "labeldyn/rng.hpp"
#include "oracles.hpp"

using namespace labeldyn;

namespace {
EmpiricalMeasure random_measure(Rng& rng, int N, int d, int n, double spread = 1.0) {
  std::vector<AgentState> agents;
  for (int a = 0; a < N; ++a) {
    std::vector<double> x(d);
    for (auto& v : x) v = rng.uniform(-spread, spread);
    agents.push_back({std::move(x), LabelDistribution(rng.dirichlet(n, 1.0))});
  }
  return EmpiricalMeasure::uniform(std::move(agents));
}
}  // namespace

TEST_CASE("first moment and support radius examples") {
  const auto space = LabelMetricSpace::discrete(2);
  const EmpiricalMeasure one = EmpiricalMeasure::uniform(
      {AgentState{{0.0}, LabelDistribution({0.6, 0.4})}});
  CHECK(first_moment(one, space) == doctest::Approx(1.0));  // 0 + bl of a probability
  CHECK(support_radius(one, space) == doctest::Approx(1.0));

  const EmpiricalMeasure two = EmpiricalMeasure::uniform(
      {AgentState{{3.0}, LabelDistribution({1.0, 0.0})},
       AgentState{{-3.0}, LabelDistribution({0.0, 1.0})}});
  CHECK(first_moment(two, space) == doctest::Approx(4.0));

  const EmpiricalMeasure spread = EmpiricalMeasure::uniform(
      {AgentState{{1.0}, LabelDistribution({0.5, 0.5})},
       AgentState{{-5.0}, LabelDistribution({0.5, 0.5})}});
  CHECK(support_radius(spread, space) == doctest::Approx(6.0));

  const EmpiricalMeasure origin = EmpiricalMeasure::uniform(
      {AgentState{{0.0, 0.0}, LabelDistribution::uniform(3)}});
  CHECK(first_moment(origin, LabelMetricSpace::discrete(3)) == doctest::Approx(1.0));
}

TEST_CASE("wasserstein1 examples") {
  const auto space = LabelMetricSpace::discrete(2);
  const EmpiricalMeasure a = EmpiricalMeasure::uniform(
      {AgentState{{0.0}, LabelDistribution({1.0, 0.0})}});
  const EmpiricalMeasure b = EmpiricalMeasure::uniform(
      {AgentState{{1.0}, LabelDistribution({0.0, 1.0})}});
  CHECK(wasserstein1(a, a, space) == doctest::Approx(0.0));
  CHECK(wasserstein1(a, b, space) == doctest::Approx(1.0 + 2.0 / 3.0).epsilon(1e-12));

  // reordering the same atoms costs nothing
  const AgentState A{{0.5}, LabelDistribution({0.3, 0.7})};
  const AgentState B{{-1.5}, LabelDistribution({0.9, 0.1})};
  const EmpiricalMeasure ab = EmpiricalMeasure::uniform({A, B});
  const EmpiricalMeasure ba = EmpiricalMeasure::uniform({B, A});
  CHECK(wasserstein1(ab, ba, space) == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("wasserstein1 agrees with assignment enumeration") {
  Rng rng(21);
  const auto space = LabelMetricSpace::discrete(3);
  for (int trial = 0; trial < 12; ++trial) {
    const int N = 2 + trial % 5;  // up to 6 agents
    const EmpiricalMeasure a = random_measure(rng, N, 2, 3);
    const EmpiricalMeasure b = random_measure(rng, N, 2, 3);
    std::vector<std::vector<double>> cost(N, std::vector<double>(N));
    for (int i = 0; i < N; ++i) {
      for (int j = 0; j < N; ++j) {
        cost[i][j] = position_distance(a.agent(i).x, b.agent(j).x) +
                     bl_norm(a.agent(i).label - b.agent(j).label, space);
      }
    }
    const double exact = oracle::transport_by_permutations(cost);
    CHECK(wasserstein1(a, b, space) == doctest::Approx(exact).epsilon(1e-10));
  }
}

TEST_CASE("wasserstein1 metric properties") {
  Rng rng(22);
  const auto space = LabelMetricSpace::discrete(2);
  for (int trial = 0; trial < 10; ++trial) {
    const EmpiricalMeasure a = random_measure(rng, 5, 1, 2);
    const EmpiricalMeasure b = random_measure(rng, 4, 1, 2);
    const EmpiricalMeasure c = random_measure(rng, 6, 1, 2);
    const double ab = wasserstein1(a, b, space);
    const double ba = wasserstein1(b, a, space);
    const double ac = wasserstein1(a, c, space);
    const double cb = wasserstein1(c, b, space);
    CHECK(ab == doctest::Approx(ba).epsilon(1e-10));
    CHECK(ab <= ac + cb + 1e-8);
    CHECK(wasserstein1(a, a, space) <= 1e-12);
    // the first moment is 1-Lipschitz along W1
    CHECK(std::abs(first_moment(a, space) - first_moment(b, space)) <= ab + 1e-8);
  }
}

TEST_CASE("wasserstein1 with unequal weights") {
  const auto space = LabelMetricSpace::discrete(2);
  const LabelDistribution u = LabelDistribution::uniform(2);
  // 0.75 mass at 0 and 0.25 at 4, against all mass at 0: ships 0.25 over distance 4
  const EmpiricalMeasure split({AgentState{{0.0}, u}, AgentState{{4.0}, u}}, {0.75, 0.25});
  const EmpiricalMeasure point = EmpiricalMeasure::uniform({AgentState{{0.0}, u}});
  CHECK(wasserstein1(split, point, space) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("push forward") {
  Rng rng(23);
  const auto space = LabelMetricSpace::discrete(2);
  const EmpiricalMeasure mu = random_measure(rng, 6, 1, 2);

  const EmpiricalMeasure same = push_forward(mu, [](const AgentState& s) { return s; });
  CHECK(wasserstein1(mu, same, space) == doctest::Approx(0.0));

  const EmpiricalMeasure shifted = push_forward(mu, [](const AgentState& s) {
    AgentState t = s;
    t.x[0] += 1.0;
    return t;
  });
  double total = 0.0;
  for (int a = 0; a < shifted.size(); ++a) {
    CHECK(shifted.agent(a).x[0] == doctest::Approx(mu.agent(a).x[0] + 1.0));
    total += shifted.weight(a);
  }
  CHECK(total == doctest::Approx(1.0).epsilon(1e-15));

  CHECK_THROWS_AS(push_forward(mu,
                               [](const AgentState& s) {
                                 AgentState t = s;
                                 t.label = LabelDistribution({2.0, -1.0});
                                 return t;
                               }),
                  InvalidLabel);
}

TEST_CASE("relabeling in place transports diagonally when atoms are far apart") {
  const auto space = LabelMetricSpace::discrete(2);
  std::vector<AgentState> agents;
  std::vector<LabelDistribution> labels{LabelDistribution({0.9, 0.1}),
                                        LabelDistribution({0.2, 0.8}),
                                        LabelDistribution({0.6, 0.4})};
  for (int a = 0; a < 3; ++a) agents.push_back({{10.0 * a}, labels[a]});
  const EmpiricalMeasure mu = EmpiricalMeasure::uniform(agents);
  const EmpiricalMeasure uni = push_forward(mu, [](const AgentState& s) {
    return AgentState{s.x, LabelDistribution::uniform(2)};
  });
  double expected = 0.0;
  for (int a = 0; a < 3; ++a) {
    expected += mu.weight(a) * bl_norm(labels[a] - LabelDistribution::uniform(2), space);
  }
  CHECK(wasserstein1(mu, uni, space) == doctest::Approx(expected).epsilon(1e-10));
}
