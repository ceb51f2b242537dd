#include <doctest.h>

#include "labeldyn/errors.hpp"
#include "labeldyn/linprog.hpp"

using namespace labeldyn;

TEST_CASE("simplex solves a textbook instance") {
  // max 3x + 2y, x + y <= 4, x <= 2, y <= 3 -> x = 2, y = 2, value 10
  const auto sol = lp::maximize_free({3.0, 2.0}, {{1.0, 1.0}, {1.0, 0.0}, {0.0, 1.0}},
                                     {4.0, 2.0, 3.0});
  REQUIRE(sol.optimal);
  CHECK(sol.value == doctest::Approx(10.0).epsilon(1e-12));
  CHECK(sol.x[0] == doctest::Approx(2.0));
  CHECK(sol.x[1] == doctest::Approx(2.0));
}

TEST_CASE("simplex handles free variables with negative optima") {
  // max -x subject to -x <= 5, x <= -1  ->  x = -5
  const auto sol = lp::maximize_free({-1.0}, {{-1.0}, {1.0}}, {5.0, 0.0});
  REQUIRE(sol.optimal);
  CHECK(sol.value == doctest::Approx(5.0));
  CHECK(sol.x[0] == doctest::Approx(-5.0));
}

TEST_CASE("simplex rejects negative right-hand sides and unbounded programs") {
  CHECK_THROWS_AS(lp::maximize_free({1.0}, {{1.0}}, {-1.0}), ContractViolation);
  CHECK_THROWS_AS(lp::maximize_free({1.0}, {{-1.0}}, {1.0}), ContractViolation);
}
