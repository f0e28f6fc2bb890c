#include <doctest.h>

#include <cmath>

#include "wfusion/resource.hpp"

using namespace wfusion;

TEST_CASE("fusion cost arithmetic") {
  CHECK(cost_two(1.0, 1.0) == doctest::Approx(4.0));
  CHECK(cost_two(1.0, 4.0) == doctest::Approx(10.0));
  CHECK(cost_two(4.0, 4.0) == doctest::Approx(16.0));
  CHECK(cost_three(1.0, 1.0, 1.0) == doctest::Approx(12.0));
  CHECK(cost_three(1.0, 12.0, 12.0) == doctest::Approx(100.0));
  CHECK_THROWS_AS(cost_two(0.5, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(cost_three(1.0, 1.0, 0.0), std::invalid_argument);
  for (Real x : {1.0, 3.0, 10.0}) {
    CHECK(cost_three(x, x, x) >= cost_two(x, x));
  }
}

TEST_CASE("three-fusion feasibility filter") {
  CHECK(three_fusion_feasible(2, 2, 2));
  CHECK(three_fusion_feasible(2, 5, 5));   // boundary 4(N-1) = M-1
  CHECK(!three_fusion_feasible(2, 6, 6));
  CHECK(!three_fusion_feasible(3, 4, 5));  // M != T
}

TEST_CASE("optimal cost tables") {
  SUBCASE("two-fusion-only values") {
    const CostTable t = optimal_cost_table(6, StrategyClass::two_fusion);
    CHECK(t.at(2).cost == doctest::Approx(1.0));
    CHECK(t.at(3).cost == doctest::Approx(4.0));
    CHECK(t.at(4).cost == doctest::Approx(10.0));
    CHECK(t.at(5).cost == doctest::Approx(16.0));  // 2(4+4) beats 2(1+10)
    for (int n = 2; n <= 6; ++n) CHECK(t.at(n).reachable);
  }
  SUBCASE("three-fusion-only values and reachability parity") {
    const CostTable t = optimal_cost_table(10, StrategyClass::three_fusion);
    CHECK(t.at(4).cost == doctest::Approx(12.0));
    CHECK(t.at(6).cost == doctest::Approx(56.0));  // 4(R4 + 1 + 1) via (4,2,2)
    for (int n = 2; n <= 10; ++n) {
      CHECK(t.at(n).reachable == (n % 2 == 0));
    }
  }
  SUBCASE("both-strategy table never loses to a single class") {
    const CostTable both = optimal_cost_table(9, StrategyClass::both);
    const CostTable two = optimal_cost_table(9, StrategyClass::two_fusion);
    const CostTable three = optimal_cost_table(9, StrategyClass::three_fusion);
    for (int n = 2; n <= 9; ++n) {
      if (two.at(n).reachable) CHECK(both.at(n).cost <= two.at(n).cost);
      if (three.at(n).reachable) CHECK(both.at(n).cost <= three.at(n).cost);
    }
    CHECK(both.at(4).cost == doctest::Approx(10.0));  // two-fusion beats 12
  }
  SUBCASE("every recorded strategy re-evaluates to its recorded cost") {
    for (StrategyClass cls :
         {StrategyClass::two_fusion, StrategyClass::three_fusion, StrategyClass::both}) {
      const CostTable t = optimal_cost_table(12, cls);
      for (int n = 2; n <= 12; ++n) {
        if (!t.at(n).reachable) continue;
        CHECK(evaluate(t.at(n).strategy) == t.at(n).cost);
        CHECK(t.at(n).cost >= 1.0);
      }
    }
  }
  SUBCASE("deterministic tie-breaking picks the lexicographically smallest split") {
    // R[4] under both: (2,3) and (3,2) tie at 10; (2,3) must win
    const CostTable t = optimal_cost_table(4, StrategyClass::both);
    const Strategy& s = t.at(4).strategy;
    REQUIRE(s.parts.size() == 2);
    CHECK(s.parts[0].n == 2);
    CHECK(s.parts[1].n == 3);
    CHECK(format_strategy(s) == "(W2*(W2*W2))");
    // repeated runs give identical tables
    const CostTable again = optimal_cost_table(4, StrategyClass::both);
    for (int n = 2; n <= 4; ++n) {
      CHECK(again.at(n).cost == t.at(n).cost);
      CHECK(format_strategy(again.at(n).strategy) == format_strategy(t.at(n).strategy));
    }
  }
}

TEST_CASE("brute force agrees with the dynamic program for n <= 8") {
  for (StrategyClass cls :
       {StrategyClass::two_fusion, StrategyClass::three_fusion, StrategyClass::both}) {
    const CostTable t = optimal_cost_table(8, cls);
    for (int n = 2; n <= 8; ++n) {
      const auto bf = brute_force_cost(n, cls);
      CHECK(bf.has_value() == t.at(n).reachable);
      if (bf) CHECK(*bf == t.at(n).cost);  // exact: integer costs
    }
  }
  CHECK(brute_force_cost(3, StrategyClass::both) == 4.0);
  CHECK(brute_force_cost(4, StrategyClass::two_fusion) == 10.0);
  CHECK(brute_force_cost(4, StrategyClass::both) == 10.0);
  CHECK(!brute_force_cost(3, StrategyClass::three_fusion).has_value());
  CHECK_THROWS_AS(brute_force_cost(9, StrategyClass::both), std::invalid_argument);
}

TEST_CASE("custom seed tables") {
  const std::map<int, Real> seeds{{2, 1.0}, {3, 2.0}};
  const CostTable t = optimal_cost_table(5, StrategyClass::two_fusion, seeds);
  CHECK(t.at(3).cost == doctest::Approx(2.0));  // seed beats 2(1+1) = 4
  CHECK(t.at(3).strategy.is_seed());
  CHECK(t.at(4).cost == doctest::Approx(2.0 * (1.0 + 2.0)));
  const auto bf = brute_force_cost(5, StrategyClass::two_fusion, seeds);
  CHECK(*bf == t.at(5).cost);
  CHECK_THROWS_AS(optimal_cost_table(5, StrategyClass::both, {{2, 0.5}}), std::invalid_argument);
}
