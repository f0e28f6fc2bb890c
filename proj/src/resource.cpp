#include "wfusion/resource.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace wfusion {

namespace {

constexpr Real kCostLimit = 9.0e15;  // stay within exact double integers

void check_seeds(const std::map<int, Real>& seeds) {
  if (seeds.empty()) throw std::invalid_argument("seed table must not be empty");
  for (const auto& [n, cost] : seeds) {
    if (n < 2) throw std::invalid_argument("seed sizes must be >= 2");
    if (cost < 1.0) throw std::invalid_argument("seed costs must be >= 1");
  }
}

void check_cost_range(Real cost) {
  if (!(cost < kCostLimit)) {
    throw std::overflow_error("resource cost exceeds the exactly-representable range");
  }
}

bool use_two(StrategyClass cls) { return cls != StrategyClass::three_fusion; }
bool use_three(StrategyClass cls) { return cls != StrategyClass::two_fusion; }

}  // namespace

const CostEntry& CostTable::at(int n) const {
  if (n < 2 || n > n_max) throw std::out_of_range("cost table index out of range");
  return entries[static_cast<std::size_t>(n)];
}

Real cost_two(Real rn, Real rm) {
  if (rn < 1.0 || rm < 1.0) throw std::invalid_argument("costs must be >= 1");
  return 2.0 * (rn + rm);
}

Real cost_three(Real rn, Real rm, Real rt) {
  if (rn < 1.0 || rm < 1.0 || rt < 1.0) throw std::invalid_argument("costs must be >= 1");
  return 4.0 * (rn + rm + rt);
}

bool three_fusion_feasible(int n, int m, int t) {
  return m == t && n >= 2 && m >= 2 && 4 * (n - 1) >= m - 1;
}

CostTable optimal_cost_table(int n_max, StrategyClass cls, const std::map<int, Real>& seeds) {
  if (n_max < 2) throw std::invalid_argument("n_max must be >= 2");
  check_seeds(seeds);

  CostTable table;
  table.n_max = n_max;
  table.strategy_class = cls;
  table.seeds = seeds;
  table.entries.resize(static_cast<std::size_t>(n_max) + 1);

  for (int n = 2; n <= n_max; ++n) {
    CostEntry& entry = table.entries[static_cast<std::size_t>(n)];
    entry.n = n;

    // Candidates in tie-break order: a seed leaf first, then two-input
    // decompositions by (N, M), then three-input ones by (N, M, T).
    if (auto it = seeds.find(n); it != seeds.end()) {
      entry.reachable = true;
      entry.cost = it->second;
      entry.strategy = Strategy{n, {}};
    }
    auto consider = [&](Real cost, Strategy strategy) {
      check_cost_range(cost);
      if (!entry.reachable || cost < entry.cost) {
        entry.reachable = true;
        entry.cost = cost;
        entry.strategy = std::move(strategy);
      }
    };
    if (use_two(cls)) {
      for (int a = 2; a + 2 <= n + 1; ++a) {
        const int b = n + 1 - a;
        const auto& ea = table.entries[static_cast<std::size_t>(a)];
        const auto& eb = table.entries[static_cast<std::size_t>(b)];
        if (!ea.reachable || !eb.reachable) continue;
        consider(cost_two(ea.cost, eb.cost), Strategy{n, {ea.strategy, eb.strategy}});
      }
    }
    if (use_three(cls)) {
      for (int m = 2; n + 2 - 2 * m >= 2; ++m) {
        const int a = n + 2 - 2 * m;
        if (!three_fusion_feasible(a, m, m)) continue;
        const auto& ea = table.entries[static_cast<std::size_t>(a)];
        const auto& em = table.entries[static_cast<std::size_t>(m)];
        if (!ea.reachable || !em.reachable) continue;
        consider(cost_three(ea.cost, em.cost, em.cost),
                 Strategy{n, {ea.strategy, em.strategy, em.strategy}});
      }
    }
  }
  return table;
}

namespace {

// All achievable tree costs for a target size; deliberately unmemoized on
// optimality so it stays independent of the DP above.
std::vector<Real> all_tree_costs(int n, StrategyClass cls, const std::map<int, Real>& seeds) {
  std::vector<Real> costs;
  if (auto it = seeds.find(n); it != seeds.end()) costs.push_back(it->second);
  if (use_two(cls)) {
    for (int a = 2; a + 2 <= n + 1; ++a) {
      const int b = n + 1 - a;
      for (Real ca : all_tree_costs(a, cls, seeds)) {
        for (Real cb : all_tree_costs(b, cls, seeds)) {
          costs.push_back(cost_two(ca, cb));
        }
      }
    }
  }
  if (use_three(cls)) {
    for (int m = 2; n + 2 - 2 * m >= 2; ++m) {
      const int a = n + 2 - 2 * m;
      if (!three_fusion_feasible(a, m, m)) continue;
      for (Real ca : all_tree_costs(a, cls, seeds)) {
        for (Real cm1 : all_tree_costs(m, cls, seeds)) {
          for (Real cm2 : all_tree_costs(m, cls, seeds)) {
            costs.push_back(cost_three(ca, cm1, cm2));
          }
        }
      }
    }
  }
  return costs;
}

}  // namespace

std::optional<Real> brute_force_cost(int n, StrategyClass cls, const std::map<int, Real>& seeds) {
  if (n < 2) throw std::invalid_argument("target size must be >= 2");
  if (n > 8) throw std::invalid_argument("brute-force enumeration is limited to n <= 8");
  check_seeds(seeds);
  const auto costs = all_tree_costs(n, cls, seeds);
  if (costs.empty()) return std::nullopt;
  Real best = std::numeric_limits<Real>::infinity();
  for (Real c : costs) best = std::min(best, c);
  return best;
}

Real evaluate(const Strategy& s, const std::map<int, Real>& seeds) {
  if (s.is_seed()) {
    const auto it = seeds.find(s.n);
    if (it == seeds.end()) {
      throw std::invalid_argument("strategy leaf of size " + std::to_string(s.n) +
                                  " is not a seed");
    }
    return it->second;
  }
  int produced = 1 - static_cast<int>(s.parts.size());
  for (const auto& p : s.parts) produced += p.n;
  if (produced != s.n) throw std::invalid_argument("strategy node sizes are inconsistent");
  if (s.parts.size() == 2) {
    return cost_two(evaluate(s.parts[0], seeds), evaluate(s.parts[1], seeds));
  }
  if (s.parts.size() == 3) {
    if (!three_fusion_feasible(s.parts[0].n, s.parts[1].n, s.parts[2].n)) {
      throw std::invalid_argument("infeasible three-input fusion in strategy");
    }
    return cost_three(evaluate(s.parts[0], seeds), evaluate(s.parts[1], seeds),
                      evaluate(s.parts[2], seeds));
  }
  throw std::invalid_argument("strategy nodes must fuse two or three parts");
}

std::string format_strategy(const Strategy& s) {
  if (s.is_seed()) return "W" + std::to_string(s.n);
  std::string out = "(";
  for (std::size_t i = 0; i < s.parts.size(); ++i) {
    if (i > 0) out += "*";
    out += format_strategy(s.parts[i]);
  }
  return out + ")";
}

}  // namespace wfusion
