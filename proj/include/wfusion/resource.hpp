#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "wfusion/types.hpp"

namespace wfusion {

// Resource accounting in units of R[W_2] = 1: a fusion consumes its inputs'
// costs and succeeds with probability 1/2 (two inputs) or 1/4 (three).
enum class StrategyClass { two_fusion, three_fusion, both };

// Decomposition tree; a leaf is a seed state, an internal node a fusion of
// its two or three parts.
struct Strategy {
  int n = 2;
  std::vector<Strategy> parts;
  bool is_seed() const { return parts.empty(); }
};

struct CostEntry {
  int n = 0;
  bool reachable = false;
  Real cost = 0.0;
  Strategy strategy;
};

struct CostTable {
  int n_max = 2;
  StrategyClass strategy_class = StrategyClass::both;
  std::map<int, Real> seeds;
  std::vector<CostEntry> entries;  // indexed by target size, valid from n = 2
  const CostEntry& at(int n) const;
};

Real cost_two(Real rn, Real rm);
Real cost_three(Real rn, Real rm, Real rt);

// M = T and 4(N-1) >= M-1, the solvable three-input shapes.
bool three_fusion_feasible(int n, int m, int t);

inline const std::map<int, Real> kUnitSeed{{2, 1.0}};

// Optimal cost per target size by dynamic programming over decompositions;
// ties break toward the lexicographically smallest (N, M[, T]).
CostTable optimal_cost_table(int n_max, StrategyClass cls,
                             const std::map<int, Real>& seeds = kUnitSeed);

// Independent oracle: full enumeration of every fusion tree (n <= 8).
std::optional<Real> brute_force_cost(int n, StrategyClass cls,
                                     const std::map<int, Real>& seeds = kUnitSeed);

Real evaluate(const Strategy& s, const std::map<int, Real>& seeds = kUnitSeed);

// "(W2*(W2*W2))" style serialization, comma-free for CSV cells.
std::string format_strategy(const Strategy& s);

}  // namespace wfusion
