#pragma once

#include <optional>
#include <span>

#include "wfusion/fusion_spec.hpp"
#include "wfusion/wstates.hpp"

namespace wfusion {

// Interaction time (as lambda*t) fusing W-like inputs of sizes N and M,
// the unique solution of |cos(lt)|/sqrt(N-1) = |sin(lt)|/sqrt(M-1) in (0, pi/2).
Real solve_time_two(int n, int m);

// Three-input time from |B|/sqrt(N-1) = |A|/sqrt(M-1), principal branch
// 3*lt in (0, pi). Requires M = T and 4(N-1) >= M-1.
Real solve_time_three(int n, int m, int t);

FusionSpec make_fuse2_spec(int n, int m, Real lambda = 1.0);
FusionSpec make_fuse3_spec(int n, int m, int t, Real lambda = 1.0);

// Initial register |W_N> x |W_M> (x |W_T>) in the fusion layout
// [N-rem, M-rem, (T-rem,) a, b (, c)].
StateVector fusion_initial_state(const FusionSpec& spec);

struct FuseOptions {
  // Detector choice for two-input fusion: measure b (default) or a.
  bool measure_a = false;
  // Required detector outcomes; defaults to all-e (success post-selection).
  std::optional<std::string> detector_pattern;
  // Override the solved interaction time (dimensionless lambda*t).
  std::optional<Real> lambda_t;
};

struct FusionOutcome {
  FusionSpec spec;
  bool success = false;              // detector pattern was all-e
  Real success_probability = 0.0;    // probability of the requested pattern
  StateVector collapsed;             // renormalized, measured atoms removed
  PhaseCorrection correction;        // identity for failure outcomes
  StateVector corrected;
  Real fidelity_vs_target = 0.0;
};

FusionOutcome fuse_two(int n, int m, Real lambda = 1.0, const FuseOptions& options = {});
FusionOutcome fuse_three(int n, int m, int t, Real lambda = 1.0, const FuseOptions& options = {});

// Probability that all k-1 measured fused atoms read e after evolving the
// k fused atoms of |W_{s1}> x ... x |W_{sk}> for the given lambda*t.
// Registers beyond 12 atoms are refused.
Real success_probability_k(int k, Real lambda_t, std::span<const int> sizes);

}  // namespace wfusion
