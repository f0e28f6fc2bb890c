#pragma once

#include <optional>
#include <span>
#include <vector>

#include "wfusion/dynamics.hpp"
#include "wfusion/fusion.hpp"
#include "wfusion/qcore.hpp"

namespace wfusion {

// Atomic decay (kappa_minus) and pure dephasing (kappa_z) rates in 1/s.
// apply_to selects the noisy atoms; absent means every atom in the register.
struct NoiseParams {
  Real kappa_minus = 0.0;
  Real kappa_z = 0.0;
  std::optional<std::vector<int>> apply_to;
};

// Master-equation right-hand side
//   -i[H, rho] + sum_j [(kappa_-/2) L(s-_j) + (kappa_z/2) L(sz_j)]
// with L(s) = 2 s rho s^dag - s^dag s rho - rho s^dag s and
// sz = |e><e| - |g><g|. Output is Hermitian and traceless.
DensityMatrix lindblad_rhs(const DensityMatrix& rho, const QubitOperator& h,
                           const NoiseParams& noise);

struct MasterSample {
  Real t = 0.0;
  DensityMatrix rho;
};

struct MasterOptions {
  int initial_steps = 0;    // 0: pick from the Hamiltonian scale
  Real refine_tol = 2e-7;   // Frobenius difference between refinements
  Real trace_tol = 1e-8;
  Real positivity_tol = -1e-7;
  int max_doublings = 10;
};

// Fixed-step RK4 with step halving until the refinement difference, trace
// deviation and positivity tolerances are met; the state is re-Hermitized
// after every step. Returns the trajectory at the requested sample times.
std::vector<MasterSample> integrate_master_equation(const DensityMatrix& rho0,
                                                    const QubitOperator& h,
                                                    const NoiseParams& noise, Real t_end,
                                                    std::span<const Real> sample_times,
                                                    const MasterOptions& options = {});

struct FidelityTrace {
  std::vector<Real> times;                   // seconds
  std::vector<Real> fidelity_conditioned;    // post-selected, corrected, renormalized
  std::vector<Real> fidelity_unconditioned;  // overlap with the ideal success branch
  std::vector<Real> success_probability;
};

// Noisy fusion window: evolves the full fusion register under the embedded
// effective Hamiltonian with the given noise and reads out, per sample time,
// the detector success probability, the conditioned fidelity (project the
// detector pattern, renormalize, apply the phase correction computed for
// that time) and the unconditioned overlap with the ideal success branch.
FidelityTrace fidelity_trace(const FusionSpec& spec, const CavityParams& params,
                             const NoiseParams& noise, std::span<const Real> t_grid,
                             const MasterOptions& options = {});

}  // namespace wfusion
