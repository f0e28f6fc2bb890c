#pragma once

#include <span>
#include <stdexcept>

#include "wfusion/qcore.hpp"

namespace wfusion {

// Atom-cavity coupling in the large-detuning regime; lambda = g^2/delta is
// the effective atom-atom exchange rate (all rates in rad/s, hbar = 1).
struct CavityParams {
  Real g = 0.0;
  Real delta = 0.0;
  Real lambda = 0.0;
  bool large_detuning() const { return delta >= 10.0 * g; }
};
CavityParams make_cavity_params(Real g, Real delta);

// A = (e^{-i3 lt} - 1)/3, B = (e^{-i3 lt} + 2)/3; B - A = 1, |B|^2 + 2|A|^2 = 1.
struct EvolutionCoefficients {
  Complex a;
  Complex b;
  Real lambda_t = 0.0;
};
EvolutionCoefficients evolution_coefficients(Real lambda_t);

// Vacuum-sector effective Hamiltonian on k atoms:
//   H = lambda (sum_j |e><e|_j + sum_{i != j} s+_j s-_i)
QubitOperator effective_hamiltonian(int k, Real lambda);

// Second-order atom-cavity Hamiltonian on k atoms x truncated Fock space:
//   H = lambda sum_{i,j} (s+_j s-_i a a^dag - s-_j s+_i a^dag a)
// Its cavity-vacuum block equals effective_hamiltonian(k, lambda).
QubitOperator photon_number_hamiltonian(int k, Real lambda, int cavity_cutoff);

// Closed-form two- and three-atom evolution maps as functions of lambda*t.
MatrixXc closed_form_map_2(Real lambda_t);
MatrixXc closed_form_map_3(Real lambda_t);

// Effective evolution of the listed atoms embedded in a larger register
// (closed form for 2 or 3 atoms, matrix exponential otherwise).
StateVector evolve_in_cavity(const StateVector& psi, std::span<const int> in_cavity,
                             Real lambda, Real t);

struct fock_cutoff_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct step_control_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct StepControl {
  int initial_steps = 256;
  Real refine_tol = 1e-9;   // successive-refinement difference on the final state
  int max_doublings = 14;
  Real top_fock_tol = 1e-6;
};

// Integrates the interaction-picture Schrodinger equation with
//   H_I(t) = g sum_j (e^{-i delta t} a^dag s-_j + e^{i delta t} a s+_j)
// over the atoms listed in in_cavity. psi0 must carry the cavity mode in
// vacuum. Fixed-step RK4, step-halved until the refinement difference drops
// below control.refine_tol. Throws fock_cutoff_error when the top Fock level
// becomes populated beyond control.top_fock_tol.
StateVector full_model_evolve(const StateVector& psi0, std::span<const int> in_cavity,
                              const CavityParams& params, Real t,
                              const StepControl& control = {});

// Convenience wrapper: starts from an atoms-only state, attaches a vacuum
// cavity of the given cutoff and doubles it on cutoff exhaustion.
struct FullModelResult {
  StateVector state;  // still carries the cavity mode
  int cutoff_used = 0;
};
FullModelResult full_model_evolve_auto(const StateVector& atoms, std::span<const int> in_cavity,
                                       const CavityParams& params, Real t,
                                       int initial_cutoff = 4, const StepControl& control = {});

}  // namespace wfusion
