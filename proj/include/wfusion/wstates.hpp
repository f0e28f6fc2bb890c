#pragma once

#include <vector>

#include "wfusion/fusion_spec.hpp"
#include "wfusion/qcore.hpp"

namespace wfusion {

// W-like state shape: the distinguished ("fused") atom carries excitation
// amplitude 1/sqrt(2), the other n-1 atoms share the rest equally.
struct WLikeDescriptor {
  int n = 2;
  int fused_atom = 0;
};

// One diagonal gate diag(1, e^{i phase}) per listed atom plus a global phase.
struct PhaseGate {
  int atom = 0;
  Real phase = 0.0;
};
struct PhaseCorrection {
  std::vector<PhaseGate> gates;
  Real global_phase = 0.0;
};

// |W_n>: equal-amplitude single-excitation superposition; |W_1> = |e>.
StateVector standard_w(int n);

// W-like state of n >= 2 atoms with the given distinguished atom.
StateVector w_like(int n, int fused_atom);
StateVector w_like(const WLikeDescriptor& d);

// The W-like state a successful fusion should produce, over the collapsed
// register (atom a last).
StateVector target_fused_state(const FusionSpec& spec);

// Diagonal single-atom corrections mapping a collapsed fusion state onto the
// target with a real positive overlap. Solved from the branch amplitudes.
PhaseCorrection compute_phase_correction(const StateVector& collapsed, const FusionSpec& spec);

StateVector apply(const PhaseCorrection& corr, const StateVector& psi);
PhaseCorrection inverse(PhaseCorrection corr);

}  // namespace wfusion
