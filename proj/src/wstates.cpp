#include "wfusion/wstates.hpp"

#include <cmath>
#include <stdexcept>

namespace wfusion {

namespace {

// Remainder-atom index ranges of the collapsed register, one per input block.
std::vector<std::pair<int, int>> block_ranges(const FusionSpec& spec) {
  std::vector<std::pair<int, int>> blocks;
  blocks.emplace_back(0, spec.n - 1);
  blocks.emplace_back(spec.n - 1, spec.n + spec.m - 2);
  if (spec.t) {
    blocks.emplace_back(spec.n + spec.m - 2, spec.n + spec.m + *spec.t - 3);
  }
  return blocks;
}

}  // namespace

StateVector standard_w(int n) {
  if (n < 1) throw std::invalid_argument("standard W state needs n >= 1");
  VectorXc amps = VectorXc::Zero(Index{1} << n);
  const Real a = 1.0 / std::sqrt(static_cast<Real>(n));
  for (int j = 0; j < n; ++j) amps[Index{1} << j] = a;
  return StateVector{std::move(amps), n, 1};
}

StateVector w_like(int n, int fused_atom) {
  if (n < 2) throw std::invalid_argument("W-like state needs n >= 2");
  if (fused_atom < 0 || fused_atom >= n) throw std::out_of_range("fused atom out of range");
  VectorXc amps = VectorXc::Zero(Index{1} << n);
  amps[Index{1} << fused_atom] = 1.0 / std::sqrt(2.0);
  const Real rest = 1.0 / std::sqrt(2.0 * (n - 1));
  for (int j = 0; j < n; ++j) {
    if (j != fused_atom) amps[Index{1} << j] = rest;
  }
  return StateVector{std::move(amps), n, 1};
}

StateVector w_like(const WLikeDescriptor& d) { return w_like(d.n, d.fused_atom); }

StateVector target_fused_state(const FusionSpec& spec) {
  if (spec.n < 2 || spec.m < 2 || (spec.t && *spec.t < 2)) {
    throw std::invalid_argument("fusion input sizes must be >= 2");
  }
  const int n_out = spec.output_size();
  return w_like(n_out, n_out - 1);
}

PhaseCorrection compute_phase_correction(const StateVector& collapsed, const FusionSpec& spec) {
  const int n_out = spec.output_size();
  if (collapsed.n_atoms != n_out || collapsed.cavity_dim != 1) {
    throw std::invalid_argument("collapsed state does not match the fusion output register");
  }

  // Branch support: exactly the single-excitation basis states.
  Real off_support = 0.0;
  for (Index x = 0; x < collapsed.dim(); ++x) {
    const bool single = x != 0 && (x & (x - 1)) == 0;
    if (!single) off_support = std::max(off_support, std::abs(collapsed.amps[x]));
  }
  if (off_support > 1e-10) {
    throw std::invalid_argument("collapsed state lacks the expected branch structure");
  }

  const int a_idx = n_out - 1;
  const auto blocks = block_ranges(spec);
  const Complex amp_ref = collapsed.amps[Index{1} << blocks[0].first];
  const Real ref_arg = std::abs(amp_ref) > 1e-12 ? std::arg(amp_ref) : 0.0;

  PhaseCorrection corr;
  corr.global_phase = -ref_arg;
  auto block_phase = [&](Complex amp) {
    return std::abs(amp) > 1e-12 ? ref_arg - std::arg(amp) : 0.0;
  };
  for (std::size_t b = 1; b < blocks.size(); ++b) {
    const Real phase = block_phase(collapsed.amps[Index{1} << blocks[b].first]);
    for (int j = blocks[b].first; j < blocks[b].second; ++j) {
      corr.gates.push_back({j, phase});
    }
  }
  corr.gates.push_back({a_idx, block_phase(collapsed.amps[Index{1} << a_idx])});
  return corr;
}

StateVector apply(const PhaseCorrection& corr, const StateVector& psi) {
  std::vector<Real> per_atom(psi.n_atoms, 0.0);
  for (const auto& g : corr.gates) {
    if (g.atom < 0 || g.atom >= psi.n_atoms) throw std::out_of_range("gate atom out of range");
    per_atom[g.atom] += g.phase;
  }
  const Index atomic = Index{1} << psi.n_atoms;
  StateVector out = psi;
  for (Index x = 0; x < psi.dim(); ++x) {
    Real phase = corr.global_phase;
    const std::uint64_t s = static_cast<std::uint64_t>(x) & (atomic - 1);
    for (int j = 0; j < psi.n_atoms; ++j) {
      if ((s >> j) & 1) phase += per_atom[j];
    }
    out.amps[x] *= std::exp(Complex{0.0, phase});
  }
  return out;
}

PhaseCorrection inverse(PhaseCorrection corr) {
  corr.global_phase = -corr.global_phase;
  for (auto& g : corr.gates) g.phase = -g.phase;
  return corr;
}

}  // namespace wfusion
