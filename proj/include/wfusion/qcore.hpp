#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>

#include "wfusion/types.hpp"

// Finite-dimensional register algebra for two-level atoms plus an optional
// truncated cavity mode.
//
// Index convention (used everywhere in this library):
//   - atoms are little-endian: atom j is bit j of the atomic part of an index
//   - |g> maps to bit 0, |e> to bit 1
//   - with a cavity of dimension d, the global index is f * 2^n + s where
//     s is the atomic bit pattern and f the Fock level (cavity is the most
//     significant "digit")

namespace wfusion {

struct StateVector {
  VectorXc amps;
  int n_atoms = 0;
  int cavity_dim = 1;
  Index dim() const { return amps.size(); }
};

struct DensityMatrix {
  MatrixXc mat;
  int n_atoms = 0;
  int cavity_dim = 1;
  Index dim() const { return mat.rows(); }
};

struct QubitOperator {
  MatrixXc mat;
  int n_atoms = 0;
  int cavity_dim = 1;
  Index dim() const { return mat.rows(); }
};

enum class Outcome { g = 0, e = 1 };

Index register_dim(int n_atoms, int cavity_dim = 1);

// Constructors; all validate dimensions.
StateVector make_state(VectorXc amps, int n_atoms, int cavity_dim = 1);
StateVector basis_state(int n_atoms, std::uint64_t bits, int cavity_dim = 1, int fock = 0);
QubitOperator make_operator(MatrixXc mat, int n_atoms, int cavity_dim = 1);
DensityMatrix make_density(MatrixXc mat, int n_atoms, int cavity_dim = 1);
DensityMatrix to_density(const StateVector& psi);

Real norm(const StateVector& psi);
Complex inner(const StateVector& a, const StateVector& b);
StateVector normalized(StateVector psi);

// a occupies atoms [0, a.n_atoms), b the ones above; cavity-free states only.
StateVector tensor(const StateVector& a, const StateVector& b);

// Extends an atoms-only state by a cavity mode in the vacuum state.
StateVector with_cavity(const StateVector& atoms, int cavity_dim);

// perm[i] is the destination index of atom i; the cavity part is untouched.
StateVector permute_atoms(const StateVector& psi, std::span<const int> perm);

// Reduced atomic density matrix, cavity mode traced out.
DensityMatrix trace_out_cavity(const StateVector& psi);

// kron(hi, lo): lo's index is the minor (fastest-varying) one.
MatrixXc kron(const MatrixXc& hi, const MatrixXc& lo);

bool is_hermitian(const MatrixXc& m, Real tol);

// Operator acting as `op` on the listed atoms (targets[0] = bit 0 of op's
// local index) and as identity on every other atom and on the cavity.
QubitOperator tensor_embed(const QubitOperator& op, std::span<const int> targets,
                           int n_atoms, int cavity_dim = 1);

// Applies a k-atom operator to a state without forming the embedded matrix.
StateVector apply_local(const MatrixXc& op, std::span<const int> targets,
                        const StateVector& psi);

// e^{-i h t} for Hermitian h, by eigendecomposition (hbar = 1).
MatrixXc hermitian_expm(const MatrixXc& h, Real t);
StateVector evolve_expm(const QubitOperator& h, Real t, const StateVector& psi);

// Projective measurement of one atom. The measured atom is removed from the
// register after projection; `post` is absent when the outcome probability
// is below 1e-15.
struct Measurement {
  Real probability = 0.0;
  std::optional<StateVector> post;
};
struct MeasurementDm {
  Real probability = 0.0;
  std::optional<DensityMatrix> post;
};
Measurement measure_atom(const StateVector& psi, int atom, Outcome outcome);
MeasurementDm measure_atom(const DensityMatrix& rho, int atom, Outcome outcome);

// F = |<target|psi>|^2, resp. <target|rho|target>. `target` must be normalized.
Real fidelity(const StateVector& psi, const StateVector& target);
Real fidelity(const DensityMatrix& rho, const StateVector& target);

// "geg" style label, atom 0 leftmost; ":f" photon suffix when cavity_dim > 1.
std::string basis_label(std::uint64_t index, int n_atoms, int cavity_dim = 1);

}  // namespace wfusion
