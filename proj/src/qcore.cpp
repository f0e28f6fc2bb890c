#include "wfusion/qcore.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace wfusion {

namespace {

void check_atom_count(int n_atoms, int cavity_dim) {
  if (n_atoms < 0 || n_atoms > 30) {
    throw std::invalid_argument("atom count out of range: " + std::to_string(n_atoms));
  }
  if (cavity_dim < 1) {
    throw std::invalid_argument("cavity dimension must be >= 1");
  }
}

void check_targets(std::span<const int> targets, int n_atoms) {
  for (std::size_t i = 0; i < targets.size(); ++i) {
    if (targets[i] < 0 || targets[i] >= n_atoms) {
      throw std::out_of_range("atom index out of range: " + std::to_string(targets[i]));
    }
    for (std::size_t j = 0; j < i; ++j) {
      if (targets[i] == targets[j]) {
        throw std::invalid_argument("duplicate atom target: " + std::to_string(targets[i]));
      }
    }
  }
}

// Local index i of a k-atom operator spread onto the global target bits.
std::vector<std::uint64_t> spread_table(std::span<const int> targets) {
  const std::size_t k = targets.size();
  std::vector<std::uint64_t> spread(std::size_t{1} << k, 0);
  for (std::uint64_t i = 0; i < spread.size(); ++i) {
    for (std::size_t b = 0; b < k; ++b) {
      if ((i >> b) & 1) spread[i] |= std::uint64_t{1} << targets[b];
    }
  }
  return spread;
}

constexpr Real kImpossibleOutcome = 1e-15;

}  // namespace

Index register_dim(int n_atoms, int cavity_dim) {
  check_atom_count(n_atoms, cavity_dim);
  return (Index{1} << n_atoms) * cavity_dim;
}

StateVector make_state(VectorXc amps, int n_atoms, int cavity_dim) {
  if (amps.size() != register_dim(n_atoms, cavity_dim)) {
    throw std::invalid_argument("amplitude vector length does not match register");
  }
  return StateVector{std::move(amps), n_atoms, cavity_dim};
}

StateVector basis_state(int n_atoms, std::uint64_t bits, int cavity_dim, int fock) {
  const Index d = register_dim(n_atoms, cavity_dim);
  if (bits >= (std::uint64_t{1} << n_atoms)) {
    throw std::invalid_argument("basis bit pattern out of range");
  }
  if (fock < 0 || fock >= cavity_dim) {
    throw std::invalid_argument("Fock level out of range");
  }
  VectorXc amps = VectorXc::Zero(d);
  amps[static_cast<Index>(bits) + (Index{fock} << n_atoms)] = 1.0;
  return StateVector{std::move(amps), n_atoms, cavity_dim};
}

QubitOperator make_operator(MatrixXc mat, int n_atoms, int cavity_dim) {
  if (mat.rows() != mat.cols() || mat.rows() != register_dim(n_atoms, cavity_dim)) {
    throw std::invalid_argument("operator dimension does not match register");
  }
  return QubitOperator{std::move(mat), n_atoms, cavity_dim};
}

DensityMatrix make_density(MatrixXc mat, int n_atoms, int cavity_dim) {
  if (mat.rows() != mat.cols() || mat.rows() != register_dim(n_atoms, cavity_dim)) {
    throw std::invalid_argument("density matrix dimension does not match register");
  }
  return DensityMatrix{std::move(mat), n_atoms, cavity_dim};
}

DensityMatrix to_density(const StateVector& psi) {
  return DensityMatrix{psi.amps * psi.amps.adjoint(), psi.n_atoms, psi.cavity_dim};
}

Real norm(const StateVector& psi) { return psi.amps.norm(); }

Complex inner(const StateVector& a, const StateVector& b) {
  if (a.dim() != b.dim()) throw std::invalid_argument("state dimension mismatch");
  return a.amps.dot(b.amps);  // Eigen dot conjugates the first argument
}

StateVector normalized(StateVector psi) {
  const Real n = norm(psi);
  if (n < 1e-300) throw std::invalid_argument("cannot normalize a null state");
  psi.amps /= n;
  return psi;
}

StateVector tensor(const StateVector& a, const StateVector& b) {
  if (a.cavity_dim != 1 || b.cavity_dim != 1) {
    throw std::invalid_argument("tensor expects cavity-free states");
  }
  const Index da = a.dim();
  VectorXc out(da * b.dim());
  for (Index j = 0; j < b.dim(); ++j) {
    out.segment(j * da, da) = b.amps[j] * a.amps;
  }
  return StateVector{std::move(out), a.n_atoms + b.n_atoms, 1};
}

StateVector with_cavity(const StateVector& atoms, int cavity_dim) {
  if (atoms.cavity_dim != 1) throw std::invalid_argument("state already has a cavity mode");
  if (cavity_dim < 1) throw std::invalid_argument("cavity dimension must be >= 1");
  VectorXc out = VectorXc::Zero(atoms.dim() * cavity_dim);
  out.head(atoms.dim()) = atoms.amps;
  return StateVector{std::move(out), atoms.n_atoms, cavity_dim};
}

StateVector permute_atoms(const StateVector& psi, std::span<const int> perm) {
  const int n = psi.n_atoms;
  if (static_cast<int>(perm.size()) != n) {
    throw std::invalid_argument("permutation length does not match register");
  }
  std::vector<bool> seen(n, false);
  for (int p : perm) {
    if (p < 0 || p >= n || seen[p]) throw std::invalid_argument("invalid atom permutation");
    seen[p] = true;
  }
  const Index atomic = Index{1} << n;
  VectorXc out(psi.dim());
  for (int f = 0; f < psi.cavity_dim; ++f) {
    const Index base = Index{f} << n;
    for (Index s = 0; s < atomic; ++s) {
      Index y = 0;
      for (int i = 0; i < n; ++i) {
        if ((s >> i) & 1) y |= Index{1} << perm[i];
      }
      out[base + y] = psi.amps[base + s];
    }
  }
  return StateVector{std::move(out), n, psi.cavity_dim};
}

DensityMatrix trace_out_cavity(const StateVector& psi) {
  const Index atomic = Index{1} << psi.n_atoms;
  MatrixXc rho = MatrixXc::Zero(atomic, atomic);
  for (int f = 0; f < psi.cavity_dim; ++f) {
    const auto blk = psi.amps.segment(Index{f} * atomic, atomic);
    rho.noalias() += blk * blk.adjoint();
  }
  return DensityMatrix{std::move(rho), psi.n_atoms, 1};
}

MatrixXc kron(const MatrixXc& hi, const MatrixXc& lo) {
  MatrixXc out(hi.rows() * lo.rows(), hi.cols() * lo.cols());
  for (Index i = 0; i < hi.rows(); ++i) {
    for (Index j = 0; j < hi.cols(); ++j) {
      out.block(i * lo.rows(), j * lo.cols(), lo.rows(), lo.cols()) = hi(i, j) * lo;
    }
  }
  return out;
}

bool is_hermitian(const MatrixXc& m, Real tol) {
  if (m.rows() != m.cols()) return false;
  const Real scale = std::max(Real{1}, m.cwiseAbs().maxCoeff());
  return (m - m.adjoint()).cwiseAbs().maxCoeff() <= tol * scale;
}

QubitOperator tensor_embed(const QubitOperator& op, std::span<const int> targets,
                           int n_atoms, int cavity_dim) {
  const std::size_t k = targets.size();
  if (op.cavity_dim != 1) throw std::invalid_argument("embedded operator must be cavity-free");
  if (op.n_atoms != static_cast<int>(k) || op.dim() != (Index{1} << k)) {
    throw std::invalid_argument("operator dimension does not match target count");
  }
  check_targets(targets, n_atoms);
  const Index d = register_dim(n_atoms, cavity_dim);
  const auto spread = spread_table(targets);
  std::uint64_t tmask = 0;
  for (int t : targets) tmask |= std::uint64_t{1} << t;

  MatrixXc out = MatrixXc::Zero(d, d);
  const Index local = Index{1} << k;
  for (Index col = 0; col < d; ++col) {
    const std::uint64_t base = static_cast<std::uint64_t>(col) & ~tmask;
    std::uint64_t j = 0;
    for (std::size_t b = 0; b < k; ++b) {
      if ((col >> targets[b]) & 1) j |= std::uint64_t{1} << b;
    }
    for (Index i = 0; i < local; ++i) {
      const Complex v = op.mat(i, static_cast<Index>(j));
      if (v != Complex{0.0, 0.0}) out(static_cast<Index>(base | spread[i]), col) = v;
    }
  }
  return QubitOperator{std::move(out), n_atoms, cavity_dim};
}

StateVector apply_local(const MatrixXc& op, std::span<const int> targets,
                        const StateVector& psi) {
  const std::size_t k = targets.size();
  if (op.rows() != op.cols() || op.rows() != (Index{1} << k)) {
    throw std::invalid_argument("local operator dimension does not match target count");
  }
  check_targets(targets, psi.n_atoms);
  const auto spread = spread_table(targets);
  std::uint64_t tmask = 0;
  for (int t : targets) tmask |= std::uint64_t{1} << t;

  const Index local = Index{1} << k;
  VectorXc out(psi.dim());
  VectorXc in_block(local);
  for (Index base = 0; base < psi.dim(); ++base) {
    if (static_cast<std::uint64_t>(base) & tmask) continue;
    for (Index i = 0; i < local; ++i) {
      in_block[i] = psi.amps[base + static_cast<Index>(spread[i])];
    }
    const VectorXc out_block = op * in_block;
    for (Index i = 0; i < local; ++i) {
      out[base + static_cast<Index>(spread[i])] = out_block[i];
    }
  }
  return StateVector{std::move(out), psi.n_atoms, psi.cavity_dim};
}

MatrixXc hermitian_expm(const MatrixXc& h, Real t) {
  if (!is_hermitian(h, 1e-10)) {
    throw std::invalid_argument("hermitian_expm requires a Hermitian matrix");
  }
  Eigen::SelfAdjointEigenSolver<MatrixXc> es(h);
  if (es.info() != Eigen::Success) throw std::runtime_error("eigendecomposition failed");
  VectorXc phases(h.rows());
  for (Index i = 0; i < h.rows(); ++i) {
    phases[i] = std::exp(Complex{0.0, -es.eigenvalues()[i] * t});
  }
  return es.eigenvectors() * phases.asDiagonal() * es.eigenvectors().adjoint();
}

StateVector evolve_expm(const QubitOperator& h, Real t, const StateVector& psi) {
  if (h.dim() != psi.dim()) throw std::invalid_argument("operator/state dimension mismatch");
  StateVector out = psi;
  out.amps = hermitian_expm(h.mat, t) * psi.amps;
  return out;
}

Measurement measure_atom(const StateVector& psi, int atom, Outcome outcome) {
  if (atom < 0 || atom >= psi.n_atoms) throw std::out_of_range("atom index out of range");
  const int n = psi.n_atoms;
  const Index atomic = Index{1} << n;
  const std::uint64_t bit = std::uint64_t{1} << atom;
  const std::uint64_t low = bit - 1;
  const int want = static_cast<int>(outcome);

  Real p = 0.0;
  VectorXc post = VectorXc::Zero(psi.dim() / 2);
  for (Index x = 0; x < psi.dim(); ++x) {
    const std::uint64_t s = static_cast<std::uint64_t>(x) & (atomic - 1);
    if (static_cast<int>((s >> atom) & 1) != want) continue;
    p += std::norm(psi.amps[x]);
    const std::uint64_t s_new = (s & low) | ((s >> 1) & ~low);
    const Index f = x >> n;
    post[static_cast<Index>(s_new) + (f << (n - 1))] = psi.amps[x];
  }
  Measurement result;
  result.probability = p;
  if (p >= kImpossibleOutcome) {
    post /= std::sqrt(p);
    result.post = StateVector{std::move(post), n - 1, psi.cavity_dim};
  }
  return result;
}

MeasurementDm measure_atom(const DensityMatrix& rho, int atom, Outcome outcome) {
  if (atom < 0 || atom >= rho.n_atoms) throw std::out_of_range("atom index out of range");
  const int n = rho.n_atoms;
  const Index atomic = Index{1} << n;
  const std::uint64_t low = (std::uint64_t{1} << atom) - 1;
  const int want = static_cast<int>(outcome);

  std::vector<Index> keep, dest;
  keep.reserve(rho.dim() / 2);
  dest.reserve(rho.dim() / 2);
  for (Index x = 0; x < rho.dim(); ++x) {
    const std::uint64_t s = static_cast<std::uint64_t>(x) & (atomic - 1);
    if (static_cast<int>((s >> atom) & 1) != want) continue;
    keep.push_back(x);
    const std::uint64_t s_new = (s & low) | ((s >> 1) & ~low);
    dest.push_back(static_cast<Index>(s_new) + ((x >> n) << (n - 1)));
  }
  MatrixXc post = MatrixXc::Zero(rho.dim() / 2, rho.dim() / 2);
  Real p = 0.0;
  for (std::size_t a = 0; a < keep.size(); ++a) {
    for (std::size_t b = 0; b < keep.size(); ++b) {
      post(dest[a], dest[b]) = rho.mat(keep[a], keep[b]);
    }
    p += rho.mat(keep[a], keep[a]).real();
  }
  MeasurementDm result;
  result.probability = p;
  if (p >= kImpossibleOutcome) {
    post /= p;
    result.post = DensityMatrix{std::move(post), n - 1, rho.cavity_dim};
  }
  return result;
}

namespace {
void check_target_state(const StateVector& target) {
  if (std::abs(norm(target) - 1.0) > 1e-6) {
    throw std::invalid_argument("fidelity target must be normalized");
  }
}
}  // namespace

Real fidelity(const StateVector& psi, const StateVector& target) {
  if (psi.dim() != target.dim()) throw std::invalid_argument("state dimension mismatch");
  check_target_state(target);
  return std::norm(inner(target, psi));
}

Real fidelity(const DensityMatrix& rho, const StateVector& target) {
  if (rho.dim() != target.dim()) throw std::invalid_argument("state dimension mismatch");
  check_target_state(target);
  return (target.amps.adjoint() * rho.mat * target.amps)(0, 0).real();
}

std::string basis_label(std::uint64_t index, int n_atoms, int cavity_dim) {
  std::string label(n_atoms, 'g');
  const std::uint64_t s = index & ((std::uint64_t{1} << n_atoms) - 1);
  for (int j = 0; j < n_atoms; ++j) {
    if ((s >> j) & 1) label[j] = 'e';
  }
  if (cavity_dim > 1) {
    label += ":" + std::to_string(index >> n_atoms);
  }
  return label;
}

}  // namespace wfusion
