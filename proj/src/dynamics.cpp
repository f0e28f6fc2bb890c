#include "wfusion/dynamics.hpp"

#include <cmath>
#include <vector>

#include <Eigen/Sparse>

namespace wfusion {

namespace {

int popcount(std::uint64_t x) { return static_cast<int>(__builtin_popcountll(x)); }

using SparseXc = Eigen::SparseMatrix<Complex>;

// a^dag sum_j s-_j on (n atoms) x (cutoff Fock levels), restricted to the
// listed atoms. The full interaction Hamiltonian is
//   H_I(t) = g (e^{-i delta t} M + e^{+i delta t} M^dag).
SparseXc lowering_raising_coupling(int n_atoms, std::span<const int> targets, int cutoff) {
  const Index atomic = Index{1} << n_atoms;
  std::vector<Eigen::Triplet<Complex>> trips;
  for (int f = 0; f + 1 < cutoff; ++f) {
    const Real amp = std::sqrt(static_cast<Real>(f + 1));
    for (Index s = 0; s < atomic; ++s) {
      for (int j : targets) {
        if ((s >> j) & 1) {
          const Index row = (Index{f + 1} << n_atoms) + (s & ~(Index{1} << j));
          const Index col = (Index{f} << n_atoms) + s;
          trips.emplace_back(row, col, amp);
        }
      }
    }
  }
  SparseXc m(atomic * cutoff, atomic * cutoff);
  m.setFromTriplets(trips.begin(), trips.end());
  return m;
}

}  // namespace

CavityParams make_cavity_params(Real g, Real delta) {
  if (g < 0.0) throw std::invalid_argument("coupling g must be >= 0");
  if (delta <= 0.0) throw std::invalid_argument("detuning delta must be > 0");
  return CavityParams{g, delta, g * g / delta};
}

EvolutionCoefficients evolution_coefficients(Real lambda_t) {
  const Complex w = std::exp(Complex{0.0, -3.0 * lambda_t});
  return EvolutionCoefficients{(w - 1.0) / 3.0, (w + 2.0) / 3.0, lambda_t};
}

QubitOperator effective_hamiltonian(int k, Real lambda) {
  if (k < 1) throw std::invalid_argument("effective Hamiltonian needs k >= 1");
  const Index d = Index{1} << k;
  MatrixXc h = MatrixXc::Zero(d, d);
  for (Index x = 0; x < d; ++x) {
    h(x, x) = lambda * popcount(static_cast<std::uint64_t>(x));
    for (int i = 0; i < k; ++i) {
      if (!((x >> i) & 1)) continue;
      for (int j = 0; j < k; ++j) {
        if (j == i || ((x >> j) & 1)) continue;
        const Index y = (x & ~(Index{1} << i)) | (Index{1} << j);
        h(y, x) += lambda;  // s+_j s-_i
      }
    }
  }
  return QubitOperator{std::move(h), k, 1};
}

QubitOperator photon_number_hamiltonian(int k, Real lambda, int cavity_cutoff) {
  if (k < 1) throw std::invalid_argument("photon-number Hamiltonian needs k >= 1");
  if (cavity_cutoff < 1) throw std::invalid_argument("cavity cutoff must be >= 1");
  const Index d = Index{1} << k;

  // A1 = sum_{i,j} s+_j s-_i, A2 = sum_{i,j} s-_j s+_i (i = j terms included).
  MatrixXc a1 = MatrixXc::Zero(d, d);
  MatrixXc a2 = MatrixXc::Zero(d, d);
  for (Index x = 0; x < d; ++x) {
    for (int i = 0; i < k; ++i) {
      for (int j = 0; j < k; ++j) {
        if (i == j) {
          if ((x >> i) & 1) {
            a1(x, x) += 1.0;  // |e><e|_i
          } else {
            a2(x, x) += 1.0;  // |g><g|_i
          }
          continue;
        }
        if (((x >> i) & 1) && !((x >> j) & 1)) {
          const Index y = (x & ~(Index{1} << i)) | (Index{1} << j);
          a1(y, x) += 1.0;
        }
        if (!((x >> i) & 1) && ((x >> j) & 1)) {
          const Index y = (x | (Index{1} << i)) & ~(Index{1} << j);
          a2(y, x) += 1.0;
        }
      }
    }
  }
  // a a^dag and a^dag a are diagonal in the truncated Fock basis; the top
  // level has a^dag|top> = 0.
  MatrixXc f1 = MatrixXc::Zero(cavity_cutoff, cavity_cutoff);
  MatrixXc f2 = MatrixXc::Zero(cavity_cutoff, cavity_cutoff);
  for (int f = 0; f < cavity_cutoff; ++f) {
    f1(f, f) = (f + 1 < cavity_cutoff) ? static_cast<Real>(f + 1) : 0.0;
    f2(f, f) = static_cast<Real>(f);
  }
  MatrixXc h = lambda * (kron(f1, a1) - kron(f2, a2));
  return QubitOperator{std::move(h), k, cavity_cutoff};
}

MatrixXc closed_form_map_2(Real lambda_t) {
  MatrixXc u = MatrixXc::Zero(4, 4);
  const Complex ph = std::exp(Complex{0.0, -lambda_t});
  const Real c = std::cos(lambda_t);
  const Real s = std::sin(lambda_t);
  u(0, 0) = 1.0;
  u(3, 3) = std::exp(Complex{0.0, -2.0 * lambda_t});
  u(1, 1) = ph * c;
  u(2, 1) = ph * Complex{0.0, -s};
  u(2, 2) = ph * c;
  u(1, 2) = ph * Complex{0.0, -s};
  return u;
}

MatrixXc closed_form_map_3(Real lambda_t) {
  const auto [a, b, lt] = evolution_coefficients(lambda_t);
  MatrixXc u = MatrixXc::Zero(8, 8);
  const Complex ph = std::exp(Complex{0.0, -lambda_t});
  u(0, 0) = 1.0;
  u(7, 7) = std::exp(Complex{0.0, -3.0 * lambda_t});
  // two excitations (one atom in g): extra e^{-i lambda t} prefactor
  const int two_exc[3] = {6, 5, 3};
  for (int src : two_exc) {
    for (int dst : two_exc) u(dst, src) = ph * (dst == src ? b : a);
  }
  // one excitation: bare A/B coefficients
  const int one_exc[3] = {4, 2, 1};
  for (int src : one_exc) {
    for (int dst : one_exc) u(dst, src) = (dst == src ? b : a);
  }
  return u;
}

StateVector evolve_in_cavity(const StateVector& psi, std::span<const int> in_cavity,
                             Real lambda, Real t) {
  const int k = static_cast<int>(in_cavity.size());
  if (k < 2) throw std::invalid_argument("in-cavity evolution needs at least two atoms");
  const Real lt = lambda * t;
  MatrixXc u;
  if (k == 2) {
    u = closed_form_map_2(lt);
  } else if (k == 3) {
    u = closed_form_map_3(lt);
  } else {
    u = hermitian_expm(effective_hamiltonian(k, 1.0).mat, lt);
  }
  return apply_local(u, in_cavity, psi);
}

StateVector full_model_evolve(const StateVector& psi0, std::span<const int> in_cavity,
                              const CavityParams& params, Real t,
                              const StepControl& control) {
  if (psi0.cavity_dim < 2) {
    throw std::invalid_argument("full-model evolution needs a cavity mode (cutoff >= 2)");
  }
  const Index atomic = Index{1} << psi0.n_atoms;
  const Index top_base = Index{psi0.cavity_dim - 1} << psi0.n_atoms;
  if (psi0.amps.segment(top_base, atomic).norm() > 0.0) {
    throw std::invalid_argument("cavity must start below the top Fock level");
  }
  if (t < 0.0) throw std::invalid_argument("negative evolution time");
  if (params.g == 0.0 || t == 0.0) return psi0;

  const SparseXc m = lowering_raising_coupling(psi0.n_atoms, in_cavity, psi0.cavity_dim);
  const SparseXc md = SparseXc(m.adjoint());
  const Complex mi{0.0, -1.0};
  auto rhs = [&](const VectorXc& psi, Real tau, VectorXc& out) {
    const Complex fwd = params.g * std::exp(Complex{0.0, -params.delta * tau});
    out.noalias() = m * psi;
    out *= fwd;
    out.noalias() += std::conj(fwd) * (md * psi);
    out *= mi;
  };

  auto run = [&](long steps) {
    VectorXc psi = psi0.amps;
    VectorXc k1(psi.size()), k2(psi.size()), k3(psi.size()), k4(psi.size()), tmp(psi.size());
    const Real h = t / static_cast<Real>(steps);
    Real max_top = 0.0;
    for (long s = 0; s < steps; ++s) {
      const Real tau = h * static_cast<Real>(s);
      rhs(psi, tau, k1);
      tmp = psi + (h / 2) * k1;
      rhs(tmp, tau + h / 2, k2);
      tmp = psi + (h / 2) * k2;
      rhs(tmp, tau + h / 2, k3);
      tmp = psi + h * k3;
      rhs(tmp, tau + h, k4);
      psi += (h / 6) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
      max_top = std::max(max_top, psi.segment(top_base, atomic).squaredNorm());
    }
    return std::pair{psi, max_top};
  };

  long steps = control.initial_steps;
  VectorXc psi_prev = run(steps).first;
  for (int d = 0; d < control.max_doublings; ++d) {
    steps *= 2;
    auto [psi_fine, top_fine] = run(steps);
    const Real diff = (psi_fine - psi_prev).norm();
    if (diff < control.refine_tol) {
      if (top_fine > control.top_fock_tol) {
        throw fock_cutoff_error("top Fock level population " + std::to_string(top_fine) +
                                " exceeds tolerance; raise the cavity cutoff");
      }
      return StateVector{std::move(psi_fine), psi0.n_atoms, psi0.cavity_dim};
    }
    psi_prev = std::move(psi_fine);
  }
  throw step_control_error("full-model integrator did not converge (step-size underflow)");
}

FullModelResult full_model_evolve_auto(const StateVector& atoms, std::span<const int> in_cavity,
                                       const CavityParams& params, Real t,
                                       int initial_cutoff, const StepControl& control) {
  int cutoff = std::max(2, initial_cutoff);
  for (;;) {
    try {
      StateVector psi = full_model_evolve(with_cavity(atoms, cutoff), in_cavity, params, t, control);
      return FullModelResult{std::move(psi), cutoff};
    } catch (const fock_cutoff_error&) {
      if (cutoff > 64) throw;
      cutoff *= 2;
    }
  }
}

}  // namespace wfusion
