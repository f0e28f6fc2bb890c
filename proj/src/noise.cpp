#include "wfusion/noise.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include <Eigen/Sparse>

namespace wfusion {

namespace {

using SparseXc = Eigen::SparseMatrix<Complex, Eigen::RowMajor>;

std::vector<int> noisy_atoms(const NoiseParams& noise, int n_atoms) {
  std::vector<int> atoms;
  if (noise.apply_to) {
    for (int a : *noise.apply_to) {
      if (a < 0 || a >= n_atoms) throw std::out_of_range("noise atom index out of range");
      atoms.push_back(a);
    }
    std::sort(atoms.begin(), atoms.end());
    atoms.erase(std::unique(atoms.begin(), atoms.end()), atoms.end());
  } else {
    atoms.resize(n_atoms);
    for (int a = 0; a < n_atoms; ++a) atoms[a] = a;
  }
  return atoms;
}

// Structured evaluation of the master-equation right-hand side. The unitary
// part uses a sparse H; the dissipator is applied entrywise: decay and
// dephasing contribute a precomputed real coefficient per entry plus the
// decay gain term, a per-atom shifted gather.
class LindbladKernel {
 public:
  LindbladKernel(const QubitOperator& h, const NoiseParams& noise)
      : n_atoms_(h.n_atoms),
        dim_(h.dim()),
        kappa_minus_(noise.kappa_minus),
        atoms_(noisy_atoms(noise, h.n_atoms)) {
    if (noise.kappa_minus < 0.0 || noise.kappa_z < 0.0) {
      throw std::invalid_argument("noise rates must be >= 0");
    }
    h_sparse_ = h.mat.sparseView(1.0, 1e-300);
    detect_top_block(h);
    // damp(x, y) = -(km/2) (pop(x) + pop(y)) - 2 kz * #differing noisy atoms,
    // pop counted over the noisy atoms of the atomic part of the index.
    std::uint64_t mask = 0;
    for (int a : atoms_) mask |= std::uint64_t{1} << a;
    const std::uint64_t atomic = (std::uint64_t{1} << n_atoms_) - 1;
    Eigen::ArrayXd pop(dim_);
    for (Index x = 0; x < dim_; ++x) {
      pop[x] = static_cast<Real>(__builtin_popcountll(static_cast<std::uint64_t>(x) & atomic & mask));
    }
    damp_.resize(dim_, dim_);
    for (Index y = 0; y < dim_; ++y) {
      for (Index x = 0; x < dim_; ++x) {
        const std::uint64_t diff = (static_cast<std::uint64_t>(x) ^ static_cast<std::uint64_t>(y)) & atomic & mask;
        damp_(x, y) = -(noise.kappa_minus / 2.0) * (pop[x] + pop[y]) -
                      2.0 * noise.kappa_z * __builtin_popcountll(diff);
      }
    }
    // index lists (atomic bit clear) for the decay gain gather
    if (kappa_minus_ > 0.0) {
      for (int a : atoms_) {
        std::vector<Index> idx;
        idx.reserve(dim_ / 2);
        for (Index x = 0; x < dim_; ++x) {
          const std::uint64_t s = static_cast<std::uint64_t>(x) & atomic;
          if (!((s >> a) & 1)) idx.push_back(x);
        }
        gain_idx_.push_back(std::move(idx));
        gain_shift_.push_back(Index{1} << a);
      }
    }
  }

  Index dim() const { return dim_; }

  // out = rhs(rho); rho must be Hermitian, so the result is Hermitian and
  // only the lower triangle is computed directly. The commutator uses one
  // H*rho product plus its conjugate transpose, fused tile-wise with the
  // damping coefficients to keep the pass cache-friendly at large dimensions.
  void rhs(const MatrixXc& rho, MatrixXc& out, MatrixXc& scratch) const {
    if (block_ > 0) {
      // H = kron(h_loc, I): mix the per-column segments; every column stays
      // resident in L1 while it is combined
      const Index nb = h_loc_.rows();
      for (Index c = 0; c < dim_; ++c) {
        const auto src = rho.col(c);
        auto dst = scratch.col(c);
        for (Index i = 0; i < nb; ++i) {
          auto seg = dst.segment(i * block_, block_);
          seg.setZero();
          for (Index j = 0; j < nb; ++j) {
            if (h_loc_(i, j) != Complex{0.0, 0.0}) {
              seg.noalias() += h_loc_(i, j) * src.segment(j * block_, block_);
            }
          }
        }
      }
    } else {
      scratch.noalias() = h_sparse_ * rho;
    }
    constexpr Index kTile = 64;
    const Complex mi{0.0, -1.0};
    for (Index y0 = 0; y0 < dim_; y0 += kTile) {
      const Index y1 = std::min(y0 + kTile, dim_);
      for (Index x0 = y0; x0 < dim_; x0 += kTile) {
        const Index x1 = std::min(x0 + kTile, dim_);
        for (Index y = y0; y < y1; ++y) {
          for (Index x = std::max(x0, y); x < x1; ++x) {
            const Complex v =
                mi * (scratch(x, y) - std::conj(scratch(y, x))) + damp_(x, y) * rho(x, y);
            out(x, y) = v;
            out(y, x) = std::conj(v);
          }
        }
      }
    }
    for (std::size_t i = 0; i < gain_idx_.size(); ++i) {
      const auto& idx = gain_idx_[i];
      const Index shift = gain_shift_[i];
      for (Index yj = 0; yj < static_cast<Index>(idx.size()); ++yj) {
        const Index y = idx[yj];
        for (Index xj = 0; xj < static_cast<Index>(idx.size()); ++xj) {
          const Index x = idx[xj];
          out(x, y) += kappa_minus_ * rho(x + shift, y + shift);
        }
      }
    }
  }

  Real hamiltonian_scale() const {
    Real scale = 0.0;
    for (int k = 0; k < h_sparse_.outerSize(); ++k) {
      Real col = 0.0;
      for (SparseXc::InnerIterator it(h_sparse_, k); it; ++it) col += std::abs(it.value());
      scale = std::max(scale, col);
    }
    return scale;
  }

 private:
  // Hamiltonians embedded on the top atoms factor exactly as kron(h_loc, I);
  // that structure makes H*rho a set of contiguous block operations.
  void detect_top_block(const QubitOperator& h) {
    if (h.cavity_dim != 1) return;
    for (int k = 1; k <= std::min(n_atoms_, 6); ++k) {
      const Index nb = Index{1} << k;
      const Index block = dim_ / nb;
      MatrixXc loc(nb, nb);
      for (Index i = 0; i < nb; ++i) {
        for (Index j = 0; j < nb; ++j) loc(i, j) = h.mat(i * block, j * block);
      }
      bool match = true;
      for (Index c = 0; c < dim_ && match; ++c) {
        const Index j = c / block;
        const Index b = c % block;
        for (Index r = 0; r < dim_; ++r) {
          const Complex expected = (r % block == b) ? loc(r / block, j) : Complex{0.0, 0.0};
          if (h.mat(r, c) != expected) {
            match = false;
            break;
          }
        }
      }
      if (match) {
        h_loc_ = std::move(loc);
        block_ = block;
        return;
      }
    }
  }

  int n_atoms_;
  Index dim_;
  Real kappa_minus_;
  std::vector<int> atoms_;
  SparseXc h_sparse_;
  MatrixXc h_loc_;
  Index block_ = 0;
  Eigen::ArrayXXd damp_;
  std::vector<std::vector<Index>> gain_idx_;
  std::vector<Index> gain_shift_;
};

Real min_eigenvalue(const MatrixXc& rho) {
  Eigen::SelfAdjointEigenSolver<MatrixXc> es(rho, Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

struct Trajectory {
  std::vector<MatrixXc> samples;
  MatrixXc final_state;
  Real max_trace_dev = 0.0;
};

// In-place (m + m^dag)/2, tile-wise to avoid a strided full-matrix pass.
void hermitize(MatrixXc& m) {
  constexpr Index kTile = 64;
  const Index d = m.rows();
  for (Index y0 = 0; y0 < d; y0 += kTile) {
    const Index y1 = std::min(y0 + kTile, d);
    for (Index x0 = y0; x0 < d; x0 += kTile) {
      const Index x1 = std::min(x0 + kTile, d);
      for (Index y = y0; y < y1; ++y) {
        for (Index x = std::max(x0, y); x < x1; ++x) {
          const Complex v = 0.5 * (m(x, y) + std::conj(m(y, x)));
          m(x, y) = v;
          m(y, x) = std::conj(v);
        }
      }
    }
  }
}

Trajectory run_trajectory(const LindbladKernel& kernel, const MatrixXc& rho0,
                          std::span<const Real> times, Real t_end, long total_steps) {
  Trajectory traj;
  MatrixXc rho = rho0;
  MatrixXc k1(rho.rows(), rho.cols()), k2 = k1, k3 = k1, k4 = k1, stage = k1, scratch = k1;
  const Real h_target = t_end / static_cast<Real>(total_steps);

  auto advance = [&](Real from, Real to) {
    if (to <= from) return;
    const long steps = std::max<long>(1, static_cast<long>(std::ceil((to - from) / h_target - 1e-12)));
    const Real h = (to - from) / static_cast<Real>(steps);
    for (long s = 0; s < steps; ++s) {
      kernel.rhs(rho, k1, scratch);
      stage = rho + (h / 2) * k1;
      kernel.rhs(stage, k2, scratch);
      stage = rho + (h / 2) * k2;
      kernel.rhs(stage, k3, scratch);
      stage = rho + h * k3;
      kernel.rhs(stage, k4, scratch);
      rho += (h / 6) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
      hermitize(rho);
    }
  };

  Real t_prev = 0.0;
  for (Real t : times) {
    advance(t_prev, t);
    t_prev = std::max(t_prev, t);
    traj.samples.push_back(rho);
    traj.max_trace_dev = std::max(traj.max_trace_dev, std::abs(rho.trace().real() - 1.0));
  }
  advance(t_prev, t_end);
  traj.final_state = std::move(rho);
  return traj;
}

}  // namespace

DensityMatrix lindblad_rhs(const DensityMatrix& rho, const QubitOperator& h,
                           const NoiseParams& noise) {
  if (rho.dim() != h.dim() || rho.n_atoms != h.n_atoms) {
    throw std::invalid_argument("density matrix and Hamiltonian dimensions do not match");
  }
  LindbladKernel kernel(h, noise);
  MatrixXc out(rho.dim(), rho.dim());
  MatrixXc scratch(rho.dim(), rho.dim());
  kernel.rhs(rho.mat, out, scratch);
  return DensityMatrix{std::move(out), rho.n_atoms, rho.cavity_dim};
}

std::vector<MasterSample> integrate_master_equation(const DensityMatrix& rho0,
                                                    const QubitOperator& h,
                                                    const NoiseParams& noise, Real t_end,
                                                    std::span<const Real> sample_times,
                                                    const MasterOptions& options) {
  if (rho0.dim() != h.dim()) {
    throw std::invalid_argument("density matrix and Hamiltonian dimensions do not match");
  }
  if (t_end <= 0.0) throw std::invalid_argument("t_end must be positive");
  if (std::abs(rho0.mat.trace().real() - 1.0) > 1e-9 || !is_hermitian(rho0.mat, 1e-9)) {
    throw std::invalid_argument("initial state is not a physical density matrix");
  }
  std::vector<Real> times(sample_times.begin(), sample_times.end());
  if (times.empty()) times.push_back(t_end);
  for (std::size_t i = 0; i < times.size(); ++i) {
    if (times[i] < 0.0 || times[i] > t_end * (1.0 + 1e-12)) {
      throw std::invalid_argument("sample times must lie in [0, t_end]");
    }
    if (i > 0 && times[i] < times[i - 1]) {
      throw std::invalid_argument("sample times must be non-decreasing");
    }
  }

  LindbladKernel kernel(h, noise);
  long steps = options.initial_steps;
  if (steps <= 0) {
    // resolve the fastest Hamiltonian/dissipator rate to ~0.04 per step
    const Real rate = kernel.hamiltonian_scale() +
                      (noise.kappa_minus + 2.0 * noise.kappa_z) * h.n_atoms;
    steps = std::max<long>(32, static_cast<long>(rate * t_end / 0.04));
  }

  auto positivity_ok = [&](const Trajectory& traj) {
    std::vector<std::size_t> probe;
    if (rho0.dim() <= 128) {
      for (std::size_t i = 0; i < traj.samples.size(); ++i) probe.push_back(i);
    } else if (rho0.dim() <= 512) {
      probe = {0, traj.samples.size() / 2, traj.samples.size() - 1};
    } else {
      probe = {traj.samples.size() - 1};
    }
    for (std::size_t i : probe) {
      if (min_eigenvalue(traj.samples[i]) < options.positivity_tol) return false;
    }
    return true;
  };

  // Refinement ladder; only the candidate run keeps its sampled states, the
  // reference run is reduced to its final state to bound peak memory.
  Trajectory prev = run_trajectory(kernel, rho0.mat, times, t_end, steps);
  prev.samples.clear();
  prev.samples.shrink_to_fit();
  for (int d = 0; d < options.max_doublings; ++d) {
    steps *= 2;
    Trajectory fine = run_trajectory(kernel, rho0.mat, times, t_end, steps);
    const Real diff = (fine.final_state - prev.final_state).norm();
    if (diff < options.refine_tol && fine.max_trace_dev < options.trace_tol &&
        positivity_ok(fine)) {
      std::vector<MasterSample> out;
      out.reserve(times.size());
      for (std::size_t i = 0; i < times.size(); ++i) {
        out.push_back({times[i], DensityMatrix{std::move(fine.samples[i]), rho0.n_atoms,
                                               rho0.cavity_dim}});
      }
      return out;
    }
    fine.samples.clear();
    fine.samples.shrink_to_fit();
    prev = std::move(fine);
  }
  throw step_control_error("master-equation integrator did not meet its tolerances");
}

FidelityTrace fidelity_trace(const FusionSpec& spec, const CavityParams& params,
                             const NoiseParams& noise, std::span<const Real> t_grid,
                             const MasterOptions& options) {
  if (spec.total_atoms() > 10) {
    throw std::invalid_argument("fidelity trace register of " +
                                std::to_string(spec.total_atoms()) + " atoms refused (> 10)");
  }
  const int total = spec.total_atoms();
  const int k = spec.inputs();
  const Real lambda = params.lambda;
  if (lambda <= 0.0) throw std::invalid_argument("fidelity trace needs lambda > 0");

  const StateVector psi0 = fusion_initial_state(spec);
  std::vector<int> targets(k);
  for (int i = 0; i < k; ++i) targets[i] = total - k + i;
  const QubitOperator h = tensor_embed(effective_hamiltonian(k, lambda), targets, total);

  std::vector<Real> times(t_grid.begin(), t_grid.end());
  if (times.empty()) throw std::invalid_argument("empty time grid");
  const Real t_end = times.back();

  std::vector<MasterSample> samples;
  if (t_end <= 0.0) {
    for (Real t : times) samples.push_back({t, to_density(psi0)});
  } else {
    samples = integrate_master_equation(to_density(psi0), h, noise, t_end, times, options);
  }

  const StateVector target = target_fused_state(spec);
  FidelityTrace trace;
  for (const auto& sample : samples) {
    const Real t = sample.t;

    // ideal (noiseless) pipeline at this time fixes the phase correction
    StateVector ideal = evolve_in_cavity(psi0, targets, lambda, t);
    Real p = 1.0;
    DensityMatrix rho = sample.rho;
    for (int i = 0; i < k - 1; ++i) {
      const int atom = total - 1 - i;
      const auto m_dm = measure_atom(rho, atom, Outcome::e);
      p *= m_dm.probability;
      const auto m_ideal = measure_atom(ideal, atom, Outcome::e);
      if (!m_dm.post || !m_ideal.post) {
        p = 0.0;
        break;
      }
      rho = *m_dm.post;
      ideal = *m_ideal.post;
    }

    Real f_cond = 0.0;
    Real f_uncond = 0.0;
    if (p > 0.0) {
      const PhaseCorrection corr = compute_phase_correction(ideal, spec);
      // <T|U rho U^dag|T> = <U^dag T|rho|U^dag T>
      const StateVector rotated_target = apply(inverse(corr), target);
      f_cond = fidelity(rho, rotated_target);
      // ideal success branch on the full register: corrected target below
      // the detector atoms, detectors in |e>
      StateVector detectors = basis_state(k - 1, (std::uint64_t{1} << (k - 1)) - 1);
      const StateVector branch = tensor(rotated_target, detectors);
      f_uncond = fidelity(sample.rho, branch);
    }

    trace.times.push_back(t);
    trace.success_probability.push_back(p);
    trace.fidelity_conditioned.push_back(f_cond);
    trace.fidelity_unconditioned.push_back(f_uncond);
  }
  return trace;
}

}  // namespace wfusion
