#include "wfusion/fusion.hpp"

#include <cmath>
#include <numbers>
#include <vector>

#include "wfusion/dynamics.hpp"

namespace wfusion {

namespace {

void check_sizes_two(int n, int m) {
  if (n < 2 || m < 2) throw std::invalid_argument("fusion input sizes must be >= 2");
}

// Builds the product of W-like inputs with every block's fused atom moved to
// the top of the register, remainder blocks in input order below.
StateVector assemble_register(std::span<const int> sizes) {
  StateVector psi = w_like(sizes[0], sizes[0] - 1);
  for (std::size_t i = 1; i < sizes.size(); ++i) {
    psi = tensor(psi, w_like(sizes[i], sizes[i] - 1));
  }
  const int k = static_cast<int>(sizes.size());
  int total = 0;
  for (int s : sizes) total += s;
  std::vector<int> perm(total);
  int src = 0;
  int rem_dst = 0;
  for (int i = 0; i < k; ++i) {
    for (int j = 0; j + 1 < sizes[i]; ++j) perm[src++] = rem_dst++;
    perm[src++] = total - k + i;  // fused atom of input i
  }
  return permute_atoms(psi, perm);
}

char pattern_char(const std::string& pattern, std::size_t i) {
  const char c = i < pattern.size() ? pattern[i] : 'e';
  if (c != 'e' && c != 'g') throw std::invalid_argument("detector pattern must use 'e'/'g'");
  return c;
}

}  // namespace

Real solve_time_two(int n, int m) {
  check_sizes_two(n, m);
  return std::atan(std::sqrt(static_cast<Real>(m - 1) / static_cast<Real>(n - 1)));
}

Real solve_time_three(int n, int m, int t) {
  check_sizes_two(n, m);
  if (t < 2) throw std::invalid_argument("fusion input sizes must be >= 2");
  if (m != t) {
    throw unsupported_shape_error("three-input fusion requires M = T");
  }
  if (4 * (n - 1) < m - 1) {
    throw infeasible_time_error("no interaction time exists for N=" + std::to_string(n) +
                                ", M=T=" + std::to_string(m) + " (needs 4(N-1) >= M-1)");
  }
  const Real r = static_cast<Real>(n - 1) / static_cast<Real>(m - 1);
  const Real c = (2.0 * r - 5.0) / (2.0 * r + 4.0);
  return std::acos(c) / 3.0;
}

FusionSpec make_fuse2_spec(int n, int m, Real lambda) {
  FusionSpec spec;
  spec.n = n;
  spec.m = m;
  spec.lambda = lambda;
  spec.lambda_t_star = solve_time_two(n, m);
  spec.detector_pattern = "e";
  return spec;
}

FusionSpec make_fuse3_spec(int n, int m, int t, Real lambda) {
  FusionSpec spec;
  spec.n = n;
  spec.m = m;
  spec.t = t;
  spec.lambda = lambda;
  spec.lambda_t_star = solve_time_three(n, m, t);
  spec.detector_pattern = "ee";
  return spec;
}

StateVector fusion_initial_state(const FusionSpec& spec) {
  std::vector<int> sizes{spec.n, spec.m};
  if (spec.t) sizes.push_back(*spec.t);
  for (int s : sizes) {
    if (s < 2) throw std::invalid_argument("fusion input sizes must be >= 2");
  }
  return assemble_register(sizes);
}

FusionOutcome fuse_two(int n, int m, Real lambda, const FuseOptions& options) {
  check_sizes_two(n, m);
  FusionSpec spec;
  spec.n = n;
  spec.m = m;
  spec.lambda = lambda;
  // Measuring a instead of b swaps the roles of the two blocks in the
  // collapse, so the matching interaction time swaps N and M.
  spec.lambda_t_star =
      options.lambda_t.value_or(options.measure_a ? solve_time_two(m, n) : solve_time_two(n, m));
  const std::string pattern = options.detector_pattern.value_or("e");
  spec.detector_pattern = pattern;
  const char want = pattern_char(pattern, 0);

  const int total = spec.total_atoms();
  StateVector psi = fusion_initial_state(spec);
  const int targets[2] = {total - 2, total - 1};
  psi = evolve_in_cavity(psi, targets, 1.0, spec.lambda_t_star);

  const int detector = options.measure_a ? total - 2 : total - 1;
  const auto meas = measure_atom(psi, detector, want == 'e' ? Outcome::e : Outcome::g);
  if (!meas.post) {
    throw std::runtime_error("detector outcome has vanishing probability");
  }

  FusionOutcome out;
  out.spec = spec;
  out.success = want == 'e';
  out.success_probability = meas.probability;
  out.collapsed = *meas.post;
  if (out.success) {
    out.correction = compute_phase_correction(out.collapsed, spec);
    out.corrected = apply(out.correction, out.collapsed);
  } else {
    out.corrected = out.collapsed;
  }
  out.fidelity_vs_target = fidelity(out.corrected, target_fused_state(spec));
  return out;
}

FusionOutcome fuse_three(int n, int m, int t, Real lambda, const FuseOptions& options) {
  FusionSpec spec;
  spec.n = n;
  spec.m = m;
  spec.t = t;
  spec.lambda = lambda;
  spec.lambda_t_star = options.lambda_t.value_or(solve_time_three(n, m, t));
  const std::string pattern = options.detector_pattern.value_or("ee");
  spec.detector_pattern = pattern;
  const char want_b = pattern_char(pattern, 0);
  const char want_c = pattern_char(pattern, 1);

  const int total = spec.total_atoms();
  StateVector psi = fusion_initial_state(spec);
  const int targets[3] = {total - 3, total - 2, total - 1};
  psi = evolve_in_cavity(psi, targets, 1.0, spec.lambda_t_star);

  const auto meas_c = measure_atom(psi, total - 1, want_c == 'e' ? Outcome::e : Outcome::g);
  if (!meas_c.post) throw std::runtime_error("detector outcome has vanishing probability");
  const auto meas_b = measure_atom(*meas_c.post, total - 2, want_b == 'e' ? Outcome::e : Outcome::g);
  if (!meas_b.post) throw std::runtime_error("detector outcome has vanishing probability");

  FusionOutcome out;
  out.spec = spec;
  out.success = want_b == 'e' && want_c == 'e';
  out.success_probability = meas_c.probability * meas_b.probability;
  out.collapsed = *meas_b.post;
  if (out.success) {
    out.correction = compute_phase_correction(out.collapsed, spec);
    out.corrected = apply(out.correction, out.collapsed);
  } else {
    out.corrected = out.collapsed;
  }
  out.fidelity_vs_target = fidelity(out.corrected, target_fused_state(spec));
  return out;
}

Real success_probability_k(int k, Real lambda_t, std::span<const int> sizes) {
  if (k < 2) throw std::invalid_argument("fusion needs at least two inputs");
  if (static_cast<int>(sizes.size()) != k) {
    throw std::invalid_argument("size list must have k entries");
  }
  int total = 0;
  for (int s : sizes) {
    if (s < 2) throw std::invalid_argument("fusion input sizes must be >= 2");
    total += s;
  }
  if (total > 12) {
    throw std::invalid_argument("register of " + std::to_string(total) + " atoms refused (> 12)");
  }

  StateVector psi = assemble_register(sizes);
  std::vector<int> targets(k);
  for (int i = 0; i < k; ++i) targets[i] = total - k + i;
  const MatrixXc u = hermitian_expm(effective_hamiltonian(k, 1.0).mat, lambda_t);
  psi = apply_local(u, targets, psi);

  Real p = 1.0;
  int atoms_left = total;
  for (int i = 0; i < k - 1; ++i) {
    const auto meas = measure_atom(psi, atoms_left - 1, Outcome::e);
    p *= meas.probability;
    if (!meas.post) return p;  // pattern already impossible
    psi = *meas.post;
    --atoms_left;
  }
  return p;
}

}  // namespace wfusion
