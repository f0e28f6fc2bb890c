#include <doctest.h>

#include <cmath>
#include <numbers>

#include "wfusion/dynamics.hpp"
#include "wfusion/fusion.hpp"
#include "wfusion/wstates.hpp"

using namespace wfusion;

namespace {

Real excitation_probability(const StateVector& psi, int atom) {
  return measure_atom(psi, atom, Outcome::e).probability;
}

Real wrap_angle(Real a) {
  const Real two_pi = 2.0 * std::numbers::pi;
  a = std::fmod(a, two_pi);
  if (a < 0.0) a += two_pi;
  return a;
}

}  // namespace

TEST_CASE("standard W states") {
  const StateVector w1 = standard_w(1);
  CHECK(std::abs(w1.amps[1] - Complex{1.0, 0.0}) < 1e-15);

  const StateVector w2 = standard_w(2);
  CHECK(w2.amps[1].real() == doctest::Approx(1.0 / std::sqrt(2.0)));
  CHECK(w2.amps[2].real() == doctest::Approx(1.0 / std::sqrt(2.0)));

  const StateVector w3 = standard_w(3);
  for (int j = 0; j < 3; ++j) {
    CHECK(w3.amps[1 << j].real() == doctest::Approx(1.0 / std::sqrt(3.0)));
  }
  CHECK(norm(w3) == doctest::Approx(1.0));
  CHECK_THROWS_AS(standard_w(0), std::invalid_argument);
}

TEST_CASE("standard W is permutation invariant") {
  const StateVector w4 = standard_w(4);
  const int perm[4] = {2, 0, 3, 1};
  CHECK(fidelity(permute_atoms(w4, perm), w4) == doctest::Approx(1.0));
}

TEST_CASE("W-like states") {
  SUBCASE("n=2 coincides with the standard W") {
    CHECK(fidelity(w_like(2, 1), standard_w(2)) == doctest::Approx(1.0));
  }
  SUBCASE("n=3 amplitudes") {
    const StateVector w = w_like(3, 2);
    CHECK(w.amps[4].real() == doctest::Approx(1.0 / std::sqrt(2.0)));
    CHECK(w.amps[1].real() == doctest::Approx(0.5));
    CHECK(w.amps[2].real() == doctest::Approx(0.5));
  }
  SUBCASE("normalization and reduced excitation probabilities up to n=10") {
    for (int n = 2; n <= 10; ++n) {
      const StateVector w = w_like(n, n - 1);
      CHECK(std::abs(norm(w) - 1.0) < 1e-12);
      CHECK(excitation_probability(w, n - 1) == doctest::Approx(0.5));
      for (int j = 0; j + 1 < n; ++j) {
        CHECK(excitation_probability(w, j) == doctest::Approx(0.5 / (n - 1)));
      }
    }
  }
  SUBCASE("rejects n < 2") { CHECK_THROWS_AS(w_like(1, 0), std::invalid_argument); }
}

TEST_CASE("target fused states") {
  FusionSpec two = make_fuse2_spec(2, 2);
  const StateVector t2 = target_fused_state(two);
  CHECK(t2.n_atoms == 3);
  CHECK(t2.amps[4].real() == doctest::Approx(1.0 / std::sqrt(2.0)));
  CHECK(t2.amps[1].real() == doctest::Approx(0.5));
  CHECK(t2.amps[2].real() == doctest::Approx(0.5));
  CHECK(fidelity(t2, w_like(3, 2)) == doctest::Approx(1.0));

  FusionSpec three = make_fuse3_spec(2, 2, 2);
  const StateVector t3 = target_fused_state(three);
  CHECK(t3.n_atoms == 4);
  CHECK(t3.amps[8].real() == doctest::Approx(1.0 / std::sqrt(2.0)));
  for (int j = 0; j < 3; ++j) {
    CHECK(t3.amps[1 << j].real() == doctest::Approx(1.0 / std::sqrt(6.0)));
  }
}

TEST_CASE("phase correction on an already-correct state is the identity") {
  const FusionSpec spec = make_fuse2_spec(3, 3);
  const StateVector target = target_fused_state(spec);
  const PhaseCorrection corr = compute_phase_correction(target, spec);
  CHECK(wrap_angle(corr.global_phase) == doctest::Approx(0.0));
  for (const auto& g : corr.gates) CHECK(wrap_angle(g.phase) == doctest::Approx(0.0));
  CHECK(fidelity(apply(corr, target), target) == doctest::Approx(1.0));
}

TEST_CASE("phase correction for the two-input collapse at lambda_t = pi/4") {
  // collapsed (N = M = 2) branch amplitudes:
  //   a:        e^{-2i lt}/sqrt(2)
  //   N-block:  e^{-i lt} cos(lt) / sqrt(2)
  //   M-block: -i e^{-i lt} sin(lt) / sqrt(2)
  const Real lt = std::numbers::pi / 4.0;
  const FusionSpec spec = make_fuse2_spec(2, 2);
  VectorXc v = VectorXc::Zero(8);
  const Complex ph = std::exp(Complex{0.0, -lt});
  v[1] = ph * std::cos(lt) / std::sqrt(2.0);
  v[2] = ph * Complex{0.0, -1.0} * std::sin(lt) / std::sqrt(2.0);
  v[4] = std::exp(Complex{0.0, -2.0 * lt}) / std::sqrt(2.0);
  const StateVector collapsed = make_state(std::move(v), 3);

  const PhaseCorrection corr = compute_phase_correction(collapsed, spec);
  CHECK(wrap_angle(corr.global_phase) == doctest::Approx(lt));
  REQUIRE(corr.gates.size() == 2);
  CHECK(corr.gates[0].atom == 1);  // M-block remainder atom
  CHECK(wrap_angle(corr.gates[0].phase) == doctest::Approx(std::numbers::pi / 2.0));
  CHECK(corr.gates[1].atom == 2);  // atom a
  CHECK(wrap_angle(corr.gates[1].phase) == doctest::Approx(lt));

  const StateVector corrected = apply(corr, collapsed);
  const StateVector target = target_fused_state(spec);
  CHECK(fidelity(corrected, target) == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(inner(target, corrected).real() > 0.0);
  CHECK(std::abs(inner(target, corrected).imag()) < 1e-12);
}

TEST_CASE("phase correction for the three-input collapse at lambda_t = 2*pi/9") {
  const Real lt = 2.0 * std::numbers::pi / 9.0;
  const Complex w = std::exp(Complex{0.0, -3.0 * lt});
  const Complex a_coef = (w - 1.0) / 3.0;
  const Complex b_coef = (w + 2.0) / 3.0;
  const FusionSpec spec = make_fuse3_spec(2, 2, 2);

  VectorXc v = VectorXc::Zero(16);
  const Complex ph = std::exp(Complex{0.0, -lt});
  v[1] = ph * b_coef / std::sqrt(2.0);   // N-block
  v[2] = ph * a_coef / std::sqrt(2.0);   // M-block
  v[4] = ph * a_coef / std::sqrt(2.0);   // T-block
  v[8] = std::exp(Complex{0.0, -3.0 * lt}) / std::sqrt(2.0);  // a excited
  const StateVector collapsed = make_state(std::move(v), 4);
  CHECK(std::abs(norm(collapsed) - 1.0) < 1e-12);  // |B|^2 + 2|A|^2 = 1

  const PhaseCorrection corr = compute_phase_correction(collapsed, spec);
  const StateVector corrected = apply(corr, collapsed);
  CHECK(fidelity(corrected, target_fused_state(spec)) == doctest::Approx(1.0).epsilon(1e-10));

  // expected angles from the coefficient arguments
  REQUIRE(corr.gates.size() == 3);
  CHECK(wrap_angle(corr.global_phase) == doctest::Approx(wrap_angle(lt - std::arg(b_coef))));
  CHECK(wrap_angle(corr.gates[0].phase) ==
        doctest::Approx(wrap_angle(std::arg(b_coef) - std::arg(a_coef))));
  CHECK(wrap_angle(corr.gates[2].phase) ==
        doctest::Approx(wrap_angle(2.0 * lt + std::arg(b_coef))));
}

TEST_CASE("phase correction rejects states outside the branch support") {
  const FusionSpec spec = make_fuse2_spec(2, 2);
  StateVector bad = target_fused_state(spec);
  bad.amps[3] = 0.05;  // two-excitation component
  bad = normalized(bad);
  CHECK_THROWS_AS(compute_phase_correction(bad, spec), std::invalid_argument);
}
