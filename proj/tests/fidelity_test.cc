// Copyright 2026 The ddrf-register Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


#include "ddrf/fidelity.hpp"

#include <random>

#include "gtest/gtest.h"

using namespace ddrf;

namespace {

const double kOmegaL = khz_to_rad(432.0);
constexpr double kTargetFactor = 0.9283815;

NuclearSpinParams spin(double apar_khz, double beta, SpinRole role, const std::string& label = "s") {
  NuclearSpinParams s;
  s.a_par = khz_to_rad(apar_khz);
  s.beta = beta;
  s.role = role;
  s.label = label;
  return s;
}

CMatrix random_unitary2(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-kPi, kPi);
  std::normal_distribution<double> g;
  Vec3 n{g(rng), g(rng), g(rng)};
  const double l = norm3(n);
  n = {n[0] / l, n[1] / l, n[2] / l};
  return rot(n, u(rng)) * std::exp(kI * u(rng));
}

BathSpinOverlaps random_bath(std::mt19937_64& rng) {
  ConditionalEvolution ev;
  ev.v0 = random_unitary2(rng);
  ev.v1 = random_unitary2(rng);
  return BathSpinOverlaps::from(ev);
}

// Block-diagonal register unitary sum_j |j><j| (x) T_j with random 2^K blocks.
CMatrix random_register_block(std::mt19937_64& rng, int k) {
  std::vector<CMatrix> f;
  for (int i = 0; i < k; ++i) f.push_back(random_unitary2(rng));
  return kron_all(f);
}

}  // namespace

TEST(fidelity, gate_fidelity_identical_is_one) {
  std::mt19937_64 rng(1);
  const CMatrix u = kron(random_unitary2(rng), random_unitary2(rng));
  const auto r = gate_fidelity(u, u);
  ASSERT_NEAR(r.fidelity, 1.0, 1e-15);
  ASSERT_NEAR(r.infidelity, 0.0, 1e-15);
  ASSERT_EQ(r.model, FidelityModel::exact_gate);
}

TEST(fidelity, gate_fidelity_global_phase_invariance) {
  std::mt19937_64 rng(2);
  for (int trial = 0; trial < 50; ++trial) {
    const CMatrix a = kron(random_unitary2(rng), random_unitary2(rng));
    const CMatrix b = kron(random_unitary2(rng), random_unitary2(rng));
    const double f = gate_fidelity(a, b).fidelity;
    const cplx ph = std::exp(kI * (0.37 * trial));
    ASSERT_NEAR(gate_fidelity(a, ph * b).fidelity, f, 1e-12);
    ASSERT_NEAR(gate_fidelity(ph * a, b).fidelity, f, 1e-12);
  }
}

TEST(fidelity, gate_fidelity_known_values) {
  // Tr[Rx(pi)] = 0 gives F = d / (d (d + 1)) = 1/3.
  ASSERT_NEAR(gate_fidelity(rot(kXAxis, -0.5 * kPi), rot(kXAxis, 0.5 * kPi)).fidelity, 1.0 / 3.0, 1e-15);
  // Small z error: |Tr|^2 = 4 cos^2(eps/2) -> 1 - F = (4 - 4 cos^2(eps/2)) / 6
  const double eps = 1e-4;
  const double expected = 4.0 * std::pow(std::sin(0.5 * eps), 2) / 6.0;
  // absolute limit set by rounding of |Tr|^2 near 4
  ASSERT_NEAR(gate_fidelity(CMatrix::identity(2), rot(kZAxis, eps)).infidelity, expected, 1e-15);
}

TEST(fidelity, gate_fidelity_rejects_bad_input) {
  ASSERT_THROW(gate_fidelity(CMatrix::identity(2), CMatrix::identity(4)), std::invalid_argument);
  ASSERT_THROW(gate_fidelity(CMatrix::identity(2), 1.1 * CMatrix::identity(2)), std::invalid_argument);
}

TEST(fidelity, ideal_crot_structure) {
  for (int s = 0; s <= 2; ++s) {
    const CMatrix u = ideal_crot(s);
    ASSERT_EQ(u.rows(), std::size_t{4} << s);
    ASSERT_TRUE(is_unitary(u));
  }
  const CMatrix u = ideal_crot(0);
  ASSERT_LT(std::abs(u(0, 0) - std::sqrt(0.5)), 1e-15);
  ASSERT_LT(std::abs(u(0, 1) - cplx(0.0, -std::sqrt(0.5))), 1e-15);
  ASSERT_LT(std::abs(u(2, 3) - cplx(0.0, std::sqrt(0.5))), 1e-15);
  ASSERT_EQ(u(0, 2), cplx(0.0));
  ASSERT_THROW(ideal_crot(-1), std::invalid_argument);
}

TEST(fidelity, assemble_gate_checks) {
  const auto t = spin(50.0, 0.0, SpinRole::target, "n1");
  const auto u = spin(30.0, 0.0, SpinRole::unaddressed, "n2");
  const auto seq = make_sequence(t, kOmegaL, 48, 8.0, kTargetFactor);
  const auto a = corrected_evolution(t, seq, seq.drive_freq);
  const auto b = corrected_evolution(u, seq, seq.drive_freq);
  const auto gate = assemble_gate({a, b});
  ASSERT_EQ(gate.dimension(), 8u);
  ASSERT_EQ(gate.spin_order, (std::vector<std::string>{"n1", "n2"}));
  ASSERT_TRUE(is_unitary(gate.matrix));
  ASSERT_THROW(assemble_gate({}), std::invalid_argument);
  ASSERT_THROW(assemble_gate({a, ddrf_evolution(u, seq, seq.drive_freq)}), std::invalid_argument);
  const auto other = make_sequence(t, kOmegaL, 46, 8.0, kTargetFactor);
  ASSERT_THROW(assemble_gate({a, corrected_evolution(u, other, other.drive_freq)}), std::invalid_argument);
}

TEST(fidelity, register_floor_with_unaddressed_spin) {
  const auto t = spin(50.0, 0.0, SpinRole::target, "n1");
  const auto seq = make_sequence(t, kOmegaL, 48, 8.0, kTargetFactor);
  const auto a = corrected_evolution(t, seq, seq.drive_freq);
  const double f4 = gate_fidelity(ideal_crot(0), assemble_gate({a}).matrix).infidelity;
  ASSERT_GT(f4, 1e-7);
  ASSERT_LT(f4, 1e-5);
  const auto b = corrected_evolution(spin(30.0, 0.0, SpinRole::unaddressed), seq, seq.drive_freq);
  const double f8 = gate_fidelity(ideal_crot(1), assemble_gate({a, b}).matrix).infidelity;
  ASSERT_GT(f8, 3e-5);
  ASSERT_LT(f8, 3e-4);
}

TEST(fidelity, kraus_completeness) {
  std::mt19937_64 rng(4);
  for (int l = 1; l <= 6; ++l) {
    std::vector<BathSpinOverlaps> baths;
    for (int i = 0; i < l; ++i) baths.push_back(random_bath(rng));
    const int k = 1 + l % 2;
    const auto ks = kraus_operators(random_register_block(rng, k), random_register_block(rng, k), baths);
    ASSERT_EQ(ks.size(), std::size_t{1} << l);
    CMatrix sum = CMatrix::zeros(ks.front().rows(), ks.front().cols());
    for (const auto& e : ks) sum = sum + e.dagger() * e;
    ASSERT_LT(max_abs_diff(sum, CMatrix::identity(sum.rows())), 1e-10);
  }
}

TEST(fidelity, enumeration_product_and_channel_agree) {
  std::mt19937_64 rng(8);
  for (int l = 1; l <= 6; ++l) {
    for (int k = 1; k <= 3; ++k) {
      std::vector<BathSpinOverlaps> baths;
      for (int i = 0; i < l; ++i) baths.push_back(random_bath(rng));
      const double fe = bath_fidelity(k, baths).fidelity;
      const double fp = bath_fidelity_product(k, baths).fidelity;
      ASSERT_NEAR(fe, fp, 1e-12) << "L-K=" << l << " K=" << k;
      // operator-sum route with the ideal register gate as target blocks
      const CMatrix t0 = random_register_block(rng, k);
      const CMatrix t1 = random_register_block(rng, k);
      const CMatrix u = kron(electron_projector(0), t0) + kron(electron_projector(1), t1);
      ASSERT_NEAR(channel_fidelity(u, kraus_operators(t0, t1, baths)), fe, 1e-12);
    }
  }
}

TEST(fidelity, unconditional_bath_rotation_is_harmless) {
  std::mt19937_64 rng(9);
  for (int l = 1; l <= 5; ++l) {
    std::vector<BathSpinOverlaps> baths;
    for (int i = 0; i < l; ++i) {
      ConditionalEvolution ev;
      ev.v0 = random_unitary2(rng);
      ev.v1 = ev.v0;
      baths.push_back(BathSpinOverlaps::from(ev));
    }
    ASSERT_NEAR(bath_fidelity(2, baths).fidelity, 1.0, 1e-12);
    ASSERT_NEAR(bath_fidelity_product(2, baths).fidelity, 1.0, 1e-12);
  }
}

TEST(fidelity, single_bath_closed_form) {
  std::mt19937_64 rng(10);
  for (int trial = 0; trial < 100; ++trial) {
    const auto b = random_bath(rng);
    const double expected = (3.0 + 2.0 * b.overlap().real()) / 5.0;
    ASSERT_NEAR(bath_fidelity(1, {b}).fidelity, expected, 1e-14);
  }
  // orthogonal final states: 1 - F = 2/5
  const BathSpinOverlaps orth{1.0, 0.0, 0.0, 1.0};
  ASSERT_NEAR(bath_fidelity(1, {orth}).infidelity, 0.4, 1e-15);
}

TEST(fidelity, bath_inputs_validated) {
  const BathSpinOverlaps bad{1.0, 1.0, 1.0, 0.0};
  ASSERT_THROW(bath_fidelity(1, {bad}), std::invalid_argument);
  const BathSpinOverlaps good{1.0, 0.0, 1.0, 0.0};
  ASSERT_THROW(bath_fidelity(0, {good}), std::invalid_argument);
}

TEST(fidelity, many_baths_fall_back_to_product) {
  std::mt19937_64 rng(12);
  std::vector<BathSpinOverlaps> baths;
  for (int i = 0; i < kMaxEnumeratedBaths + 3; ++i) baths.push_back(random_bath(rng));
  const auto r = bath_fidelity(1, baths);
  ASSERT_NEAR(r.fidelity, bath_fidelity_product(1, baths).fidelity, 1e-15);
  ASSERT_THROW(kraus_operators(CMatrix::identity(2), CMatrix::identity(2), baths), std::invalid_argument);
}

TEST(fidelity, bath_overlaps_require_bath_role) {
  const auto t = spin(50.0, 0.0, SpinRole::target);
  const auto seq = make_sequence(t, kOmegaL, 48, 8.0, kTargetFactor);
  ASSERT_THROW(bath_overlaps_from_sequence(t, seq, seq.drive_freq), std::invalid_argument);
  const auto ov = bath_overlaps_from_sequence(spin(50.0, 0.0, SpinRole::bath), seq, seq.drive_freq);
  // a bath spin identical to the target ends in nearly orthogonal states
  ASSERT_NEAR(bath_fidelity(1, {ov}).infidelity, 0.4, 0.02);
}

TEST(fidelity, sinc_values) {
  const auto t = spin(50.0, 0.0, SpinRole::target);
  const auto seq = make_sequence(t, kOmegaL, 48, 8.0);
  const double a = khz_to_rad(50.0);
  ASSERT_DOUBLE_EQ(sinc_infidelity(a, a, seq), 1.0);
  // first zero where N d tau / 2 = pi, i.e. d = 2 pi / (N tau)
  const double w = central_peak_halfwidth(seq);
  ASSERT_NEAR(w, kTwoPi / (48.0 * seq.tau), 1e-9);
  ASSERT_NEAR(rad_to_khz(w), 1.125, 1e-12);
  ASSERT_NEAR(sinc_infidelity(a + w, a, seq), 0.0, 1e-24);
  const double x = 0.5 * 48 * khz_to_rad(3.0) * seq.tau;
  ASSERT_NEAR(sinc_infidelity(a - khz_to_rad(3.0), a, seq), std::pow(std::sin(x) / x, 2), 1e-15);
}

TEST(fidelity, unaddressed_error_identity) {
  // (1 - |ov|^2) - 5 (1 - F) = -|1 - ov|^2 for one bath spin.
  const auto t = spin(50.0, 0.0, SpinRole::target);
  const auto seq = make_sequence(t, kOmegaL, 48, 8.0, kTargetFactor);
  for (double apar : {20.0, 35.0, 44.0, 48.5, 52.0, 70.0}) {
    const auto ev = corrected_evolution(spin(apar, 0.0, SpinRole::bath), seq, seq.drive_freq);
    const auto e = unaddressed_error(ev);
    const cplx ov = BathSpinOverlaps::from(ev).overlap();
    ASSERT_NEAR(e.overlap_error - e.five_times_infidelity, -std::norm(1.0 - ov), 1e-13) << apar;
  }
}

TEST(fidelity, compose_total_values) {
  const auto r = compose_total(0.99, {0.99, 0.99}, {0.99, 0.99}, 2);
  ASSERT_NEAR(r.fidelity, 0.941480149401, 1e-12);
  ASSERT_EQ(r.model, FidelityModel::composed);
  ASSERT_NEAR(compose_total(1.0, {1.0}, {1.0}, 1).fidelity, 1.0, 0.0);
  ASSERT_THROW(compose_total(0.99, {0.99}, {0.99, 0.99}, 2), std::invalid_argument);
  ASSERT_THROW(compose_total(0.99, {}, {}, 0), std::invalid_argument);
  ASSERT_THROW(compose_total(1.2, {0.99}, {0.99}, 1), std::invalid_argument);
}

TEST(fidelity, factorization_of_ideal_rounds_is_exact) {
  // Untilted spins far apart: each round is nearly ideal, composition adds
  // almost nothing beyond the product.
  const auto n1 = spin(50.0, 0.0, SpinRole::target, "n1");
  const auto n2 = spin(30.0, 0.0, SpinRole::target, "n2");
  const auto s1 = make_sequence(n1, kOmegaL, 48, 8.0, kTargetFactor);
  const auto s2 = make_sequence(n2, kOmegaL, 48, 8.0, 0.93);
  const auto r = sequential_factorization_check(n1, n2, s1, s2);
  ASSERT_NEAR(r.f_product, r.f_first * r.f_second, 1e-15);
  ASSERT_LE(r.gap, 1e-3);
  ASSERT_GT(r.f_composed, 0.99);
  ASSERT_NEAR(r.gap, std::abs(r.f_composed - r.f_product), 1e-15);
}

TEST(fidelity, two_electron_round_layout) {
  // Ideal rounds built two ways: via the helper and via explicit kron order.
  const CMatrix id = CMatrix::identity(2);
  const CMatrix rp = rot(kXAxis, 0.5 * kPi);
  const CMatrix rm = rot(kXAxis, -0.5 * kPi);
  const CMatrix r0 = detail::two_electron_round(0, kron(rp, id), kron(rm, id));
  const CMatrix explicit0 = kron(electron_projector(0), id, rp, id) + kron(electron_projector(1), id, rm, id);
  ASSERT_LT(max_abs_diff(r0, explicit0), 1e-15);
  const CMatrix r1 = detail::two_electron_round(1, kron(id, rp), kron(id, rm));
  const CMatrix explicit1 = kron(id, electron_projector(0), id, rp) + kron(id, electron_projector(1), id, rm);
  ASSERT_LT(max_abs_diff(r1, explicit1), 1e-15);
  ASSERT_TRUE(is_unitary(r1 * r0));
}
