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


#include "ddrf/spinalg.hpp"

#include <random>

#include "gtest/gtest.h"

using namespace ddrf;

namespace {

CMatrix random_hermitian(std::mt19937_64& rng, std::size_t n, double scale) {
  std::normal_distribution<double> g(0.0, scale);
  CMatrix a(n, n);
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t c = 0; c < n; ++c) a(r, c) = cplx{g(rng), g(rng)};
  }
  return 0.5 * (a + a.dagger());
}

// Plain Taylor series with 40 terms after scaling by 2^s; independent of the
// Pauli closed form.
CMatrix series_expm(const CMatrix& h, double t) {
  const double nrm = max_abs(h) * std::abs(t) * 2.0;
  int s = 0;
  while (std::ldexp(nrm, -s) > 0.5) ++s;
  const CMatrix x = (-kI * std::ldexp(t, -s)) * h;
  CMatrix term = CMatrix::identity(h.rows());
  CMatrix sum = term;
  for (int k = 1; k <= 40; ++k) {
    term = term * x * (1.0 / k);
    sum = sum + term;
  }
  for (int i = 0; i < s; ++i) sum = sum * sum;
  return sum;
}

CMatrix random_unitary2(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-kPi, kPi);
  std::normal_distribution<double> g;
  Vec3 n{g(rng), g(rng), g(rng)};
  const double l = norm3(n);
  n = {n[0] / l, n[1] / l, n[2] / l};
  return rot(n, u(rng)) * std::exp(kI * u(rng));
}

}  // namespace

TEST(spinalg, identity_and_trace) {
  const CMatrix id = CMatrix::identity(4);
  ASSERT_EQ(id.trace(), cplx(4.0, 0.0));
  ASSERT_TRUE(is_unitary(id));
  ASSERT_EQ(id.shape(), "4x4");
}

TEST(spinalg, multiply_shape_mismatch_throws) {
  ASSERT_THROW(CMatrix(2, 3) * CMatrix(2, 3), std::invalid_argument);
  ASSERT_THROW(CMatrix(2, 2) + CMatrix(3, 3), std::invalid_argument);
}

TEST(spinalg, spin_operators_commutation) {
  const auto ops = spin_half_ops();
  ASSERT_LT(max_abs_diff(commutator(ops.ix, ops.iy), kI * ops.iz), 1e-15);
  ASSERT_LT(max_abs_diff(commutator(ops.iy, ops.iz), kI * ops.ix), 1e-15);
  ASSERT_LT(max_abs_diff(commutator(ops.iz, ops.ix), kI * ops.iy), 1e-15);
  ASSERT_LT(max_abs_diff(ops.ix * ops.ix, 0.25 * CMatrix::identity(2)), 1e-15);
}

TEST(spinalg, kron_dimensions_and_mixed_product) {
  std::mt19937_64 rng(7);
  const CMatrix a = random_hermitian(rng, 2, 1.0);
  const CMatrix b = random_hermitian(rng, 3, 1.0);
  const CMatrix c = random_hermitian(rng, 2, 1.0);
  const CMatrix d = random_hermitian(rng, 3, 1.0);
  const CMatrix ab = kron(a, b);
  ASSERT_EQ(ab.rows(), 6u);
  ASSERT_LT(max_abs_diff(kron(a, b) * kron(c, d), kron(a * c, b * d)), 1e-12);
  ASSERT_LT(max_abs_diff(kron(a, b, c), kron(kron(a, b), c)), 1e-15);
  ASSERT_LT(max_abs_diff(kron_all({a, b, c}), kron(a, kron(b, c))), 1e-15);
}

TEST(spinalg, rot_known_values) {
  // R_x(pi) = -i sigma_x
  const CMatrix rx = rot(kXAxis, kPi);
  ASSERT_LT(max_abs_diff(rx, CMatrix{{0.0, -kI}, {-kI, 0.0}}), 1e-15);
  // R_z(pi/2) = diag(e^{-i pi/4}, e^{i pi/4})
  const CMatrix rz = rot(kZAxis, 0.5 * kPi);
  ASSERT_LT(std::abs(rz(0, 0) - std::exp(-kI * kPi / 4.0)), 1e-15);
  ASSERT_LT(std::abs(rz(1, 1) - std::exp(kI * kPi / 4.0)), 1e-15);
  // 4 pi periodicity, 2 pi sign flip
  ASSERT_LT(max_abs_diff(rot(kYAxis, 0.3 + 4.0 * kPi), rot(kYAxis, 0.3)), 1e-14);
  ASSERT_LT(max_abs_diff(rot(kYAxis, 0.3 + 2.0 * kPi), -1.0 * rot(kYAxis, 0.3)), 1e-14);
}

TEST(spinalg, rot_rejects_non_unit_axis) {
  ASSERT_THROW(rot({1.0, 1.0, 0.0}, 0.1), std::invalid_argument);
}

TEST(spinalg, rot_matches_expm_of_generator) {
  const Vec3 n{0.6, 0.0, 0.8};
  ASSERT_LT(max_abs_diff(rot(n, 1.234), expm_herm2(spin_component(n), 1.234)), 1e-14);
}

TEST(spinalg, expm_matches_series_oracle) {
  std::mt19937_64 rng(2026);
  std::uniform_real_distribution<double> tdist(-3.0, 3.0);
  double worst = 0.0;
  for (int trial = 0; trial < 1000; ++trial) {
    const CMatrix h = random_hermitian(rng, 2, 1.0);
    const double t = tdist(rng);
    worst = std::max(worst, max_abs_diff(expm_herm2(h, t), series_expm(h, t)));
  }
  ASSERT_LT(worst, 1e-10);
}

TEST(spinalg, expm_zero_and_scalar) {
  ASSERT_LT(max_abs_diff(expm_herm2(CMatrix::zeros(2, 2), 5.0), CMatrix::identity(2)), 1e-16);
  const CMatrix h = 2.0 * CMatrix::identity(2);
  ASSERT_LT(max_abs_diff(expm_herm2(h, 0.5), std::exp(-kI) * CMatrix::identity(2)), 1e-15);
}

TEST(spinalg, expm_rejects_bad_input) {
  ASSERT_THROW(expm_herm2(CMatrix::identity(3), 1.0), std::invalid_argument);
  ASSERT_THROW(expm_herm2(CMatrix{{0.0, 1.0}, {0.0, 0.0}}, 1.0), std::invalid_argument);
}

TEST(spinalg, expm_is_unitary) {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 200; ++trial) {
    const CMatrix h = random_hermitian(rng, 2, 1e5);
    ASSERT_TRUE(is_unitary(expm_herm2(h, 1e-3), 1e-10));
  }
}

TEST(spinalg, axis_angle_round_trip) {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 500; ++trial) {
    const CMatrix u = random_unitary2(rng);
    const AxisAngle aa = axis_angle_of(u);
    ASSERT_GE(aa.angle, 0.0);
    ASSERT_LE(aa.angle, kPi);
    ASSERT_LE(std::abs(aa.global_phase), kPi);
    ASSERT_LT(max_abs_diff(aa.to_matrix(), u), 1e-10);
  }
}

TEST(spinalg, axis_angle_conventions) {
  const AxisAngle zero = axis_angle_of(CMatrix::identity(2));
  ASSERT_EQ(zero.axis, kZAxis);
  ASSERT_EQ(zero.angle, 0.0);
  // R_x(-pi/2) reads as a +pi/2 rotation about -x
  const AxisAngle m = axis_angle_of(rot(kXAxis, -0.5 * kPi));
  ASSERT_NEAR(m.angle, 0.5 * kPi, 1e-14);
  ASSERT_NEAR(m.axis[0], -1.0, 1e-14);
  // angle pi: axis sign fixed, phase absorbs it
  const AxisAngle p = axis_angle_of(rot({0.0, -1.0, 0.0}, kPi));
  ASSERT_NEAR(p.angle, kPi, 1e-12);
  ASSERT_NEAR(p.axis[1], 1.0, 1e-12);
  ASSERT_LT(max_abs_diff(p.to_matrix(), rot({0.0, -1.0, 0.0}, kPi)), 1e-12);
}

TEST(spinalg, axis_angle_rejects_non_unitary) {
  ASSERT_THROW(axis_angle_of(2.0 * CMatrix::identity(2)), std::invalid_argument);
}

TEST(spinalg, bloch_vectors) {
  const State2 up{1.0, 0.0};
  const State2 plus{1.0 / std::sqrt(2.0), 1.0 / std::sqrt(2.0)};
  const State2 plus_i{1.0 / std::sqrt(2.0), kI / std::sqrt(2.0)};
  ASSERT_EQ(bloch_vector(up), (Vec3{0.0, 0.0, 1.0}));
  const Vec3 bx = bloch_vector(plus);
  ASSERT_NEAR(bx[0], 1.0, 1e-15);
  const Vec3 by = bloch_vector(plus_i);
  ASSERT_NEAR(by[1], 1.0, 1e-15);
  // <sigma> against traces with the spin operators
  const auto ops = spin_half_ops();
  const State2 psi{cplx{0.6, 0.1}, cplx{-0.2, std::sqrt(1.0 - 0.37 - 0.04)}};
  const Vec3 r = bloch_vector(psi);
  ASSERT_NEAR(r[0], 2.0 * inner(psi, apply_to(ops.ix, psi)).real(), 1e-15);
  ASSERT_NEAR(r[1], 2.0 * inner(psi, apply_to(ops.iy, psi)).real(), 1e-15);
  ASSERT_NEAR(r[2], 2.0 * inner(psi, apply_to(ops.iz, psi)).real(), 1e-15);
  ASSERT_NEAR(norm3(r), 1.0, 1e-15);
}
