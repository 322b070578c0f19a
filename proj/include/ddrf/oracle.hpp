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

#ifndef DDRF_ORACLE_HPP
#define DDRF_ORACLE_HPP

// Brute-force reference propagator. Integrates the secular Hamiltonian with
// the full cosine drive 2 Omega cos(omega t + phi_k) Ix in the non-rotating
// frame (no rotating-wave approximation), switching the branch Hamiltonian at
// the instantaneous electron pi pulses.
//
// Each step is a fourth-order Magnus step with two Gauss-Legendre nodes,
// exponentiated in closed form, so the propagator stays unitary to rounding.

#include <cmath>
#include <stdexcept>

#include "ddrf/evolution.hpp"
#include "ddrf/spinalg.hpp"
#include "ddrf/system.hpp"

namespace ddrf {

struct IntegratorSpec {
  int steps_per_drive_period = 256;
};

inline constexpr int kMinStepsPerDrivePeriod = 64;

/// Static lab-frame Hamiltonian of a branch: omegaL Iz, or
/// (omegaL - aPar) Iz + aPerp Ix while the electron is in |1>.
inline CMatrix static_hamiltonian(const NuclearSpinParams& spin, double omega_larmor, Branch b) {
  if (b == Branch::zero) return spin_component({0.0, 0.0, omega_larmor});
  return spin_component({spin.a_perp(omega_larmor), 0.0, omega_larmor - spin.a_par});
}

/// Uncorrected non-rotating-frame propagator of one branch.
inline CMatrix integrate_branch_raw(const NuclearSpinParams& spin, const DdrfSequence& seq,
                                    double target_omega1, Branch electron_branch,
                                    const IntegratorSpec& spec = {}) {
  if (spec.steps_per_drive_period < kMinStepsPerDrivePeriod) {
    throw std::invalid_argument("oracle: at least 64 steps per drive period required");
  }
  const double omega = seq.drive_freq;
  const double h_max = kTwoPi / omega / spec.steps_per_drive_period;
  const double g = std::sqrt(3.0) / 6.0;
  const SpinHalfOps ops = spin_half_ops();

  CMatrix u = CMatrix::identity(2);
  for (const Segment& s : ddrf_segments(seq, electron_branch)) {
    const CMatrix h_static = static_hamiltonian(spin, seq.omega_larmor, s.branch);
    const double phi = rf_phase(s.k, seq, target_omega1);
    const int n = static_cast<int>(std::ceil(s.length / h_max - 1e-9));
    const double h = s.length / n;
    for (int i = 0; i < n; ++i) {
      const double t0 = s.start + i * h;
      const double d1 = 2.0 * seq.rabi * std::cos(omega * (t0 + (0.5 - g) * h) + phi);
      const double d2 = 2.0 * seq.rabi * std::cos(omega * (t0 + (0.5 + g) * h) + phi);
      const CMatrix h1 = h_static + d1 * ops.ix;
      const CMatrix h2 = h_static + d2 * ops.ix;
      // exp(-i K) with K = h/2 (H1 + H2) - i sqrt(3) h^2 / 12 [H2, H1]
      CMatrix k = (0.5 * h) * (h1 + h2) + (-kI * (std::sqrt(3.0) * h * h / 12.0)) * commutator(h2, h1);
      // hermitize against rounding in the commutator term
      k = 0.5 * (k + k.dagger());
      u = expm_herm2(k, 1.0) * u;
    }
  }
  return u;
}

/// Oracle propagator of one branch, phase corrected like corrected_evolution.
inline CMatrix integrate_branch(const NuclearSpinParams& spin, const DdrfSequence& seq,
                                double target_omega1, Branch electron_branch,
                                const IntegratorSpec& spec = {}) {
  const CMatrix raw = integrate_branch_raw(spin, seq, target_omega1, electron_branch, spec);
  const double w1 = derive_omega1(spin, seq.omega_larmor);
  return rot(kZAxis, -phase_correction_angle(w1, seq)) * raw;
}

inline ConditionalEvolution oracle_evolution(const NuclearSpinParams& spin, const DdrfSequence& seq,
                                             double target_omega1, const IntegratorSpec& spec = {}) {
  ConditionalEvolution ev;
  ev.v0 = integrate_branch(spin, seq, target_omega1, Branch::zero, spec);
  ev.v1 = integrate_branch(spin, seq, target_omega1, Branch::one, spec);
  ev.phase_corrected = true;
  ev.spin_label = spin.label;
  ev.sequence = seq;
  return ev;
}

/// Spectral norm of a 2x2 matrix.
inline double operator_norm2(const CMatrix& a) {
  if (a.rows() != 2 || a.cols() != 2) throw std::invalid_argument("operator_norm2 needs 2x2");
  const CMatrix g = a.dagger() * a;
  const double tr = g.trace().real();
  const double det = (g(0, 0) * g(1, 1) - g(0, 1) * g(1, 0)).real();
  const double disc = std::sqrt(std::max(0.0, 0.25 * tr * tr - det));
  return std::sqrt(std::max(0.0, 0.5 * tr + disc));
}

struct OracleComparison {
  double distance0 = 0.0;  // ||V0_rwa - V0_oracle||
  double distance1 = 0.0;
  double unitarity_defect = 0.0;

  double max_distance() const { return std::max(distance0, distance1); }
};

/// Operator-norm distance between the RWA propagators and the oracle.
inline OracleComparison compare_with_oracle(const NuclearSpinParams& spin, const DdrfSequence& seq,
                                            double target_omega1, const IntegratorSpec& spec = {}) {
  const auto rwa = corrected_evolution(spin, seq, target_omega1);
  const auto ora = oracle_evolution(spin, seq, target_omega1, spec);
  OracleComparison out;
  out.distance0 = operator_norm2(rwa.v0 - ora.v0);
  out.distance1 = operator_norm2(rwa.v1 - ora.v1);
  out.unitarity_defect = std::max(unitarity_defect(ora.v0), unitarity_defect(ora.v1));
  return out;
}

}  // namespace ddrf

#endif  // DDRF_ORACLE_HPP
