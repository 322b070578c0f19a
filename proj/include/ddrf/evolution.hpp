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

#ifndef DDRF_EVOLUTION_HPP
#define DDRF_EVOLUTION_HPP

// Conditional nuclear-spin propagators for a DDRF sequence.
//
// The electron pi pulses are instantaneous, so the sequence splits into N+1
// free segments: tau, (N-1) x 2 tau, tau. Within a segment the nuclear spin
// sees a time-independent Hamiltonian in the rotating frame of the current
// electron branch (RWA applied). At each pulse the state is carried from the
// frame of the old branch to the frame of the new one, and a final
// R_sigma(2 N tau)^dagger returns the result to the non-rotating frame.

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "ddrf/spinalg.hpp"
#include "ddrf/system.hpp"

namespace ddrf {

enum class Branch { zero = 0, one = 1 };

inline Branch other(Branch b) { return b == Branch::zero ? Branch::one : Branch::zero; }
inline int index_of(Branch b) { return static_cast<int>(b); }

struct ConditionalEvolution {
  CMatrix v0;
  CMatrix v1;
  bool phase_corrected = false;
  std::string spin_label;
  DdrfSequence sequence;

  const CMatrix& branch(Branch b) const { return b == Branch::zero ? v0 : v1; }
};

struct RwaHamiltonians {
  CMatrix h0;
  CMatrix h1;
};

/// Rotating-frame Hamiltonians of both electron branches for RF phase `phi`.
inline RwaHamiltonians rwa_hamiltonians(const NuclearSpinParams& spin, const DdrfSequence& seq,
                                        double phi) {
  const double omega = seq.drive_freq;
  const double omega1 = derive_omega1(spin, seq.omega_larmor);
  const double cb = std::cos(spin.beta);
  const double sb = std::sin(spin.beta);
  const double cp = std::cos(phi);
  const double sp = std::sin(phi);
  const double det1 = omega1 - omega;
  const double rabi_t = seq.rabi * cb;
  // tilde Ix = cb Ix - sb Iz, tilde Iy = Iy, tilde Iz = cb Iz + sb Ix
  const Vec3 h0{seq.rabi * cp, seq.rabi * sp, seq.omega_larmor - omega};
  const Vec3 h1{det1 * sb + rabi_t * cp * cb, rabi_t * sp, det1 * cb - rabi_t * cp * sb};
  return {spin_component(h0), spin_component(h1)};
}

/// Frame operator R_b(t) = exp(i omega t n_b . I), n_0 = z, n_1 = tilted axis.
inline CMatrix frame_operator(Branch b, double beta, double omega, double t) {
  const Vec3 axis = b == Branch::zero ? kZAxis : tilted_axis(beta);
  return rot(axis, std::remainder(-omega * t, 2.0 * kTwoPi));
}

struct Segment {
  int k = 1;  // RF pulse index 1..N+1
  double start = 0.0;
  double length = 0.0;
  Branch branch = Branch::zero;
};

/// The N+1 constant-Hamiltonian segments of a sequence starting in `initial`.
inline std::vector<Segment> ddrf_segments(const DdrfSequence& seq, Branch initial) {
  seq.validate();
  const int n = seq.n_pulses;
  std::vector<Segment> out;
  out.reserve(n + 1);
  for (int k = 1; k <= n + 1; ++k) {
    Segment s;
    s.k = k;
    s.start = k == 1 ? 0.0 : (2 * k - 3) * seq.tau;
    s.length = (k == 1 || k == n + 1) ? seq.tau : 2.0 * seq.tau;
    s.branch = k % 2 == 1 ? initial : other(initial);
    out.push_back(s);
  }
  return out;
}

namespace detail {

inline CMatrix branch_propagator(const NuclearSpinParams& spin, const DdrfSequence& seq,
                                 double target_omega1, Branch initial, int subdivisions) {
  if (subdivisions < 1) throw std::invalid_argument("subdivisions must be >= 1");
  const double omega = seq.drive_freq;
  CMatrix m = CMatrix::identity(2);
  const auto segments = ddrf_segments(seq, initial);
  for (std::size_t i = 0; i < segments.size(); ++i) {
    const Segment& s = segments[i];
    const auto h = rwa_hamiltonians(spin, seq, rf_phase(s.k, seq, target_omega1));
    const CMatrix& hb = s.branch == Branch::zero ? h.h0 : h.h1;
    const CMatrix step = expm_herm2(hb, s.length / subdivisions);
    for (int j = 0; j < subdivisions; ++j) m = step * m;
    if (i + 1 < segments.size()) {
      const double t = s.start + s.length;
      const Branch next = segments[i + 1].branch;
      m = frame_operator(next, spin.beta, omega, t) *
          frame_operator(s.branch, spin.beta, omega, t).dagger() * m;
    }
  }
  return frame_operator(initial, spin.beta, omega, seq.duration()).dagger() * m;
}

}  // namespace detail

/// V_0 and V_1 of `spin` under a sequence whose RF phases follow the spin with
/// precession frequency `target_omega1`. `subdivisions` splits every segment
/// into equal sub-steps (identical result; used to check frame bookkeeping).
inline ConditionalEvolution ddrf_evolution(const NuclearSpinParams& spin, const DdrfSequence& seq,
                                           double target_omega1, int subdivisions = 1) {
  ConditionalEvolution ev;
  ev.v0 = detail::branch_propagator(spin, seq, target_omega1, Branch::zero, subdivisions);
  ev.v1 = detail::branch_propagator(spin, seq, target_omega1, Branch::one, subdivisions);
  ev.spin_label = spin.label;
  ev.sequence = seq;
  return ev;
}

/// Angle of the unconditional z precession removed by the phase correction,
/// N omega1 tau reduced to (-pi, pi].
inline double phase_correction_angle(double omega1, const DdrfSequence& seq) {
  return detail::wrap_pi(seq.n_pulses * omega1 * seq.tau);
}

/// Undo the spin's own unconditional precession: both branches are
/// left-multiplied by exp(+i N omega1 tau Iz).
inline ConditionalEvolution apply_phase_correction(ConditionalEvolution ev, double omega1,
                                                   const DdrfSequence& seq) {
  if (ev.phase_corrected) {
    throw std::logic_error("phase correction already applied to '" + ev.spin_label + "'");
  }
  const CMatrix corr = rot(kZAxis, -phase_correction_angle(omega1, seq));
  ev.v0 = corr * ev.v0;
  ev.v1 = corr * ev.v1;
  ev.phase_corrected = true;
  return ev;
}

/// ddrf_evolution followed by the spin's own phase correction.
inline ConditionalEvolution corrected_evolution(const NuclearSpinParams& spin,
                                                const DdrfSequence& seq, double target_omega1) {
  return apply_phase_correction(ddrf_evolution(spin, seq, target_omega1),
                                derive_omega1(spin, seq.omega_larmor), seq);
}

struct BlochSample {
  double t = 0.0;
  Vec3 r{};
  Branch frame = Branch::zero;
};

struct BlochTrajectory {
  std::vector<BlochSample> samples;
  Branch electron_branch = Branch::zero;
  State2 initial{};
};

inline constexpr int kDefaultSamplesPerSegment = 32;

inline constexpr State2 kUp{cplx{1.0, 0.0}, cplx{0.0, 0.0}};
inline constexpr State2 kDown{cplx{0.0, 0.0}, cplx{1.0, 0.0}};
/// (|down> + |up>)/sqrt(2)
inline const State2 kPlusN{cplx{1.0 / std::sqrt(2.0), 0.0}, cplx{1.0 / std::sqrt(2.0), 0.0}};

/// Bloch-vector samples of the nuclear spin during the sequence, each in the
/// rotating frame of the segment it belongs to. Every segment contributes
/// `samples_per_segment` points starting at its left edge; one closing sample
/// at t = 2 N tau ends the trajectory.
inline BlochTrajectory bloch_trajectory(const NuclearSpinParams& spin, const DdrfSequence& seq,
                                        double target_omega1, const State2& initial,
                                        Branch electron_branch,
                                        int samples_per_segment = kDefaultSamplesPerSegment) {
  if (samples_per_segment < 1) throw std::invalid_argument("samples_per_segment must be >= 1");
  const double nrm = std::norm(initial[0]) + std::norm(initial[1]);
  if (std::abs(nrm - 1.0) > 1e-10) throw std::invalid_argument("initial state is not normalized");

  BlochTrajectory traj;
  traj.electron_branch = electron_branch;
  traj.initial = initial;
  const double omega = seq.drive_freq;
  const auto segments = ddrf_segments(seq, electron_branch);
  traj.samples.reserve(segments.size() * samples_per_segment + 1);

  State2 psi = initial;  // frames coincide with the lab frame at t = 0
  for (std::size_t i = 0; i < segments.size(); ++i) {
    const Segment& s = segments[i];
    const auto h = rwa_hamiltonians(spin, seq, rf_phase(s.k, seq, target_omega1));
    const CMatrix& hb = s.branch == Branch::zero ? h.h0 : h.h1;
    const double dt = s.length / samples_per_segment;
    const CMatrix step = expm_herm2(hb, dt);
    for (int j = 0; j < samples_per_segment; ++j) {
      traj.samples.push_back({s.start + j * dt, bloch_vector(psi), s.branch});
      psi = apply_to(step, psi);
    }
    const double t = s.start + s.length;
    if (i + 1 < segments.size()) {
      const Branch next = segments[i + 1].branch;
      psi = apply_to(frame_operator(next, spin.beta, omega, t) *
                      frame_operator(s.branch, spin.beta, omega, t).dagger(),
                  psi);
    } else {
      traj.samples.push_back({t, bloch_vector(psi), s.branch});
    }
  }
  return traj;
}

}  // namespace ddrf

#endif  // DDRF_EVOLUTION_HPP
