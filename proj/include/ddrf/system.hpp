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

#ifndef DDRF_SYSTEM_HPP
#define DDRF_SYSTEM_HPP

// Spin, sequence and node parameters. Angular frequencies are rad/s, times
// are seconds, angles are radians.

#include <algorithm>
#include <cmath>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "ddrf/spinalg.hpp"

namespace ddrf {

/// 2 pi * f for f in kHz.
constexpr double khz_to_rad(double khz) { return kTwoPi * 1e3 * khz; }
constexpr double rad_to_khz(double rad_per_s) { return rad_per_s / (kTwoPi * 1e3); }

inline constexpr double kDefaultLarmorKhz = 432.0;
inline constexpr int kDefaultPulses = 48;
inline constexpr double kDefaultTauOverTauL = 8.0;
inline constexpr double kDefaultFee = 0.99;

enum class SpinRole { target, unaddressed, bath };

inline const char* to_string(SpinRole r) {
  switch (r) {
    case SpinRole::target:
      return "target";
    case SpinRole::unaddressed:
      return "unaddressed";
    case SpinRole::bath:
      return "bath";
  }
  return "?";
}

/// A 13C spin specified by its parallel hyperfine coupling and the tilt of its
/// quantization axis when the electron is in |1>.
struct NuclearSpinParams {
  double a_par = 0.0;  // rad/s
  double beta = 0.0;   // [0, pi/2)
  SpinRole role = SpinRole::target;
  std::string label;

  /// Transverse coupling implied by beta: (omegaL - aPar) tan(beta).
  double a_perp(double omega_larmor) const { return (omega_larmor - a_par) * std::tan(beta); }
};

/// omega1 = (omegaL - aPar) / cos(beta) = sqrt(aPerp^2 + (omegaL - aPar)^2)
inline double derive_omega1(const NuclearSpinParams& spin, double omega_larmor) {
  if (!(omega_larmor > spin.a_par)) {
    throw std::invalid_argument("spin '" + spin.label + "': Larmor frequency must exceed A_par");
  }
  if (!(spin.beta >= 0.0 && spin.beta < 0.5 * kPi)) {
    throw std::invalid_argument("spin '" + spin.label + "': beta must lie in [0, pi/2)");
  }
  return (omega_larmor - spin.a_par) / std::cos(spin.beta);
}

/// Quantization axis of the spin while the electron is in |1>.
inline Vec3 tilted_axis(double beta) { return {std::sin(beta), 0.0, std::cos(beta)}; }

struct DdrfSequence {
  int n_pulses = kDefaultPulses;
  double tau = 0.0;            // half interpulse delay, s
  double omega_larmor = 0.0;   // rad/s
  double drive_freq = 0.0;     // rad/s
  double rabi = 0.0;           // rad/s
  double varphi = 0.0;         // phase offset, rad
  double rabi_factor = 1.0;    // [0, 1]; 0 switches the drive off

  double larmor_period() const { return kTwoPi / omega_larmor; }
  double duration() const { return 2.0 * n_pulses * tau; }

  /// True when tau is an integer number of Larmor periods.
  bool resonant_tau(double tol = 1e-9) const {
    const double ratio = tau / larmor_period();
    return std::abs(ratio - std::round(ratio)) <= tol * std::max(1.0, ratio);
  }

  /// Rabi frequency for a pi/2 rotation over the sequence, scaled by the factor.
  static double rabi_for(int n_pulses, double tau, double factor) {
    return factor * kPi / (2.0 * n_pulses * tau);
  }

  void validate() const {
    if (n_pulses <= 0 || n_pulses % 2 != 0) {
      throw std::invalid_argument("n_pulses must be a positive even integer");
    }
    if (!(tau > 0.0)) throw std::invalid_argument("tau must be positive");
    if (!(omega_larmor > 0.0)) throw std::invalid_argument("Larmor frequency must be positive");
    if (!(rabi_factor >= 0.0 && rabi_factor <= 1.0)) {
      throw std::invalid_argument("rabi_factor must lie in [0, 1]");
    }
  }
};

/// Sequence tuned to a target spin: drive at its omega1, Rabi frequency from
/// the pi/2 condition times `rabi_factor`.
inline DdrfSequence make_sequence(const NuclearSpinParams& target, double omega_larmor, int n_pulses,
                                  double tau_over_tau_l, double rabi_factor = 1.0,
                                  double varphi = 0.0) {
  DdrfSequence seq;
  seq.n_pulses = n_pulses;
  seq.omega_larmor = omega_larmor;
  seq.tau = tau_over_tau_l * kTwoPi / omega_larmor;
  seq.drive_freq = derive_omega1(target, omega_larmor);
  seq.rabi_factor = rabi_factor;
  seq.rabi = DdrfSequence::rabi_for(n_pulses, seq.tau, rabi_factor);
  seq.varphi = varphi;
  seq.validate();
  return seq;
}

/// RF phase of pulse k = 1..N+1: (k-1) phi_tau + varphi (+ pi for odd k),
/// with phi_tau = (omegaL - omega1) tau; reduced to [0, 2 pi).
inline double rf_phase(int k, const DdrfSequence& seq, double target_omega1) {
  if (k < 1 || k > seq.n_pulses + 1) throw std::out_of_range("rf_phase: pulse index out of range");
  const double phi_tau = (seq.omega_larmor - target_omega1) * seq.tau;
  double phase = (k - 1) * phi_tau + seq.varphi + (k % 2 == 1 ? kPi : 0.0);
  phase = std::fmod(phase, kTwoPi);
  if (phase < 0.0) phase += kTwoPi;
  return phase;
}

/// A_par at which a spin with tilt beta_bar precesses at target_omega1 while
/// the electron is in |1>.
inline double resonant_apar(double beta_bar, double target_omega1, double omega_larmor) {
  if (!(target_omega1 * std::cos(beta_bar) < omega_larmor)) {
    throw std::invalid_argument("no resonant A_par: omega1 cos(beta_bar) must be below omegaL");
  }
  return omega_larmor - target_omega1 * std::cos(beta_bar);
}

/// Electron/15N parameters of the CZ-based entangling scheme.
struct NemotoParams {
  double d_zfs = 0.0;    // rad/s
  double gamma_e = 0.0;  // rad/(s T)
  double gamma_n = 0.0;  // rad/(s T)
  double b_field = 0.0;  // T
  double a_par_n = 0.0;  // rad/s
  double a_perp_n = 0.0; // rad/s

  double gamma_split() const { return d_zfs + gamma_e * b_field - gamma_n * b_field; }
};

struct EffectiveCoupling {
  double a_net = 0.0;  // rad/s
  double t_cz = 0.0;   // s
};

/// A_net = A_par - A_perp^2 / (2 Gamma) and the half-period wait pi/|A_net|.
inline EffectiveCoupling nemoto_anet(const NemotoParams& p) {
  const double gamma = p.gamma_split();
  if (!(gamma > 0.0)) throw std::invalid_argument("Gamma = D + (gamma_e - gamma_n) B must be positive");
  const double a_net = p.a_par_n - p.a_perp_n * p.a_perp_n / (2.0 * gamma);
  if (a_net == 0.0) throw std::domain_error("A_net vanishes; no CZ wait time exists");
  return {a_net, kPi / std::abs(a_net)};
}

enum class ElectronQubit { ms0_msm1 };

struct NodeConfig {
  ElectronQubit electron = ElectronQubit::ms0_msm1;
  std::vector<NuclearSpinParams> spins;
  int n_pulses = kDefaultPulses;
  double tau_over_tau_l = kDefaultTauOverTauL;
  double omega_larmor = khz_to_rad(kDefaultLarmorKhz);
  double varphi = 0.0;
  /// Unset means "calibrate on use".
  std::optional<double> rabi_factor;
  double f_ee = kDefaultFee;

  const NuclearSpinParams& target() const {
    for (const auto& s : spins) {
      if (s.role == SpinRole::target) return s;
    }
    throw std::invalid_argument("node has no target spin");
  }

  const NuclearSpinParams& spin(const std::string& label) const {
    for (const auto& s : spins) {
      if (s.label == label) return s;
    }
    throw std::invalid_argument("unknown spin label '" + label + "'");
  }

  /// Target first, then unaddressed spins in file order.
  std::vector<NuclearSpinParams> register_spins() const {
    std::vector<NuclearSpinParams> out{target()};
    for (const auto& s : spins) {
      if (s.role == SpinRole::unaddressed) out.push_back(s);
    }
    return out;
  }

  std::vector<NuclearSpinParams> bath_spins() const {
    std::vector<NuclearSpinParams> out;
    for (const auto& s : spins) {
      if (s.role == SpinRole::bath) out.push_back(s);
    }
    return out;
  }

  /// Sequence addressing `tgt` with this node's timing.
  DdrfSequence sequence_for(const NuclearSpinParams& tgt, double factor) const {
    return make_sequence(tgt, omega_larmor, n_pulses, tau_over_tau_l, factor, varphi);
  }
};

}  // namespace ddrf

#endif  // DDRF_SYSTEM_HPP
