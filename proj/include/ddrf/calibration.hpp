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

#ifndef DDRF_CALIBRATION_HPP
#define DDRF_CALIBRATION_HPP

// Rabi-factor calibration: the pi/2 condition N Omega tau = pi/2 is scaled by
// a factor in [0.8, 1] chosen to maximize the single-target CROT fidelity.

#include <cmath>
#include <stdexcept>

#include "ddrf/evolution.hpp"
#include "ddrf/fidelity.hpp"
#include "ddrf/system.hpp"

namespace ddrf {

struct CalibrationResult {
  double rabi_factor = 1.0;
  double achieved_fidelity = 0.0;
  double achieved_infidelity = 1.0;
  int iterations = 0;
  bool converged = false;
};

struct CalibrationOptions {
  double lower = 0.8;
  double upper = 1.0;
  int coarse_points = 21;
  double bracket = 1e-7;
};

/// d = 4 infidelity of the target-only gate at the given Rabi factor.
inline double target_infidelity(const NuclearSpinParams& spin, DdrfSequence seq, double factor) {
  seq.rabi_factor = factor;
  seq.rabi = DdrfSequence::rabi_for(seq.n_pulses, seq.tau, factor);
  const double w1 = derive_omega1(spin, seq.omega_larmor);
  const auto ev = corrected_evolution(spin, seq, w1);
  return gate_fidelity(ideal_crot(0), assemble_gate({ev}).matrix).infidelity;
}

inline CalibrationResult calibrate_rabi(const NuclearSpinParams& spin, const DdrfSequence& seq,
                                        const CalibrationOptions& opt = {}) {
  if (spin.role != SpinRole::target) {
    throw std::invalid_argument("calibrate_rabi: spin '" + spin.label + "' is not a target");
  }
  const double w1 = derive_omega1(spin, seq.omega_larmor);
  if (std::abs(seq.drive_freq - w1) > 1e-9 * w1) {
    throw std::invalid_argument("calibrate_rabi: sequence is not tuned to the target spin");
  }
  if (opt.coarse_points < 3 || !(opt.lower < opt.upper)) {
    throw std::invalid_argument("calibrate_rabi: bad search options");
  }
  auto objective = [&](double x) { return target_infidelity(spin, seq, x); };

  CalibrationResult res;
  const double step = (opt.upper - opt.lower) / (opt.coarse_points - 1);
  int best = 0;
  double best_val = INFINITY;
  for (int i = 0; i < opt.coarse_points; ++i) {
    const double v = objective(opt.lower + i * step);
    ++res.iterations;
    if (v < best_val) {
      best_val = v;
      best = i;
    }
  }

  // Golden-section search on the bracket around the best grid point.
  double a = opt.lower + std::max(best - 1, 0) * step;
  double b = opt.lower + std::min(best + 1, opt.coarse_points - 1) * step;
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double c = b - inv_phi * (b - a);
  double d = a + inv_phi * (b - a);
  double fc = objective(c);
  double fd = objective(d);
  res.iterations += 2;
  while (b - a > opt.bracket) {
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - inv_phi * (b - a);
      fc = objective(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + inv_phi * (b - a);
      fd = objective(d);
    }
    ++res.iterations;
  }
  double x = 0.5 * (a + b);
  double v = objective(x);
  ++res.iterations;
  if (best_val < v) {  // coarse point beats the refined one (flat objective)
    x = opt.lower + best * step;
    v = best_val;
  }
  const double edge_tol = 10.0 * opt.bracket;
  res.rabi_factor = x;
  res.achieved_infidelity = v;
  res.achieved_fidelity = 1.0 - v;
  res.converged = x - opt.lower > edge_tol && opt.upper - x > edge_tol;
  return res;
}

}  // namespace ddrf

#endif  // DDRF_CALIBRATION_HPP
