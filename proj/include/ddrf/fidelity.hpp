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

#ifndef DDRF_FIDELITY_HPP
#define DDRF_FIDELITY_HPP

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "ddrf/evolution.hpp"
#include "ddrf/spinalg.hpp"
#include "ddrf/system.hpp"

namespace ddrf {

enum class FidelityModel { exact_gate, kraus_bath, sinc_approx, composed };

inline const char* to_string(FidelityModel m) {
  switch (m) {
    case FidelityModel::exact_gate:
      return "exactGate";
    case FidelityModel::kraus_bath:
      return "krausBath";
    case FidelityModel::sinc_approx:
      return "sincApprox";
    case FidelityModel::composed:
      return "composed";
  }
  return "?";
}

struct FidelityReport {
  double fidelity = 1.0;
  double infidelity = 0.0;
  FidelityModel model = FidelityModel::exact_gate;
  std::string inputs;  // short description of what was evaluated

  static FidelityReport from_infidelity(double infid, FidelityModel model, std::string inputs) {
    if (infid < 0.0 && infid > -1e-15) infid = 0.0;
    return {1.0 - infid, infid, model, std::move(inputs)};
  }
  static FidelityReport from_fidelity(double f, FidelityModel model, std::string inputs) {
    return {f, 1.0 - f, model, std::move(inputs)};
  }
};

/// Average gate fidelity (d + |Tr[V_ideal^dagger V_actual]|^2) / (d (d + 1)).
/// The infidelity is evaluated as (d^2 - |Tr|^2) / (d (d + 1)) so that values
/// near 1e-7 keep their digits.
inline FidelityReport gate_fidelity(const CMatrix& v_ideal, const CMatrix& v_actual) {
  if (!v_ideal.is_square() || v_ideal.rows() != v_actual.rows() ||
      v_ideal.cols() != v_actual.cols()) {
    throw std::invalid_argument("gate_fidelity: dimension mismatch " + v_ideal.shape() + " vs " +
                                v_actual.shape());
  }
  if (!is_unitary(v_ideal, 1e-8) || !is_unitary(v_actual, 1e-8)) {
    throw std::invalid_argument("gate_fidelity: inputs must be unitary");
  }
  const double d = static_cast<double>(v_ideal.rows());
  cplx tr = 0.0;
  for (std::size_t i = 0; i < v_ideal.rows(); ++i) {
    for (std::size_t k = 0; k < v_ideal.rows(); ++k) tr += std::conj(v_ideal(k, i)) * v_actual(k, i);
  }
  const double infid = (d * d - std::norm(tr)) / (d * (d + 1.0));
  return FidelityReport::from_infidelity(infid, FidelityModel::exact_gate,
                                         "d=" + std::to_string(v_ideal.rows()));
}

inline CMatrix electron_projector(int j) {
  CMatrix p(2, 2);
  p(j, j) = 1.0;
  return p;
}

/// |0><0| (x) Rx(pi/2) (x) 1^spectators + |1><1| (x) Rx(-pi/2) (x) 1^spectators
inline CMatrix ideal_crot(int spectators) {
  if (spectators < 0) throw std::invalid_argument("ideal_crot: negative spectator count");
  const CMatrix id = CMatrix::identity(std::size_t{1} << spectators);
  return kron(electron_projector(0), rot(kXAxis, 0.5 * kPi), id) +
         kron(electron_projector(1), rot(kXAxis, -0.5 * kPi), id);
}

struct MultiSpinGate {
  CMatrix matrix;
  std::vector<std::string> spin_order;

  std::size_t dimension() const { return matrix.rows(); }
};

/// sum_j |j><j| (x) V_j^(1) (x) ... (x) V_j^(K) in list order.
inline MultiSpinGate assemble_gate(const std::vector<ConditionalEvolution>& evs) {
  if (evs.empty()) throw std::invalid_argument("assemble_gate: no evolutions");
  const bool corrected = evs.front().phase_corrected;
  for (const auto& ev : evs) {
    if (ev.phase_corrected != corrected) {
      throw std::invalid_argument("assemble_gate: mixed phase-correction states");
    }
    const auto& a = ev.sequence;
    const auto& b = evs.front().sequence;
    if (a.n_pulses != b.n_pulses || a.tau != b.tau || a.drive_freq != b.drive_freq ||
        a.rabi != b.rabi || a.varphi != b.varphi || a.omega_larmor != b.omega_larmor) {
      throw std::invalid_argument("assemble_gate: evolutions come from different sequences");
    }
  }
  MultiSpinGate gate;
  CMatrix block0 = electron_projector(0);
  CMatrix block1 = electron_projector(1);
  for (const auto& ev : evs) {
    block0 = kron(block0, ev.v0);
    block1 = kron(block1, ev.v1);
    gate.spin_order.push_back(ev.spin_label);
  }
  gate.matrix = block0 + block1;
  return gate;
}

/// Final states Psi_j = V_j |up> of a bath spin, as overlaps with |up>, |down>.
struct BathSpinOverlaps {
  cplx a0;  // <up|Psi_0>
  cplx b0;  // <down|Psi_0>
  cplx a1;
  cplx b1;

  cplx a(int j) const { return j == 0 ? a0 : a1; }
  cplx b(int j) const { return j == 0 ? b0 : b1; }
  /// <Psi_1|Psi_0>
  cplx overlap() const { return std::conj(a1) * a0 + std::conj(b1) * b0; }

  void validate(double tol = 1e-10) const {
    for (int j = 0; j < 2; ++j) {
      if (std::abs(std::norm(a(j)) + std::norm(b(j)) - 1.0) > tol) {
        throw std::invalid_argument("bath overlaps are not normalized");
      }
    }
  }

  static BathSpinOverlaps from(const ConditionalEvolution& ev) {
    const State2 psi0 = apply_to(ev.v0, kUp);
    const State2 psi1 = apply_to(ev.v1, kUp);
    return {psi0[0], psi0[1], psi1[0], psi1[1]};
  }
};

inline constexpr int kMaxEnumeratedBaths = 12;

namespace detail {

inline void check_bath_inputs(int k, const std::vector<BathSpinOverlaps>& baths) {
  if (k < 1) throw std::invalid_argument("bath_fidelity: K must be >= 1");
  for (const auto& b : baths) b.validate();
}

inline double bath_prefactor(int k) { return 1.0 / (std::ldexp(1.0, k + 1) + 1.0); }

/// c_j^(i) p_j^(i) for environment basis state i; bit l of i set means bath
/// spin l is projected on |down>.
inline cplx kraus_coefficient(const std::vector<BathSpinOverlaps>& baths, std::uint64_t i, int j) {
  cplx c = 1.0;
  for (std::size_t l = 0; l < baths.size(); ++l) {
    c *= ((i >> l) & 1u) ? baths[l].b(j) : baths[l].a(j);
  }
  return c;
}

}  // namespace detail

/// Target-subspace fidelity from sum_i |sum_j c_j^(i) p_j^(i)|^2 using the
/// product-form identity 2 + 2 Re prod_l <Psi_1|Psi_0>.
inline FidelityReport bath_fidelity_product(int k, const std::vector<BathSpinOverlaps>& baths) {
  detail::check_bath_inputs(k, baths);
  cplx prod = 1.0;
  for (const auto& b : baths) prod *= b.overlap();
  // 1 - F = 2^(K-1) (2 - 2 Re prod) / (2^(K+1) + 1)
  const double infid = detail::bath_prefactor(k) * std::ldexp(1.0, k) * (1.0 - prod.real());
  return FidelityReport::from_infidelity(
      infid, FidelityModel::kraus_bath,
      "K=" + std::to_string(k) + " baths=" + std::to_string(baths.size()) + " product");
}

/// Target-subspace fidelity under the partial-trace channel of the bath spins,
/// enumerating all 2^(L-K) environment basis states. Falls back to the
/// product form when L-K exceeds kMaxEnumeratedBaths.
inline FidelityReport bath_fidelity(int k, const std::vector<BathSpinOverlaps>& baths) {
  detail::check_bath_inputs(k, baths);
  if (baths.size() > static_cast<std::size_t>(kMaxEnumeratedBaths)) {
    return bath_fidelity_product(k, baths);
  }
  const std::uint64_t n_states = std::uint64_t{1} << baths.size();
  double sum = 0.0;
  for (std::uint64_t i = 0; i < n_states; ++i) {
    sum += std::norm(detail::kraus_coefficient(baths, i, 0) + detail::kraus_coefficient(baths, i, 1));
  }
  const double f = detail::bath_prefactor(k) * (1.0 + std::ldexp(1.0, k - 1) * sum);
  return FidelityReport::from_fidelity(
      f, FidelityModel::kraus_bath,
      "K=" + std::to_string(k) + " baths=" + std::to_string(baths.size()) + " enumerated");
}

/// Kraus operators E_i = sum_j c_j^(i) p_j^(i) |j><j| (x) T_j of the bath
/// channel, where T_j are the (ideal) target-subspace blocks.
inline std::vector<CMatrix> kraus_operators(const CMatrix& target_block0, const CMatrix& target_block1,
                                            const std::vector<BathSpinOverlaps>& baths) {
  if (baths.size() > static_cast<std::size_t>(kMaxEnumeratedBaths)) {
    throw std::invalid_argument("kraus_operators: too many bath spins to enumerate");
  }
  const CMatrix u0 = kron(electron_projector(0), target_block0);
  const CMatrix u1 = kron(electron_projector(1), target_block1);
  const std::uint64_t n_states = std::uint64_t{1} << baths.size();
  std::vector<CMatrix> out;
  out.reserve(n_states);
  for (std::uint64_t i = 0; i < n_states; ++i) {
    out.push_back(detail::kraus_coefficient(baths, i, 0) * u0 +
                  detail::kraus_coefficient(baths, i, 1) * u1);
  }
  return out;
}

/// Operator-sum gate fidelity
/// (1 / (d (d+1))) sum_i tr[(U^dagger E_i)^dagger U^dagger E_i] + |tr[U^dagger E_i]|^2.
inline double channel_fidelity(const CMatrix& u_ideal, const std::vector<CMatrix>& kraus) {
  const double d = static_cast<double>(u_ideal.rows());
  const CMatrix ud = u_ideal.dagger();
  double acc = 0.0;
  for (const auto& e : kraus) {
    const CMatrix m = ud * e;
    acc += (m.dagger() * m).trace().real() + std::norm(m.trace());
  }
  return acc / (d * (d + 1.0));
}

/// Overlaps of a bath spin under a sequence targeted at another spin.
inline BathSpinOverlaps bath_overlaps_from_sequence(const NuclearSpinParams& bath,
                                                    const DdrfSequence& seq,
                                                    double target_omega1) {
  if (bath.role != SpinRole::bath) {
    throw std::invalid_argument("bath_overlaps_from_sequence: spin '" + bath.label +
                                "' is not a bath spin");
  }
  return BathSpinOverlaps::from(corrected_evolution(bath, seq, target_omega1));
}

/// sinc^2(N (aParBar - aParRes) tau / 2) with sinc(x) = sin(x)/x.
inline double sinc_infidelity(double a_par_bar, double a_par_res, const DdrfSequence& seq) {
  const double x = 0.5 * seq.n_pulses * (a_par_bar - a_par_res) * seq.tau;
  if (std::abs(x) < 1e-8) return 1.0 - x * x / 3.0;
  const double s = std::sin(x) / x;
  return s * s;
}

/// Half width of the central resonance peak, 2 pi / (N tau), in rad/s.
inline double central_peak_halfwidth(const DdrfSequence& seq) {
  return kTwoPi / (seq.n_pulses * seq.tau);
}

struct UnaddressedError {
  double overlap_error = 0.0;          // 1 - |<Psi_0|Psi_1>|^2
  double five_times_infidelity = 0.0;  // 5 (1 - F_bath), single bath spin, K = 1
};

inline UnaddressedError unaddressed_error(const ConditionalEvolution& ev) {
  const auto ov = BathSpinOverlaps::from(ev);
  const cplx s = ov.overlap();
  UnaddressedError out;
  out.overlap_error = 1.0 - std::norm(s);
  out.five_times_infidelity = 5.0 * bath_fidelity(1, {ov}).infidelity;
  return out;
}

/// F = F_ee^p prod F_enn,a prod F_enn,b for uncorrelated errors.
inline FidelityReport compose_total(double f_ee, const std::vector<double>& f_enn_a,
                                    const std::vector<double>& f_enn_b, int p) {
  if (p < 1) throw std::invalid_argument("compose_total: p must be >= 1");
  if (f_enn_a.size() != static_cast<std::size_t>(p) || f_enn_b.size() != static_cast<std::size_t>(p)) {
    throw std::invalid_argument("compose_total: need p elementary fidelities per node");
  }
  auto check = [](double f) {
    if (!(f >= 0.0 && f <= 1.0)) throw std::invalid_argument("compose_total: factor outside [0, 1]");
  };
  check(f_ee);
  double f = std::pow(f_ee, p);
  for (double x : f_enn_a) {
    check(x);
    f *= x;
  }
  for (double x : f_enn_b) {
    check(x);
    f *= x;
  }
  return FidelityReport::from_fidelity(f, FidelityModel::composed, "p=" + std::to_string(p));
}

struct FactorizationResult {
  double f_composed = 1.0;   // d = 16 fidelity of both rounds
  double f_first = 1.0;      // d = 8 elementary fidelity, round 1
  double f_second = 1.0;     // d = 8 elementary fidelity, round 2
  double f_product = 1.0;
  double gap = 0.0;          // |f_composed - f_product|
  /// How the electron is handled between rounds.
  std::string electron_reset = "ideal: fresh electron qubit per round";
};

namespace detail {

/// sum_j |j><j| (x) A_j on a single electron placed in slot `slot` of a
/// two-electron register, with identity on the other electron.
inline CMatrix two_electron_round(int slot, const CMatrix& nuc0, const CMatrix& nuc1) {
  const CMatrix id = CMatrix::identity(2);
  if (slot == 0) {
    return kron(electron_projector(0), id, nuc0) + kron(electron_projector(1), id, nuc1);
  }
  return kron(id, electron_projector(0), nuc0) + kron(id, electron_projector(1), nuc1);
}

}  // namespace detail

/// Two sequential elementary processes on a node with register spins (n1, n2):
/// round one targets n1 with `seq_first`, round two targets n2 with
/// `seq_second`. Each round uses its own electron, which models an ideal
/// electron measurement and reset in between. The composed d = 16 fidelity
/// (electrons e1, e2, then n1, n2) is compared with the product of the two
/// d = 8 elementary fidelities.
inline FactorizationResult sequential_factorization_check(const NuclearSpinParams& n1,
                                                          const NuclearSpinParams& n2,
                                                          const DdrfSequence& seq_first,
                                                          const DdrfSequence& seq_second) {
  const double w1 = derive_omega1(n1, seq_first.omega_larmor);
  const double w2 = derive_omega1(n2, seq_second.omega_larmor);
  const auto r1_n1 = corrected_evolution(n1, seq_first, w1);
  const auto r1_n2 = corrected_evolution(n2, seq_first, w1);
  const auto r2_n2 = corrected_evolution(n2, seq_second, w2);
  const auto r2_n1 = corrected_evolution(n1, seq_second, w2);

  FactorizationResult out;
  out.f_first = gate_fidelity(ideal_crot(1), assemble_gate({r1_n1, r1_n2}).matrix).fidelity;
  out.f_second = gate_fidelity(ideal_crot(1), assemble_gate({r2_n2, r2_n1}).matrix).fidelity;
  out.f_product = out.f_first * out.f_second;

  const CMatrix id = CMatrix::identity(2);
  const CMatrix rx_p = rot(kXAxis, 0.5 * kPi);
  const CMatrix rx_m = rot(kXAxis, -0.5 * kPi);
  const CMatrix actual = detail::two_electron_round(1, kron(r2_n1.v0, r2_n2.v0), kron(r2_n1.v1, r2_n2.v1)) *
                         detail::two_electron_round(0, kron(r1_n1.v0, r1_n2.v0), kron(r1_n1.v1, r1_n2.v1));
  const CMatrix ideal = detail::two_electron_round(1, kron(id, rx_p), kron(id, rx_m)) *
                        detail::two_electron_round(0, kron(rx_p, id), kron(rx_m, id));
  out.f_composed = gate_fidelity(ideal, actual).fidelity;
  out.gap = std::abs(out.f_composed - out.f_product);
  return out;
}

}  // namespace ddrf

#endif  // DDRF_FIDELITY_HPP
