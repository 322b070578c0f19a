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

#ifndef DDRF_COMMANDS_HPP
#define DDRF_COMMANDS_HPP

// Batch commands behind the `ddrf` tool. Each command takes a loaded config
// and writes CSV or JSON to a stream; the tool only handles flags and files.
// Needs OpenSSL (libcrypto) for the config digest.

#include <openssl/evp.h>

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <exception>
#include <mutex>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include "ddrf/calibration.hpp"
#include "ddrf/config.hpp"
#include "ddrf/evolution.hpp"
#include "ddrf/fidelity.hpp"
#include "ddrf/oracle.hpp"
#include "ddrf/system.hpp"
#include "json.hpp"

namespace ddrf {

inline constexpr const char* kToolVersion = "0.1.0";

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitNumeric = 3;

/// Oracle distance above which `validate` fails.
inline constexpr double kOracleDistanceLimit = 1e-3;

class CommandError : public std::runtime_error {
 public:
  CommandError(int exit_code, const std::string& what) : std::runtime_error(what), code_(exit_code) {}
  int exit_code() const { return code_; }

 private:
  int code_;
};

/// Shortest round-trip decimal form.
inline std::string format_number(double x) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, x);
  if (ec != std::errc{}) throw std::runtime_error("format_number failed");
  return std::string(buf, ptr);
}

inline std::string sha256_hex(std::string_view data) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), md, &len, EVP_sha256(), nullptr) != 1) {
    throw std::runtime_error("sha256 failed");
  }
  static const char* hex = "0123456789abcdef";
  std::string out;
  out.reserve(2 * len);
  for (unsigned int i = 0; i < len; ++i) {
    out += hex[md[i] >> 4];
    out += hex[md[i] & 0xf];
  }
  return out;
}

struct RunContext {
  NodeConfig config;
  std::string digest;  // sha256 of the config file bytes
  std::string source = "config";
  std::vector<ConfigWarning> warnings;
  int jobs = 1;
};

inline RunContext make_context(std::string_view text, const std::string& source, int jobs = 1) {
  RunContext ctx;
  ctx.config = load_config(text, source);
  ctx.warnings = validate(ctx.config, source);
  ctx.digest = sha256_hex(text);
  ctx.source = source;
  ctx.jobs = std::max(1, jobs);
  return ctx;
}

/// Evaluates fn(i) for i in [0, count) on `jobs` threads. Results come back
/// in index order whatever order the workers finish in.
template <class T, class F>
std::vector<T> parallel_map(int count, int jobs, F fn) {
  std::vector<T> out(static_cast<std::size_t>(count));
  const int workers = std::max(1, std::min(jobs, count));
  std::atomic<int> next{0};
  std::exception_ptr failure;
  std::mutex failure_mu;
  auto work = [&] {
    for (int i = next++; i < count; i = next++) {
      try {
        out[static_cast<std::size_t>(i)] = fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(failure_mu);
        if (!failure) failure = std::current_exception();
        next = count;
      }
    }
  };
  if (workers == 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) pool.emplace_back(work);
    for (auto& t : pool) t.join();
  }
  if (failure) std::rethrow_exception(failure);
  return out;
}

/// The config's factor, or a fresh calibration against `target`.
inline double rabi_factor_for(const NodeConfig& cfg, const NuclearSpinParams& target) {
  if (cfg.rabi_factor) return *cfg.rabi_factor;
  return calibrate_rabi(target, cfg.sequence_for(target, 1.0)).rabi_factor;
}

inline nlohmann::ordered_json provenance(const RunContext& ctx, const std::string& command) {
  nlohmann::ordered_json j;
  j["command"] = command;
  j["digest"] = ctx.digest;
  j["version"] = kToolVersion;
  return j;
}

// ---------------------------------------------------------------- trajectory

inline State2 initial_state_named(const std::string& name) {
  if (name == "up") return kUp;
  if (name == "down") return kDown;
  if (name == "plus") return kPlusN;
  throw CommandError(kExitConfig, "unknown initial state '" + name + "' (up, down, plus)");
}

inline void write_trajectory_csv(std::ostream& out, const BlochTrajectory& traj) {
  out << "t_s,x,y,z,frame,branch\n";
  for (const auto& s : traj.samples) {
    const double n = norm3(s.r);
    if (!(std::abs(n - 1.0) <= 1e-9)) {
      throw CommandError(kExitNumeric, "Bloch sample off the unit sphere at t=" + format_number(s.t));
    }
    out << format_number(s.t) << ',' << format_number(s.r[0]) << ',' << format_number(s.r[1]) << ','
        << format_number(s.r[2]) << ",R" << index_of(s.frame) << ',' << index_of(traj.electron_branch)
        << '\n';
  }
}

inline nlohmann::ordered_json cmd_trajectory(const RunContext& ctx, const std::string& label, int branch,
                                             const std::string& initial, int samples_per_segment,
                                             std::ostream& csv) {
  if (branch != 0 && branch != 1) throw CommandError(kExitConfig, "branch must be 0 or 1");
  const NodeConfig& cfg = ctx.config;
  const NuclearSpinParams* spin = nullptr;
  for (const auto& s : cfg.spins) {
    if (s.label == label) spin = &s;
  }
  if (spin == nullptr) throw CommandError(kExitConfig, "unknown spin label '" + label + "'");
  const auto& target = cfg.target();
  const double factor = rabi_factor_for(cfg, target);
  const auto seq = cfg.sequence_for(target, factor);
  const auto traj = bloch_trajectory(*spin, seq, derive_omega1(target, cfg.omega_larmor),
                                     initial_state_named(initial), branch == 0 ? Branch::zero : Branch::one,
                                     samples_per_segment);
  write_trajectory_csv(csv, traj);
  auto j = provenance(ctx, "trajectory");
  j["spin"] = label;
  j["branch"] = branch;
  j["initial"] = initial;
  j["rabi_factor"] = factor;
  j["samples"] = traj.samples.size();
  return j;
}

// -------------------------------------------------------------------- sweeps

enum class SweepParam { beta, beta_bar, a_par_bar };

inline const char* to_string(SweepParam p) {
  switch (p) {
    case SweepParam::beta:
      return "beta";
    case SweepParam::beta_bar:
      return "betaBar";
    case SweepParam::a_par_bar:
      return "aParBar";
  }
  return "?";
}

inline SweepParam parse_sweep_param(const std::string& s) {
  if (s == "beta") return SweepParam::beta;
  if (s == "betaBar") return SweepParam::beta_bar;
  if (s == "aParBar") return SweepParam::a_par_bar;
  throw CommandError(kExitConfig, "unknown sweep parameter '" + s + "' (beta, betaBar, aParBar)");
}

/// beta and betaBar are in rad, aParBar in kHz.
struct SweepSpec {
  SweepParam param = SweepParam::beta_bar;
  double start = 0.0;
  double stop = 0.0;
  int count = 2;
  std::string spin;  // swept spin; empty picks the first matching one

  void validate() const {
    if (count < 2) throw CommandError(kExitConfig, "sweep count must be >= 2");
    if (!(start < stop)) throw CommandError(kExitConfig, "sweep needs start < stop");
  }

  double value(int i) const { return i + 1 == count ? stop : start + (stop - start) * i / (count - 1); }
};

namespace detail {

inline NuclearSpinParams& find_swept(NodeConfig& cfg, const std::string& label, SpinRole role) {
  for (auto& s : cfg.spins) {
    if (label.empty() ? s.role == role : s.label == label) {
      if (s.role != role) {
        throw CommandError(kExitConfig, "spin '" + s.label + "' does not have role " + to_string(role));
      }
      return s;
    }
  }
  throw CommandError(kExitConfig, label.empty() ? std::string("config has no spin with role ") + to_string(role)
                                                : "unknown spin label '" + label + "'");
}

inline void apply_sweep_value(NuclearSpinParams& s, SweepParam p, double v, double omega_larmor) {
  if (p == SweepParam::a_par_bar) {
    s.a_par = khz_to_rad(v);
  } else {
    s.beta = v;
  }
  try {
    derive_omega1(s, omega_larmor);
  } catch (const std::exception& e) {
    throw CommandError(kExitConfig, "sweep value " + format_number(v) + " invalid: " + e.what());
  }
}

inline void check_unit_interval(const FidelityReport& r) {
  if (!(r.fidelity >= -1e-12 && r.fidelity <= 1.0 + 1e-12)) {
    throw CommandError(kExitNumeric, "fidelity outside [0, 1]: " + format_number(r.fidelity));
  }
}

inline void write_sweep_row(std::ostream& out, SweepParam p, double v, const FidelityReport& r) {
  out << to_string(p) << ',' << format_number(v) << ',' << format_number(r.fidelity) << ','
      << format_number(r.infidelity) << ',' << to_string(r.model) << '\n';
}

}  // namespace detail

inline constexpr const char* kSweepCsvHeader = "sweep_param,value,fidelity,infidelity,model\n";

/// Register gate fidelity (target plus unaddressed spins) along the sweep.
/// beta sweeps the target; betaBar and aParBar sweep an unaddressed spin.
/// Without a configured Rabi factor the target is calibrated, once, or per
/// point when the target itself is swept.
inline nlohmann::ordered_json cmd_sweep_gatefid(const RunContext& ctx, const SweepSpec& spec,
                                                std::ostream& csv) {
  spec.validate();
  const NodeConfig& base = ctx.config;
  const SpinRole role = spec.param == SweepParam::beta ? SpinRole::target : SpinRole::unaddressed;
  {
    NodeConfig probe = base;
    detail::find_swept(probe, spec.spin, role);
  }
  std::optional<double> fixed_factor = base.rabi_factor;
  if (!fixed_factor && role != SpinRole::target) fixed_factor = rabi_factor_for(base, base.target());

  struct Point {
    FidelityReport report;
    double factor = 0.0;
  };
  const auto points = parallel_map<Point>(spec.count, ctx.jobs, [&](int i) {
    NodeConfig cfg = base;
    const double v = spec.value(i);
    detail::apply_sweep_value(detail::find_swept(cfg, spec.spin, role), spec.param, v, cfg.omega_larmor);
    const auto reg = cfg.register_spins();
    const double factor = fixed_factor ? *fixed_factor : rabi_factor_for(cfg, reg.front());
    const auto seq = cfg.sequence_for(reg.front(), factor);
    const double w1 = derive_omega1(reg.front(), cfg.omega_larmor);
    std::vector<ConditionalEvolution> evs;
    for (const auto& s : reg) evs.push_back(corrected_evolution(s, seq, w1));
    const auto gate = assemble_gate(evs);
    auto r = gate_fidelity(ideal_crot(static_cast<int>(reg.size()) - 1), gate.matrix);
    detail::check_unit_interval(r);
    return Point{r, factor};
  });

  csv << kSweepCsvHeader;
  for (int i = 0; i < spec.count; ++i) {
    detail::write_sweep_row(csv, spec.param, spec.value(i), points[static_cast<std::size_t>(i)].report);
  }
  auto j = provenance(ctx, "sweep-gatefid");
  j["param"] = to_string(spec.param);
  j["start"] = spec.start;
  j["stop"] = spec.stop;
  j["count"] = spec.count;
  if (fixed_factor) {
    j["rabi_factor"] = *fixed_factor;
  } else {
    j["rabi_factor"] = "calibrated per point";
  }
  j["dimension"] = 2 << base.register_spins().size();
  return j;
}

/// Bath-induced infidelity of the ideal register gate along the sweep. Each
/// point gets two rows: the exact Kraus-channel value and the sinc^2
/// estimate for the swept bath spin alone. Only betaBar and aParBar apply.
inline nlohmann::ordered_json cmd_sweep_bathfid(const RunContext& ctx, const SweepSpec& spec,
                                                std::ostream& csv) {
  spec.validate();
  if (spec.param == SweepParam::beta) {
    throw CommandError(kExitConfig, "sweep-bathfid sweeps a bath spin: use betaBar or aParBar");
  }
  const NodeConfig& base = ctx.config;
  {
    NodeConfig probe = base;
    detail::find_swept(probe, spec.spin, SpinRole::bath);
  }
  const auto& target = base.target();
  const double factor = rabi_factor_for(base, target);
  const auto seq = base.sequence_for(target, factor);
  const double w1 = derive_omega1(target, base.omega_larmor);
  const int k = static_cast<int>(base.register_spins().size());

  struct Point {
    FidelityReport exact;
    FidelityReport sinc;
  };
  const auto points = parallel_map<Point>(spec.count, ctx.jobs, [&](int i) {
    NodeConfig cfg = base;
    auto& swept = detail::find_swept(cfg, spec.spin, SpinRole::bath);
    detail::apply_sweep_value(swept, spec.param, spec.value(i), cfg.omega_larmor);
    std::vector<BathSpinOverlaps> ovs;
    for (const auto& b : cfg.bath_spins()) ovs.push_back(bath_overlaps_from_sequence(b, seq, w1));
    Point p;
    p.exact = bath_fidelity(k, ovs);
    const double a_res = resonant_apar(swept.beta, w1, cfg.omega_larmor);
    p.sinc = FidelityReport::from_infidelity(sinc_infidelity(swept.a_par, a_res, seq),
                                             FidelityModel::sinc_approx, swept.label);
    detail::check_unit_interval(p.exact);
    detail::check_unit_interval(p.sinc);
    return p;
  });

  csv << kSweepCsvHeader;
  for (int i = 0; i < spec.count; ++i) {
    const auto& p = points[static_cast<std::size_t>(i)];
    detail::write_sweep_row(csv, spec.param, spec.value(i), p.exact);
    detail::write_sweep_row(csv, spec.param, spec.value(i), p.sinc);
  }
  auto j = provenance(ctx, "sweep-bathfid");
  j["param"] = to_string(spec.param);
  j["start"] = spec.start;
  j["stop"] = spec.stop;
  j["count"] = spec.count;
  j["rabi_factor"] = factor;
  j["register_spins"] = k;
  return j;
}

// ------------------------------------------------------- calibrate, total, validate

/// Calibrates every register spin as the addressed target.
inline nlohmann::ordered_json cmd_calibrate(const RunContext& ctx) {
  const NodeConfig& cfg = ctx.config;
  const auto reg = cfg.register_spins();
  const auto results = parallel_map<CalibrationResult>(static_cast<int>(reg.size()), ctx.jobs, [&](int i) {
    NuclearSpinParams s = reg[static_cast<std::size_t>(i)];
    s.role = SpinRole::target;
    return calibrate_rabi(s, cfg.sequence_for(s, 1.0));
  });
  auto j = provenance(ctx, "calibrate");
  const auto& t = results.front();
  j["spin"] = reg.front().label;
  j["factor"] = t.rabi_factor;
  j["fidelity"] = t.achieved_fidelity;
  j["infidelity"] = t.achieved_infidelity;
  j["iterations"] = t.iterations;
  j["converged"] = t.converged;
  nlohmann::ordered_json per = nlohmann::ordered_json::array();
  for (std::size_t i = 0; i < reg.size(); ++i) {
    nlohmann::ordered_json e;
    e["spin"] = reg[i].label;
    e["factor"] = results[i].rabi_factor;
    e["fidelity"] = results[i].achieved_fidelity;
    e["iterations"] = results[i].iterations;
    e["converged"] = results[i].converged;
    per.push_back(e);
  }
  j["spins"] = per;
  return j;
}

/// Total fidelity for p entangling rounds with the same elementary fidelity
/// f_enn on both nodes. Without f_enn the d = 8 / d = 4 register gate fidelity
/// of the config is used.
inline nlohmann::ordered_json cmd_total(const RunContext& ctx, int p, std::optional<double> f_enn,
                                        std::optional<double> f_ee) {
  if (p < 1) throw CommandError(kExitConfig, "--p must be >= 1");
  const NodeConfig& cfg = ctx.config;
  double fe = f_ee.value_or(cfg.f_ee);
  double fn = 0.0;
  std::string source;
  if (f_enn) {
    fn = *f_enn;
    source = "flag";
  } else {
    const auto reg = cfg.register_spins();
    const auto seq = cfg.sequence_for(reg.front(), rabi_factor_for(cfg, reg.front()));
    const double w1 = derive_omega1(reg.front(), cfg.omega_larmor);
    std::vector<ConditionalEvolution> evs;
    for (const auto& s : reg) evs.push_back(corrected_evolution(s, seq, w1));
    fn = gate_fidelity(ideal_crot(static_cast<int>(reg.size()) - 1), assemble_gate(evs).matrix).fidelity;
    source = "config";
  }
  FidelityReport r;
  try {
    r = compose_total(fe, std::vector<double>(static_cast<std::size_t>(p), fn),
                      std::vector<double>(static_cast<std::size_t>(p), fn), p);
  } catch (const std::invalid_argument& e) {
    throw CommandError(kExitConfig, e.what());
  }
  auto j = provenance(ctx, "total");
  j["p"] = p;
  j["f_ee"] = fe;
  j["f_enn"] = fn;
  j["f_enn_source"] = source;
  j["fidelity"] = r.fidelity;
  j["infidelity"] = r.infidelity;
  j["model"] = to_string(r.model);
  return j;
}

/// RWA propagators against the brute-force oracle for every register spin.
/// "passed" is false when a distance exceeds kOracleDistanceLimit.
inline nlohmann::ordered_json cmd_validate(const RunContext& ctx, const IntegratorSpec& spec = {}) {
  const NodeConfig& cfg = ctx.config;
  const auto& target = cfg.target();
  const auto seq = cfg.sequence_for(target, rabi_factor_for(cfg, target));
  const double w1 = derive_omega1(target, cfg.omega_larmor);
  std::vector<NuclearSpinParams> spins = cfg.spins;
  const auto cmp = parallel_map<OracleComparison>(static_cast<int>(spins.size()), ctx.jobs, [&](int i) {
    return compare_with_oracle(spins[static_cast<std::size_t>(i)], seq, w1, spec);
  });
  auto j = provenance(ctx, "validate");
  j["steps_per_drive_period"] = spec.steps_per_drive_period;
  j["limit"] = kOracleDistanceLimit;
  bool ok = true;
  nlohmann::ordered_json per = nlohmann::ordered_json::array();
  for (std::size_t i = 0; i < spins.size(); ++i) {
    nlohmann::ordered_json e;
    e["spin"] = spins[i].label;
    e["distance0"] = cmp[i].distance0;
    e["distance1"] = cmp[i].distance1;
    e["unitarity_defect"] = cmp[i].unitarity_defect;
    ok = ok && cmp[i].max_distance() <= kOracleDistanceLimit;
    per.push_back(e);
  }
  j["spins"] = per;
  j["passed"] = ok;
  return j;
}

}  // namespace ddrf

#endif  // DDRF_COMMANDS_HPP
