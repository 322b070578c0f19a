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

#ifndef DDRF_CONFIG_HPP
#define DDRF_CONFIG_HPP

// Node configuration files. The format is a small TOML subset:
//
//   [sequence]
//   n_pulses = 48
//   tau_over_tauL = 8
//   larmor_khz = 432
//   varphi_rad = 0.0
//   rabi_factor = 0.93      # optional; calibrated when absent
//
//   [node]
//   f_ee = 0.99
//
//   [[spin]]
//   label = "n1"
//   apar_khz = 50
//   beta_rad = 0.0
//   role = "target"         # target | unaddressed | bath
//
// Frequencies are ordinary frequencies in kHz and are converted to rad/s.
// Unknown sections or keys are errors.

#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "ddrf/system.hpp"

namespace ddrf {

class ConfigError : public std::runtime_error {
 public:
  ConfigError(const std::string& where, int line, const std::string& what)
      : std::runtime_error(where + (line > 0 ? ":" + std::to_string(line) : std::string{}) + ": " +
                           what),
        line_(line) {}
  int line() const { return line_; }

 private:
  int line_;
};

struct ConfigWarning {
  std::string code;  // "spectral_crowding" | "non_resonant_tau"
  std::string message;
};

namespace detail {

inline std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

inline std::string_view strip_comment(std::string_view s) {
  bool quoted = false;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] == '"') quoted = !quoted;
    if (s[i] == '#' && !quoted) return s.substr(0, i);
  }
  return s;
}

using ConfigValue = std::variant<double, std::string>;

struct RawEntry {
  ConfigValue value;
  bool integral = false;
  int line = 0;
};

using RawTable = std::map<std::string, RawEntry>;

inline ConfigValue parse_value(std::string_view v, bool& integral, const std::string& where,
                               int line) {
  if (v.size() >= 2 && v.front() == '"' && v.back() == '"') {
    const auto inner = v.substr(1, v.size() - 2);
    if (inner.find('"') != std::string_view::npos) throw ConfigError(where, line, "malformed string");
    return std::string{inner};
  }
  double x = 0.0;
  const char* first = v.data();
  if (!v.empty() && v.front() == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, v.data() + v.size(), x);
  if (ec != std::errc{} || ptr != v.data() + v.size() || v.empty() || !std::isfinite(x)) {
    throw ConfigError(where, line, "cannot parse value '" + std::string{v} + "'");
  }
  integral = v.find_first_of(".eE") == std::string_view::npos;
  return x;
}

struct RawConfig {
  RawTable sequence;
  RawTable node;
  std::vector<RawTable> spins;
  std::vector<int> spin_lines;
};

inline RawConfig parse_raw(std::string_view text, const std::string& where) {
  static const std::map<std::string, std::set<std::string>> kKeys{
      {"sequence", {"n_pulses", "tau_over_tauL", "larmor_khz", "varphi_rad", "rabi_factor"}},
      {"node", {"f_ee"}},
      {"spin", {"label", "apar_khz", "beta_rad", "role"}},
  };
  RawConfig raw;
  std::set<std::string> seen_tables;
  RawTable* current = nullptr;
  std::string section;
  int line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto nl = text.find('\n', pos);
    const auto end = nl == std::string_view::npos ? text.size() : nl;
    const std::string_view line = trim(strip_comment(text.substr(pos, end - pos)));
    ++line_no;
    pos = end + 1;
    if (line.empty()) {
      if (nl == std::string_view::npos) break;
      continue;
    }
    if (line.starts_with("[[")) {
      if (!line.ends_with("]]")) throw ConfigError(where, line_no, "malformed array header");
      section = std::string{trim(line.substr(2, line.size() - 4))};
      if (section != "spin") throw ConfigError(where, line_no, "unknown array section [[" + section + "]]");
      raw.spins.emplace_back();
      raw.spin_lines.push_back(line_no);
      current = &raw.spins.back();
    } else if (line.starts_with("[")) {
      if (!line.ends_with("]")) throw ConfigError(where, line_no, "malformed section header");
      section = std::string{trim(line.substr(1, line.size() - 2))};
      if (section == "sequence") {
        current = &raw.sequence;
      } else if (section == "node") {
        current = &raw.node;
      } else {
        throw ConfigError(where, line_no, "unknown section [" + section + "]");
      }
      if (!seen_tables.insert(section).second) {
        throw ConfigError(where, line_no, "duplicate section [" + section + "]");
      }
    } else {
      const auto eq = line.find('=');
      if (eq == std::string_view::npos) throw ConfigError(where, line_no, "expected key = value");
      if (current == nullptr) throw ConfigError(where, line_no, "key outside of any section");
      const std::string key{trim(line.substr(0, eq))};
      const auto value = trim(line.substr(eq + 1));
      if (!kKeys.at(section).contains(key)) {
        throw ConfigError(where, line_no, "unknown key '" + key + "' in [" + section + "]");
      }
      if (current->contains(key)) throw ConfigError(where, line_no, "duplicate key '" + key + "'");
      RawEntry entry;
      entry.value = parse_value(value, entry.integral, where, line_no);
      entry.line = line_no;
      current->emplace(key, std::move(entry));
    }
    if (nl == std::string_view::npos) break;
  }
  return raw;
}

inline double get_number(const RawTable& t, const std::string& key, double fallback,
                         const std::string& where) {
  const auto it = t.find(key);
  if (it == t.end()) return fallback;
  if (!std::holds_alternative<double>(it->second.value)) {
    throw ConfigError(where, it->second.line, "'" + key + "' must be a number");
  }
  return std::get<double>(it->second.value);
}

inline std::string get_string(const RawTable& t, const std::string& key, const std::string& where,
                              int section_line) {
  const auto it = t.find(key);
  if (it == t.end()) throw ConfigError(where, section_line, "missing key '" + key + "'");
  if (!std::holds_alternative<std::string>(it->second.value)) {
    throw ConfigError(where, it->second.line, "'" + key + "' must be a string");
  }
  return std::get<std::string>(it->second.value);
}

}  // namespace detail

/// Check invariants (throws ConfigError) and report soft problems.
inline std::vector<ConfigWarning> validate(const NodeConfig& cfg, const std::string& where = "config") {
  if (cfg.n_pulses <= 0 || cfg.n_pulses % 2 != 0) {
    throw ConfigError(where, 0, "n_pulses must be a positive even integer");
  }
  if (!(cfg.tau_over_tau_l > 0.0)) throw ConfigError(where, 0, "tau_over_tauL must be positive");
  if (!(cfg.omega_larmor > 0.0)) throw ConfigError(where, 0, "larmor_khz must be positive");
  if (cfg.rabi_factor && !(*cfg.rabi_factor >= 0.0 && *cfg.rabi_factor <= 1.0)) {
    throw ConfigError(where, 0, "rabi_factor must lie in [0, 1]");
  }
  if (!(cfg.f_ee >= 0.0 && cfg.f_ee <= 1.0)) throw ConfigError(where, 0, "f_ee must lie in [0, 1]");

  int targets = 0;
  std::set<std::string> labels;
  for (std::size_t i = 0; i < cfg.spins.size(); ++i) {
    const auto& s = cfg.spins[i];
    const std::string loc = "spin #" + std::to_string(i + 1) + " ('" + s.label + "')";
    if (s.label.empty()) throw ConfigError(where, 0, loc + ": empty label");
    if (!labels.insert(s.label).second) throw ConfigError(where, 0, loc + ": duplicate label");
    if (s.role == SpinRole::target) ++targets;
    if (!(s.beta >= 0.0 && s.beta < 0.5 * kPi)) throw ConfigError(where, 0, loc + ": beta_rad must lie in [0, pi/2)");
    if (!(cfg.omega_larmor > s.a_par)) throw ConfigError(where, 0, loc + ": apar_khz must be below larmor_khz");
  }
  if (targets != 1) {
    throw ConfigError(where, 0, "exactly one spin must have role \"target\" (found " +
                                    std::to_string(targets) + ")");
  }

  std::vector<ConfigWarning> warnings;
  const double tau = cfg.tau_over_tau_l * kTwoPi / cfg.omega_larmor;
  const double ratio = cfg.tau_over_tau_l;
  if (std::abs(ratio - std::round(ratio)) > 1e-9 * std::max(1.0, ratio)) {
    warnings.push_back({"non_resonant_tau", "resonantTau=false: tau/tau_L = " + std::to_string(ratio) +
                                                " is not an integer; phase correction is approximate"});
  }
  const double width = kTwoPi / (cfg.n_pulses * tau);
  std::vector<const NuclearSpinParams*> reg;
  for (const auto& s : cfg.spins) {
    if (s.role != SpinRole::bath) reg.push_back(&s);
  }
  for (std::size_t i = 0; i < reg.size(); ++i) {
    for (std::size_t j = i + 1; j < reg.size(); ++j) {
      const double d = std::abs(derive_omega1(*reg[i], cfg.omega_larmor) -
                                derive_omega1(*reg[j], cfg.omega_larmor));
      if (d < width) {
        warnings.push_back({"spectral_crowding", "spins '" + reg[i]->label + "' and '" + reg[j]->label +
                                                     "' are closer than 2 pi/(N tau) in omega1"});
      }
    }
  }
  return warnings;
}

/// Parse and validate configuration text. `where` names the source in errors.
inline NodeConfig load_config(std::string_view text, const std::string& where = "config") {
  const auto raw = detail::parse_raw(text, where);
  NodeConfig cfg;

  if (const auto it = raw.sequence.find("n_pulses"); it != raw.sequence.end()) {
    if (!std::holds_alternative<double>(it->second.value) || !it->second.integral) {
      throw ConfigError(where, it->second.line, "n_pulses must be an integer");
    }
    const double n = std::get<double>(it->second.value);
    if (n <= 0 || n > 1e6 || static_cast<int>(n) % 2 != 0) {
      throw ConfigError(where, it->second.line, "n_pulses must be a positive even integer");
    }
    cfg.n_pulses = static_cast<int>(n);
  }
  cfg.tau_over_tau_l = detail::get_number(raw.sequence, "tau_over_tauL", kDefaultTauOverTauL, where);
  cfg.omega_larmor = khz_to_rad(detail::get_number(raw.sequence, "larmor_khz", kDefaultLarmorKhz, where));
  cfg.varphi = detail::get_number(raw.sequence, "varphi_rad", 0.0, where);
  if (raw.sequence.contains("rabi_factor")) {
    cfg.rabi_factor = detail::get_number(raw.sequence, "rabi_factor", 1.0, where);
  }
  cfg.f_ee = detail::get_number(raw.node, "f_ee", kDefaultFee, where);

  for (std::size_t i = 0; i < raw.spins.size(); ++i) {
    const auto& t = raw.spins[i];
    const int line = raw.spin_lines[i];
    NuclearSpinParams s;
    s.label = detail::get_string(t, "label", where, line);
    if (!t.contains("apar_khz")) throw ConfigError(where, line, "missing key 'apar_khz'");
    s.a_par = khz_to_rad(detail::get_number(t, "apar_khz", 0.0, where));
    s.beta = detail::get_number(t, "beta_rad", 0.0, where);
    const std::string role = detail::get_string(t, "role", where, line);
    if (role == "target") {
      s.role = SpinRole::target;
    } else if (role == "unaddressed") {
      s.role = SpinRole::unaddressed;
    } else if (role == "bath") {
      s.role = SpinRole::bath;
    } else {
      throw ConfigError(where, t.at("role").line, "unknown role '" + role + "'");
    }
    cfg.spins.push_back(std::move(s));
  }
  validate(cfg, where);
  return cfg;
}

inline std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError(path, 0, "cannot open file");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline NodeConfig load_config_file(const std::string& path) {
  return load_config(read_text_file(path), path);
}

}  // namespace ddrf

#endif  // DDRF_CONFIG_HPP
