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

// ddrf: command-line front end. CSV goes to --out (or stdout); sweeps and
// trajectories also write <out>.json with the config digest and version.

#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "ddrf/commands.hpp"

namespace {

struct Common {
  std::string config;
  std::string out;
  int jobs = 1;
};

void add_common(CLI::App* sub, Common& c) {
  sub->add_option("--config", c.config, "node config file")->required();
  sub->add_option("--out", c.out, "output path (stdout when omitted)");
  sub->add_option("--jobs", c.jobs, "worker threads")->check(CLI::PositiveNumber);
}

void write_file(const std::string& path, const std::string& data) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw ddrf::CommandError(ddrf::kExitFailure, "cannot write " + path);
  f << data;
  if (!f) throw ddrf::CommandError(ddrf::kExitFailure, "write failed: " + path);
}

// CSV result plus JSON sidecar.
void emit_csv(const Common& c, const std::string& csv, const nlohmann::ordered_json& meta) {
  if (c.out.empty()) {
    std::cout << csv;
    std::cerr << meta.dump() << '\n';
    return;
  }
  write_file(c.out, csv);
  write_file(c.out + ".json", meta.dump(2) + "\n");
}

void emit_json(const Common& c, const nlohmann::ordered_json& j) {
  const std::string text = j.dump(2) + "\n";
  if (c.out.empty()) {
    std::cout << text;
  } else {
    write_file(c.out, text);
  }
}

ddrf::RunContext context(const Common& c) {
  auto ctx = ddrf::make_context(ddrf::read_text_file(c.config), c.config, c.jobs);
  for (const auto& w : ctx.warnings) std::cerr << "warning: " << w.message << '\n';
  return ctx;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"DDRF nuclear-spin gate simulator"};
  app.set_version_flag("--version", std::string(ddrf::kToolVersion));
  app.require_subcommand(1);

  Common traj_c, gate_c, bath_c, cal_c, tot_c, val_c;

  auto* traj = app.add_subcommand("trajectory", "Bloch trajectory of one spin as CSV");
  add_common(traj, traj_c);
  std::string spin_label, initial = "plus";
  int branch = 0, samples = ddrf::kDefaultSamplesPerSegment;
  traj->add_option("--spin", spin_label, "spin label")->required();
  traj->add_option("--branch", branch, "initial electron state (0 or 1)");
  traj->add_option("--initial", initial, "nuclear state: up, down or plus");
  traj->add_option("--samples", samples, "samples per segment")->check(CLI::PositiveNumber);

  ddrf::SweepSpec gate_spec, bath_spec;
  std::string gate_param = "betaBar", bath_param = "aParBar";
  auto add_sweep = [](CLI::App* sub, ddrf::SweepSpec& s, std::string& param) {
    sub->add_option("--param", param, "beta, betaBar (rad) or aParBar (kHz)");
    sub->add_option("--start", s.start, "first value")->required();
    sub->add_option("--stop", s.stop, "last value")->required();
    sub->add_option("--count", s.count, "number of points")->required();
    sub->add_option("--spin", s.spin, "label of the swept spin");
  };
  auto* gate = app.add_subcommand("sweep-gatefid", "register gate fidelity sweep");
  add_common(gate, gate_c);
  add_sweep(gate, gate_spec, gate_param);
  auto* bath = app.add_subcommand("sweep-bathfid", "bath-spin fidelity sweep (exact and sinc^2)");
  add_common(bath, bath_c);
  add_sweep(bath, bath_spec, bath_param);

  auto* cal = app.add_subcommand("calibrate", "calibrate the Rabi factor");
  add_common(cal, cal_c);

  auto* tot = app.add_subcommand("total", "compose the total entangling fidelity");
  add_common(tot, tot_c);
  int p = 1;
  std::optional<double> f_enn, f_ee;
  tot->add_option("--p", p, "number of entangling rounds")->required();
  tot->add_option("--f-enn", f_enn, "elementary electron-nuclear fidelity");
  tot->add_option("--f-ee", f_ee, "electron-electron fidelity (config value by default)");

  auto* val = app.add_subcommand("validate", "compare RWA propagators with the oracle");
  add_common(val, val_c);
  int steps = ddrf::IntegratorSpec{}.steps_per_drive_period;
  val->add_option("--steps", steps, "oracle steps per drive period")->check(CLI::Range(64, 1 << 20));

  CLI11_PARSE(app, argc, argv);

  try {
    if (traj->parsed()) {
      const auto ctx = context(traj_c);
      std::ostringstream csv;
      const auto meta = ddrf::cmd_trajectory(ctx, spin_label, branch, initial, samples, csv);
      emit_csv(traj_c, csv.str(), meta);
    } else if (gate->parsed()) {
      const auto ctx = context(gate_c);
      gate_spec.param = ddrf::parse_sweep_param(gate_param);
      std::ostringstream csv;
      const auto meta = ddrf::cmd_sweep_gatefid(ctx, gate_spec, csv);
      emit_csv(gate_c, csv.str(), meta);
    } else if (bath->parsed()) {
      const auto ctx = context(bath_c);
      bath_spec.param = ddrf::parse_sweep_param(bath_param);
      std::ostringstream csv;
      const auto meta = ddrf::cmd_sweep_bathfid(ctx, bath_spec, csv);
      emit_csv(bath_c, csv.str(), meta);
    } else if (cal->parsed()) {
      emit_json(cal_c, ddrf::cmd_calibrate(context(cal_c)));
    } else if (tot->parsed()) {
      emit_json(tot_c, ddrf::cmd_total(context(tot_c), p, f_enn, f_ee));
    } else if (val->parsed()) {
      ddrf::IntegratorSpec spec;
      spec.steps_per_drive_period = steps;
      const auto j = ddrf::cmd_validate(context(val_c), spec);
      emit_json(val_c, j);
      if (!j["passed"].get<bool>()) {
        std::cerr << "error: oracle distance above " << ddrf::kOracleDistanceLimit << '\n';
        return ddrf::kExitNumeric;
      }
    }
  } catch (const ddrf::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return ddrf::kExitConfig;
  } catch (const ddrf::CommandError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return e.exit_code();
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return ddrf::kExitFailure;
  }
  return ddrf::kExitOk;
}
