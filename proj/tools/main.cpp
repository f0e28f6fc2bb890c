#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "commands.hpp"
#include "wfusion/fusion_spec.hpp"

namespace {

using namespace wfusion;
using namespace wfusion::cli;

CLI::App* add_command(CLI::App& app, const std::string& name, const std::string& help) {
  CLI::App* cmd = app.add_subcommand(name, help);
  cmd->fallthrough();  // let --out/--config appear after the subcommand name
  return cmd;
}

void add_physical_flags(CLI::App* cmd, PhysicalConfig* physical) {
  cmd->add_option("--g-khz", physical->g_khz, "atom-cavity coupling g / (2*pi*1e3 rad/s)")
      ->capture_default_str();
  cmd->add_option("--delta-ratio", physical->delta_ratio, "detuning as a multiple of g")
      ->capture_default_str();
  cmd->add_option("--tr-seconds", physical->tr_seconds, "atomic decay time T_r in seconds")
      ->capture_default_str();
}

void add_noise_rate_flags(CLI::App* cmd, PhysicalConfig* physical) {
  cmd->add_option_function<double>(
         "--kappa-minus", [physical](double v) { physical->kappa_minus = v; },
         "decay rate in 1/s (default 1/T_r)");
  cmd->add_option_function<double>(
         "--kappa-z", [physical](double v) { physical->kappa_z = v; },
         "dephasing rate in 1/s (default 1/T_r)");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"wfusion: cavity-mediated fusion of W-like atomic states"};
  app.require_subcommand(1);
  app.set_config("--config", "", "key=value config file; flags override file values");

  std::string out_path = "-";
  app.add_option("--out", out_path, "output path ('-' for stdout)")->capture_default_str();

  // time-table
  TimeTableConfig tt;
  std::string tt_format = "csv";
  auto* tt_cmd = add_command(app, "time-table", "interaction times over a size grid");
  tt_cmd->add_option("--max-n", tt.max_n, "largest first-input size")->capture_default_str();
  tt_cmd->add_option("--max-m", tt.max_m, "largest second-input size")->capture_default_str();
  tt_cmd->add_option("--format", tt_format, "csv or json")->capture_default_str();

  // fuse2 / fuse3
  FuseConfig fuse;
  auto* fuse2_cmd = add_command(app, "fuse2", "fuse two W-like states");
  fuse2_cmd->add_option("--n", fuse.n, "first input size")->capture_default_str();
  fuse2_cmd->add_option("--m", fuse.m, "second input size")->capture_default_str();
  fuse2_cmd->add_flag("--emit-state", fuse.emit_state, "include the corrected state amplitudes");
  fuse2_cmd->add_flag("--measure-a", fuse.measure_a, "detect atom a instead of atom b");
  add_physical_flags(fuse2_cmd, &fuse.physical);

  int fuse3_t = 2;
  auto* fuse3_cmd = add_command(app, "fuse3", "fuse three W-like states");
  fuse3_cmd->add_option("--n", fuse.n, "first input size")->capture_default_str();
  fuse3_cmd->add_option("--m", fuse.m, "second input size")->capture_default_str();
  fuse3_cmd->add_option("--t", fuse3_t, "third input size (must equal --m)")->capture_default_str();
  fuse3_cmd->add_flag("--emit-state", fuse.emit_state, "include the corrected state amplitudes");
  add_physical_flags(fuse3_cmd, &fuse.physical);

  // noise
  NoiseConfig noise;
  std::string noise_scope = "all";
  std::optional<int> noise_t;
  auto* noise_cmd = add_command(app, "noise", "fidelity trace under decay and dephasing");
  noise_cmd->add_option("--n", noise.n, "first input size")->capture_default_str();
  noise_cmd->add_option("--m", noise.m, "second input size")->capture_default_str();
  noise_cmd->add_option_function<int>(
      "--t", [&noise_t](int v) { noise_t = v; }, "third input size (three-input fusion)");
  noise_cmd->add_option("--points", noise.points, "time-grid size")->capture_default_str();
  noise_cmd->add_option("--t-max-factor", noise.t_max_factor, "grid end as a multiple of t*")
      ->capture_default_str();
  noise_cmd->add_option("--noise-scope", noise_scope, "all | cavity (noisy atom set)")
      ->capture_default_str();
  add_physical_flags(noise_cmd, &noise.physical);
  add_noise_rate_flags(noise_cmd, &noise.physical);

  // cost
  CostConfig cost;
  std::string cost_format = "csv";
  std::string overlay_path;
  auto* cost_cmd = add_command(app, "cost", "optimal resource-cost table");
  cost_cmd->add_option("--n-max", cost.n_max, "largest target size")->capture_default_str();
  cost_cmd->add_option("--strategy", cost.strategy, "two | three | both")->capture_default_str();
  cost_cmd->add_option("--overlay", overlay_path, "CSV (n,value) overlay column");
  cost_cmd->add_option("--format", cost_format, "csv or json")->capture_default_str();

  // validate
  ValidateConfig validate;
  auto* validate_cmd =
      add_command(app, "validate", "full-model check of the large-detuning approximation");
  validate_cmd->add_option("--n", validate.n, "first input size")->capture_default_str();
  validate_cmd->add_option("--m", validate.m, "second input size")->capture_default_str();
  validate_cmd->add_option("--ratios", validate.ratios, "detuning ratios delta/g")
      ->capture_default_str();
  validate_cmd->add_option("--fock-cutoff", validate.fock_cutoff, "initial cavity cutoff")
      ->capture_default_str();
  add_physical_flags(validate_cmd, &validate.physical);

  CLI11_PARSE(app, argc, argv);

  try {
    if (tt_cmd->parsed()) {
      tt.format = parse_format(tt_format);
      write_artifact(cmd_time_table(tt), out_path, std::cout);
    } else if (fuse2_cmd->parsed()) {
      fuse.t.reset();
      write_artifact(cmd_fuse(fuse), out_path, std::cout);
    } else if (fuse3_cmd->parsed()) {
      fuse.t = fuse3_t;
      write_artifact(cmd_fuse(fuse), out_path, std::cout);
    } else if (noise_cmd->parsed()) {
      noise.t = noise_t;
      noise.scope = noise_scope == "cavity" ? NoiseScope::cavity_only : NoiseScope::all_atoms;
      if (noise_scope != "cavity" && noise_scope != "all") {
        throw std::invalid_argument("unknown noise scope: " + noise_scope);
      }
      const NoiseResult result = cmd_noise(noise);
      write_artifact(result.artifact, out_path, std::cout);
      std::cout << result.summary << "\n";
    } else if (cost_cmd->parsed()) {
      cost.format = parse_format(cost_format);
      if (!overlay_path.empty()) cost.overlay_path = overlay_path;
      write_artifact(cmd_cost(cost), out_path, std::cout);
    } else if (validate_cmd->parsed()) {
      const ValidateResult result = cmd_validate(validate);
      write_artifact(result.artifact, out_path, std::cout);
      if (!result.monotone) {
        std::cerr << "error: validation errors are not monotone in the detuning ratio\n";
        return 1;
      }
    }
  } catch (const unsupported_shape_error& e) {
    std::cerr << "error: unsupported fusion shape: " << e.what() << "\n";
    return 2;
  } catch (const infeasible_time_error& e) {
    std::cerr << "error: infeasible fusion: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
