#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "wfusion/types.hpp"

// Command implementations behind the wfusion CLI. Each command renders its
// artifact into a string (CSV or JSON, deterministic for identical configs)
// so it can be unit-tested without spawning processes.

namespace wfusion::cli {

// Physical parameter block; defaults are the reference working point
// (g = 2*pi*24 kHz, delta = 10 g, T_r = 3e-2 s, kappa_- = kappa_z = 1/T_r).
struct PhysicalConfig {
  Real g_khz = 24.0;        // g = 2*pi * g_khz * 1e3 rad/s
  Real delta_ratio = 10.0;  // delta = delta_ratio * g
  Real tr_seconds = 3e-2;
  std::optional<Real> kappa_minus;  // 1/s, defaults to 1/tr_seconds
  std::optional<Real> kappa_z;

  Real g_rad() const;
  Real delta_rad() const;
  Real lambda_rad() const;
  Real kappa_minus_value() const;
  Real kappa_z_value() const;
};

enum class Format { csv, json };
Format parse_format(const std::string& s);

struct TimeTableConfig {
  int max_n = 10;
  int max_m = 10;
  Format format = Format::csv;
};
std::string cmd_time_table(const TimeTableConfig& config);

struct FuseConfig {
  int n = 2;
  int m = 2;
  std::optional<int> t;  // set for three-input fusion
  bool emit_state = false;
  bool measure_a = false;
  PhysicalConfig physical;
};
std::string cmd_fuse(const FuseConfig& config);

enum class NoiseScope { all_atoms, cavity_only };

struct NoiseConfig {
  int n = 2;
  int m = 2;
  std::optional<int> t;
  int points = 60;           // grid size over [0, t_max_factor * t_star]
  Real t_max_factor = 1.0;
  NoiseScope scope = NoiseScope::all_atoms;
  PhysicalConfig physical;
};
struct NoiseResult {
  std::string artifact;  // CSV trace
  std::string summary;   // one-line fidelity at t*
  Real fidelity_at_t_star = 0.0;
  Real success_probability_at_t_star = 0.0;
};
NoiseResult cmd_noise(const NoiseConfig& config);

struct CostConfig {
  int n_max = 12;
  std::string strategy = "both";  // two | three | both
  std::optional<std::string> overlay_path;
  Format format = Format::csv;
};
std::string cmd_cost(const CostConfig& config);

struct ValidateConfig {
  int n = 2;
  int m = 2;
  std::vector<Real> ratios = {5.0, 10.0, 20.0};
  int fock_cutoff = 4;
  PhysicalConfig physical;  // delta_ratio is ignored; ratios drive delta
};
struct ValidateResult {
  std::string artifact;  // JSON report
  std::vector<Real> errors;
  bool monotone = false;
};
ValidateResult cmd_validate(const ValidateConfig& config);

// Writes to the path, or to the stream when path is "-" or empty.
void write_artifact(const std::string& content, const std::string& path, std::ostream& fallback);

}  // namespace wfusion::cli
