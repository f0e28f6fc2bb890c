#include "commands.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <numbers>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "wfusion/fusion.hpp"
#include "wfusion/noise.hpp"
#include "wfusion/resource.hpp"

namespace wfusion::cli {

using nlohmann::ordered_json;

namespace {

std::string fmt_num(Real v) {
  std::ostringstream os;
  os << std::setprecision(12) << v;
  return os.str();
}

// Probabilities and fidelities must land in [0,1]; tiny numerical spill is
// clamped, anything larger is a bug.
Real checked_unit_interval(Real v, const char* what) {
  if (v < -1e-9 || v > 1.0 + 1e-9) {
    throw std::logic_error(std::string(what) + " outside [0,1]: " + fmt_num(v));
  }
  return std::clamp(v, 0.0, 1.0);
}

}  // namespace

Format parse_format(const std::string& s) {
  if (s == "csv") return Format::csv;
  if (s == "json") return Format::json;
  throw std::invalid_argument("unknown format: " + s);
}

Real PhysicalConfig::g_rad() const {
  if (g_khz < 0.0) throw std::invalid_argument("g must be >= 0");
  return 2.0 * std::numbers::pi * g_khz * 1e3;
}
Real PhysicalConfig::delta_rad() const { return delta_ratio * g_rad(); }
Real PhysicalConfig::lambda_rad() const {
  const Real d = delta_rad();
  return d > 0.0 ? g_rad() * g_rad() / d : 0.0;
}
Real PhysicalConfig::kappa_minus_value() const {
  return kappa_minus.value_or(1.0 / tr_seconds);
}
Real PhysicalConfig::kappa_z_value() const { return kappa_z.value_or(1.0 / tr_seconds); }

std::string cmd_time_table(const TimeTableConfig& config) {
  if (config.max_n < 2 || config.max_m < 2) {
    throw std::invalid_argument("time table sizes must be >= 2");
  }
  struct Row {
    std::string kind;
    int n, m, t;  // t < 0 means none
    std::optional<Real> lambda_t;
  };
  std::vector<Row> rows;
  for (int n = 2; n <= config.max_n; ++n) {
    for (int m = 2; m <= config.max_m; ++m) {
      rows.push_back({"fuse2", n, m, -1, solve_time_two(n, m)});
    }
  }
  for (int n = 2; n <= config.max_n; ++n) {
    for (int m = 2; m <= config.max_m; ++m) {
      Row row{"fuse3", n, m, m, std::nullopt};
      try {
        row.lambda_t = solve_time_three(n, m, m);
      } catch (const infeasible_time_error&) {
      }
      rows.push_back(std::move(row));
    }
  }

  if (config.format == Format::csv) {
    std::ostringstream os;
    os << "# wfusion time-table v1\n";
    os << "kind,n,m,t,lambda_t,status\n";
    for (const auto& r : rows) {
      os << r.kind << "," << r.n << "," << r.m << ",";
      if (r.t >= 0) os << r.t;
      os << ",";
      if (r.lambda_t) os << fmt_num(*r.lambda_t);
      os << "," << (r.lambda_t ? "ok" : "infeasible") << "\n";
    }
    return os.str();
  }
  ordered_json doc;
  doc["schema_version"] = "wfusion/time-table/v1";
  doc["rows"] = ordered_json::array();
  for (const auto& r : rows) {
    ordered_json jr;
    jr["kind"] = r.kind;
    jr["n"] = r.n;
    jr["m"] = r.m;
    if (r.t >= 0) jr["t"] = r.t; else jr["t"] = nullptr;
    if (r.lambda_t) jr["lambda_t"] = *r.lambda_t; else jr["lambda_t"] = nullptr;
    jr["status"] = r.lambda_t ? "ok" : "infeasible";
    doc["rows"].push_back(std::move(jr));
  }
  return doc.dump(2) + "\n";
}

std::string cmd_fuse(const FuseConfig& config) {
  const Real lambda = config.physical.lambda_rad();
  FuseOptions options;
  options.measure_a = config.measure_a;
  const FusionOutcome outcome =
      config.t ? fuse_three(config.n, config.m, *config.t, lambda, options)
               : fuse_two(config.n, config.m, lambda, options);

  ordered_json doc;
  doc["schema_version"] = "wfusion/fuse-report/v1";
  doc["protocol"] = config.t ? "fuse3" : "fuse2";
  doc["n"] = config.n;
  doc["m"] = config.m;
  if (config.t) doc["t"] = *config.t; else doc["t"] = nullptr;
  doc["detector"] = config.measure_a ? "a" : (config.t ? "bc" : "b");
  doc["lambda_rad_per_s"] = lambda;
  doc["lambda_t_star"] = outcome.spec.lambda_t_star;
  doc["t_star_seconds"] = lambda > 0.0 ? outcome.spec.lambda_t_star / lambda : 0.0;
  doc["success_probability"] =
      checked_unit_interval(outcome.success_probability, "success probability");
  doc["fidelity_vs_target"] = checked_unit_interval(outcome.fidelity_vs_target, "fidelity");
  doc["output_size"] = outcome.spec.output_size();

  // one representative amplitude per branch of the collapsed state
  const auto& collapsed = outcome.collapsed;
  auto amp_at = [&](int atom) {
    const Complex a = collapsed.amps[Index{1} << atom];
    return ordered_json{{"re", a.real()}, {"im", a.imag()}};
  };
  ordered_json branches;
  branches["a_branch"] = amp_at(collapsed.n_atoms - 1);
  branches["n_block"] = amp_at(0);
  branches["m_block"] = amp_at(config.n - 1);
  if (config.t) branches["t_block"] = amp_at(config.n + config.m - 2);
  doc["branch_amplitudes"] = std::move(branches);

  if (config.emit_state) {
    ordered_json amps = ordered_json::array();
    const auto& corrected = outcome.corrected;
    for (Index x = 0; x < corrected.dim(); ++x) {
      const Complex a = corrected.amps[x];
      if (std::abs(a) < 1e-14) continue;
      amps.push_back(ordered_json{{"basis", basis_label(static_cast<std::uint64_t>(x),
                                                        corrected.n_atoms)},
                                  {"re", a.real()},
                                  {"im", a.imag()}});
    }
    doc["corrected_state"] = std::move(amps);
  }
  return doc.dump(2) + "\n";
}

NoiseResult cmd_noise(const NoiseConfig& config) {
  const Real lambda = config.physical.lambda_rad();
  if (lambda <= 0.0) throw std::invalid_argument("noise trace needs g > 0");
  const FusionSpec spec = config.t ? make_fuse3_spec(config.n, config.m, *config.t, lambda)
                                   : make_fuse2_spec(config.n, config.m, lambda);
  const CavityParams params = make_cavity_params(config.physical.g_rad(),
                                                 config.physical.delta_rad());

  NoiseParams noise;
  noise.kappa_minus = config.physical.kappa_minus_value();
  noise.kappa_z = config.physical.kappa_z_value();
  if (config.scope == NoiseScope::cavity_only) {
    std::vector<int> atoms;
    for (int i = 0; i < spec.inputs(); ++i) atoms.push_back(spec.total_atoms() - 1 - i);
    noise.apply_to = std::move(atoms);
  }

  if (config.points < 2) throw std::invalid_argument("noise grid needs at least 2 points");
  const Real t_star = spec.t_star_seconds();
  const Real t_max = config.t_max_factor * t_star;
  if (t_max <= 0.0) throw std::invalid_argument("noise window must be positive");
  std::vector<Real> grid;
  for (int i = 0; i < config.points; ++i) {
    grid.push_back(t_max * static_cast<Real>(i) / (config.points - 1));
  }
  if (t_star <= t_max &&
      std::none_of(grid.begin(), grid.end(), [&](Real t) { return std::abs(t - t_star) < 1e-15; })) {
    grid.push_back(t_star);
    std::sort(grid.begin(), grid.end());
  }

  const FidelityTrace trace = fidelity_trace(spec, params, noise, grid);

  std::ostringstream os;
  os << "# wfusion noise-trace v1\n";
  os << "t_seconds,lambda_t,fidelity_conditioned,fidelity_unconditioned,success_probability\n";
  NoiseResult result;
  for (std::size_t i = 0; i < trace.times.size(); ++i) {
    const Real t = trace.times[i];
    const Real fc = checked_unit_interval(trace.fidelity_conditioned[i], "conditioned fidelity");
    const Real fu = checked_unit_interval(trace.fidelity_unconditioned[i], "unconditioned fidelity");
    const Real p = checked_unit_interval(trace.success_probability[i], "success probability");
    os << fmt_num(t) << "," << fmt_num(lambda * t) << "," << fmt_num(fc) << "," << fmt_num(fu)
       << "," << fmt_num(p) << "\n";
    if (std::abs(t - t_star) < 1e-15) {
      result.fidelity_at_t_star = fc;
      result.success_probability_at_t_star = p;
    }
  }
  result.artifact = os.str();
  std::ostringstream sum;
  sum << "t_star_seconds=" << fmt_num(t_star) << " lambda_t_star=" << fmt_num(spec.lambda_t_star)
      << " conditioned_fidelity=" << fmt_num(result.fidelity_at_t_star)
      << " success_probability=" << fmt_num(result.success_probability_at_t_star);
  result.summary = sum.str();
  return result;
}

namespace {

StrategyClass parse_strategy(const std::string& s) {
  if (s == "two") return StrategyClass::two_fusion;
  if (s == "three") return StrategyClass::three_fusion;
  if (s == "both") return StrategyClass::both;
  throw std::invalid_argument("unknown strategy class: " + s);
}

std::map<int, Real> load_overlay(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open overlay file: " + path);
  std::map<int, Real> overlay;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ls(line);
    std::string n_field, v_field;
    if (!std::getline(ls, n_field, ',') || !std::getline(ls, v_field)) {
      throw std::runtime_error("malformed overlay line " + std::to_string(lineno));
    }
    if (lineno == 1 && n_field == "n") continue;  // header row
    try {
      const int n = std::stoi(n_field);
      const Real v = std::stod(v_field);
      if (!overlay.emplace(n, v).second) {
        throw std::runtime_error("duplicate overlay size " + std::to_string(n));
      }
    } catch (const std::invalid_argument&) {
      throw std::runtime_error("malformed overlay line " + std::to_string(lineno));
    } catch (const std::out_of_range&) {
      throw std::runtime_error("malformed overlay line " + std::to_string(lineno));
    }
  }
  return overlay;
}

}  // namespace

std::string cmd_cost(const CostConfig& config) {
  if (config.n_max < 3) throw std::invalid_argument("cost table needs n_max >= 3");
  const StrategyClass cls = parse_strategy(config.strategy);
  const CostTable table = optimal_cost_table(config.n_max, cls);
  std::map<int, Real> overlay;
  if (config.overlay_path) overlay = load_overlay(*config.overlay_path);

  if (config.format == Format::csv) {
    std::ostringstream os;
    os << "# wfusion cost-table v1\n";
    os << "n,cost,log10_cost,strategy,status";
    if (config.overlay_path) os << ",overlay";
    os << "\n";
    for (int n = 2; n <= config.n_max; ++n) {
      const auto& e = table.at(n);
      os << n << ",";
      if (e.reachable) {
        os << fmt_num(e.cost) << "," << fmt_num(std::log10(e.cost)) << ","
           << format_strategy(e.strategy) << ",ok";
      } else {
        os << ",,,unreachable";
      }
      if (config.overlay_path) {
        os << ",";
        if (auto it = overlay.find(n); it != overlay.end()) os << fmt_num(it->second);
      }
      os << "\n";
    }
    return os.str();
  }
  ordered_json doc;
  doc["schema_version"] = "wfusion/cost-table/v1";
  doc["strategy_class"] = config.strategy;
  doc["rows"] = ordered_json::array();
  for (int n = 2; n <= config.n_max; ++n) {
    const auto& e = table.at(n);
    ordered_json jr;
    jr["n"] = n;
    if (e.reachable) {
      jr["cost"] = e.cost;
      jr["log10_cost"] = std::log10(e.cost);
      jr["strategy"] = format_strategy(e.strategy);
      jr["status"] = "ok";
    } else {
      jr["cost"] = nullptr;
      jr["log10_cost"] = nullptr;
      jr["strategy"] = nullptr;
      jr["status"] = "unreachable";
    }
    if (auto it = overlay.find(n); it != overlay.end()) jr["overlay"] = it->second;
    doc["rows"].push_back(std::move(jr));
  }
  return doc.dump(2) + "\n";
}

ValidateResult cmd_validate(const ValidateConfig& config) {
  if (config.ratios.empty()) throw std::invalid_argument("validate needs at least one ratio");
  for (Real r : config.ratios) {
    if (r <= 1.0) throw std::invalid_argument("detuning ratios must exceed 1");
  }
  std::vector<Real> ratios = config.ratios;
  std::sort(ratios.begin(), ratios.end());

  const Real g = config.physical.g_rad();
  const Real lt_star = solve_time_two(config.n, config.m);
  const int total = config.n + config.m;
  const int targets[2] = {total - 2, total - 1};

  ordered_json doc;
  doc["schema_version"] = "wfusion/validate/v1";
  doc["n"] = config.n;
  doc["m"] = config.m;
  doc["g_khz"] = config.physical.g_khz;
  doc["lambda_t_star"] = lt_star;
  doc["rows"] = ordered_json::array();

  ValidateResult result;
  FusionSpec spec = make_fuse2_spec(config.n, config.m);
  const StateVector psi0 = fusion_initial_state(spec);
  const StateVector effective = evolve_in_cavity(psi0, targets, 1.0, lt_star);

  for (Real ratio : ratios) {
    Real error = 0.0;
    Real t_star = 0.0;
    int cutoff_used = config.fock_cutoff;
    if (g > 0.0) {
      const CavityParams params = make_cavity_params(g, ratio * g);
      t_star = lt_star / params.lambda;
      const FullModelResult full =
          full_model_evolve_auto(psi0, targets, params, t_star, config.fock_cutoff);
      cutoff_used = full.cutoff_used;
      const DensityMatrix reduced = trace_out_cavity(full.state);
      error = 1.0 - checked_unit_interval(fidelity(reduced, effective), "validation fidelity");
    }
    result.errors.push_back(error);
    ordered_json jr;
    jr["delta_ratio"] = ratio;
    jr["t_star_seconds"] = t_star;
    jr["error"] = error;
    jr["fock_cutoff_used"] = cutoff_used;
    doc["rows"].push_back(std::move(jr));
  }

  result.monotone = true;
  for (std::size_t i = 1; i < result.errors.size(); ++i) {
    if (result.errors[i] > result.errors[i - 1] + 1e-12) result.monotone = false;
  }
  doc["monotone_nonincreasing"] = result.monotone;
  result.artifact = doc.dump(2) + "\n";
  return result;
}

void write_artifact(const std::string& content, const std::string& path, std::ostream& fallback) {
  if (path.empty() || path == "-") {
    fallback << content;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open output file: " + path);
  out << content;
}

}  // namespace wfusion::cli
