#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "commands.hpp"
#include "wfusion/fusion_spec.hpp"

using namespace wfusion;
using namespace wfusion::cli;
using nlohmann::json;

namespace {

bool contains_line(const std::string& text, const std::string& line) {
  std::istringstream in(text);
  std::string current;
  while (std::getline(in, current)) {
    if (current == line) return true;
  }
  return false;
}

struct TempFile {
  std::string path;
  TempFile(const std::string& name, const std::string& content) {
    path = (std::filesystem::temp_directory_path() / name).string();
    std::ofstream out(path);
    out << content;
  }
  ~TempFile() { std::remove(path.c_str()); }
};

}  // namespace

TEST_CASE("time-table artifact") {
  TimeTableConfig config;
  config.max_n = 6;
  config.max_m = 6;
  const std::string csv = cmd_time_table(config);
  CHECK(contains_line(csv, "# wfusion time-table v1"));
  CHECK(contains_line(csv, "kind,n,m,t,lambda_t,status"));
  CHECK(contains_line(csv, "fuse2,3,4,,0.886077123793,ok"));
  CHECK(contains_line(csv, "fuse2,4,3,,0.684719203002,ok"));
  CHECK(contains_line(csv, "fuse3,2,6,6,,infeasible"));
  CHECK(cmd_time_table(config) == csv);  // deterministic

  config.format = Format::json;
  const json doc = json::parse(cmd_time_table(config));
  CHECK(doc["schema_version"] == "wfusion/time-table/v1");
  bool found = false;
  for (const auto& row : doc["rows"]) {
    if (row["kind"] == "fuse3" && row["n"] == 2 && row["m"] == 6) {
      CHECK(row["status"] == "infeasible");
      CHECK(row["lambda_t"].is_null());
      found = true;
    }
    if (!row["lambda_t"].is_null()) {
      const double lt = row["lambda_t"].get<double>();
      CHECK(lt > 0.0);
      CHECK(lt < 1.6);
    }
  }
  CHECK(found);
}

TEST_CASE("fuse reports") {
  FuseConfig config;
  SUBCASE("two-input report") {
    const json doc = json::parse(cmd_fuse(config));
    CHECK(doc["schema_version"] == "wfusion/fuse-report/v1");
    CHECK(doc["protocol"] == "fuse2");
    CHECK(doc["success_probability"].get<double>() == doctest::Approx(0.5));
    CHECK(doc["fidelity_vs_target"].get<double>() == doctest::Approx(1.0));
    CHECK(doc["lambda_t_star"].get<double>() == doctest::Approx(0.7854).epsilon(1e-4));
    CHECK(!doc.contains("corrected_state"));
  }
  SUBCASE("three-input report with state dump") {
    config.n = 4;
    config.m = 4;
    config.t = 4;
    config.emit_state = true;
    const json doc = json::parse(cmd_fuse(config));
    CHECK(doc["protocol"] == "fuse3");
    CHECK(doc["success_probability"].get<double>() == doctest::Approx(0.25));
    CHECK(doc["lambda_t_star"].get<double>() == doctest::Approx(0.6981).epsilon(1e-4));
    CHECK(doc["output_size"] == 10);
    // corrected state: 10 single-excitation amplitudes
    CHECK(doc["corrected_state"].size() == 10);
    for (const auto& amp : doc["corrected_state"]) {
      const std::string basis = amp["basis"].get<std::string>();
      CHECK(std::count(basis.begin(), basis.end(), 'e') == 1);
    }
  }
  SUBCASE("infeasible shape propagates") {
    config.n = 2;
    config.m = 6;
    config.t = 6;
    CHECK_THROWS_AS(cmd_fuse(config), infeasible_time_error);
  }
}

TEST_CASE("noise artifact") {
  NoiseConfig config;
  config.points = 5;
  SUBCASE("zero noise gives unit fidelity at t*") {
    config.physical.kappa_minus = 0.0;
    config.physical.kappa_z = 0.0;
    const NoiseResult result = cmd_noise(config);
    CHECK(contains_line(result.artifact, "# wfusion noise-trace v1"));
    CHECK(contains_line(
        result.artifact,
        "t_seconds,lambda_t,fidelity_conditioned,fidelity_unconditioned,success_probability"));
    CHECK(result.fidelity_at_t_star == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(result.summary.find("conditioned_fidelity=") != std::string::npos);
  }
  SUBCASE("doubling T_r roughly halves the infidelity at t*") {
    const Real f1 = cmd_noise(config).fidelity_at_t_star;
    NoiseConfig slower = config;
    slower.physical.tr_seconds = 2.0 * config.physical.tr_seconds;
    const Real f2 = cmd_noise(slower).fidelity_at_t_star;
    const Real ratio = (1.0 - f1) / (1.0 - f2);
    CHECK(ratio > 2.0 / 1.5);
    CHECK(ratio < 2.0 * 1.5);
  }
  SUBCASE("deterministic artifacts") {
    const NoiseResult a = cmd_noise(config);
    const NoiseResult b = cmd_noise(config);
    CHECK(a.artifact == b.artifact);
    CHECK(a.summary == b.summary);
  }
}

TEST_CASE("cost artifact") {
  CostConfig config;
  config.n_max = 4;
  SUBCASE("two-fusion rows") {
    config.strategy = "two";
    const std::string csv = cmd_cost(config);
    CHECK(contains_line(csv, "# wfusion cost-table v1"));
    CHECK(contains_line(csv, "n,cost,log10_cost,strategy,status"));
    CHECK(contains_line(csv, "3,4,0.602059991328,(W2*W2),ok"));
    CHECK(contains_line(csv, "4,10,1,(W2*(W2*W2)),ok"));
  }
  SUBCASE("three-fusion rows mark odd sizes unreachable") {
    config.strategy = "three";
    const std::string csv = cmd_cost(config);
    CHECK(contains_line(csv, "4,12,1.07918124605,(W2*W2*W2),ok"));
    CHECK(contains_line(csv, "3,,,,unreachable"));
  }
  SUBCASE("both prefers the cheaper class") {
    config.strategy = "both";
    const std::string csv = cmd_cost(config);
    CHECK(contains_line(csv, "4,10,1,(W2*(W2*W2)),ok"));
  }
  SUBCASE("overlay merges by size") {
    TempFile overlay("wfusion_overlay_ok.csv", "n,log10_cost\n3,0.9\n4,1.8\n");
    config.overlay_path = overlay.path;
    const std::string csv = cmd_cost(config);
    CHECK(contains_line(csv, "n,cost,log10_cost,strategy,status,overlay"));
    CHECK(contains_line(csv, "3,4,0.602059991328,(W2*W2),ok,0.9"));
  }
  SUBCASE("malformed overlay is rejected") {
    TempFile overlay("wfusion_overlay_bad.csv", "3;0.9\n");
    config.overlay_path = overlay.path;
    CHECK_THROWS_AS(cmd_cost(config), std::runtime_error);
  }
}

TEST_CASE("validate artifact") {
  ValidateConfig config;
  SUBCASE("single-ratio error stays below the working bound") {
    config.ratios = {10.0};
    const ValidateResult result = cmd_validate(config);
    CHECK(result.errors.size() == 1);
    CHECK(result.errors[0] < 0.02);
    CHECK(result.monotone);
    const json doc = json::parse(result.artifact);
    CHECK(doc["schema_version"] == "wfusion/validate/v1");
    CHECK(doc["rows"][0]["fock_cutoff_used"].get<int>() >= 3);
  }
  SUBCASE("g = 0 gives exactly zero error") {
    config.ratios = {5.0, 10.0};
    config.physical.g_khz = 0.0;
    const ValidateResult result = cmd_validate(config);
    for (Real e : result.errors) CHECK(e == 0.0);
    CHECK(result.monotone);
  }
}
