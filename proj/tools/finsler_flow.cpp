// finsler-flow: run scenarios, verify suites, dump sampled fields.

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <future>
#include <set>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "finsler/errors.hpp"
#include "finsler/flow_engine.hpp"
#include "finsler/oracles.hpp"
#include "finsler/report.hpp"
#include "finsler/scenario.hpp"

namespace fs = std::filesystem;
using namespace finsler;

namespace {

void print_summary(const report::ScenarioReport& r) {
  std::printf("%-24s %-7s steps=%ld dt=%.3g wall=%.1fs\n", r.name.c_str(), r.status.c_str(), r.steps, r.dt,
              r.wall_seconds);
  for (const auto& c : r.checks) {
    std::printf("  %-20s %-8s value=%.6g", c.name.c_str(), c.verdict.c_str(), c.value);
    if (c.tolerance) std::printf(" %s %.3g", c.comparison.c_str(), *c.tolerance);
    std::printf("\n");
  }
  if (r.blowup) std::printf("  blow-up: %s\n", r.blowup->message.c_str());
}

int run(const fs::path& cfg, const fs::path& out, const std::vector<std::string>& sets) {
  auto sc = scenario::load_scenario(cfg, sets);
  scenario::RunOptions opt;
  opt.out_dir = out;
  auto rep = scenario::run_scenario(sc, opt);
  fs::path dir = sc.output.dir.empty() ? out / sc.name : fs::path(sc.output.dir);
  report::write_json(dir / "report.json", {rep}, report::fingerprint());
  print_summary(rep);
  std::printf("report: %s\n", (dir / "report.json").string().c_str());
  return scenario::exit_code(rep);
}

int verify(const fs::path& suite, const fs::path& out, const std::vector<std::string>& sets, bool parallel) {
  auto paths = scenario::load_suite(suite);
  std::vector<scenario::Scenario> scenarios;
  std::set<std::string> names;
  for (const auto& p : paths) {
    scenarios.push_back(scenario::load_scenario(p, sets));
    if (!names.insert(scenarios.back().name).second)
      throw ConfigError("scenario name '" + scenarios.back().name + "' appears twice in the suite");
  }
  scenario::RunOptions opt;
  opt.out_dir = out;
  std::vector<report::ScenarioReport> reports;
  if (parallel) {
    std::vector<std::future<report::ScenarioReport>> jobs;
    for (const auto& sc : scenarios)
      jobs.push_back(std::async(std::launch::async, [&sc, &opt] { return scenario::run_scenario(sc, opt); }));
    for (auto& j : jobs) reports.push_back(j.get());
  } else {
    for (const auto& sc : scenarios) reports.push_back(scenario::run_scenario(sc, opt));
  }
  for (const auto& r : reports) print_summary(r);
  report::write_json(out / "report.json", reports, report::fingerprint());
  std::printf("report: %s\n", (out / "report.json").string().c_str());
  return scenario::exit_code(reports);
}

int dump_field(const fs::path& cfg, const fs::path& output, const std::vector<std::string>& sets,
               const std::vector<std::string>& what) {
  auto sc = scenario::load_scenario(cfg, sets);
  auto grid = sc.grid.build();
  auto phi = bundle::sample_structure(*sc.initial.build(), grid);
  bundle::fiber_bandlimit(grid, phi.values(), sc.flow.effective_bandlimit());
  flow::FlowState state(phi, 0.0, sc.flow.fiber_scheme);
  std::vector<bundle::ScalarBundleField> fields;
  std::vector<std::string> names;
  std::unique_ptr<flow::BackgroundMetric> bg;
  auto background = [&]() -> const flow::BackgroundMetric& {
    if (!bg) {
      if (sc.background_kind == "none") throw ConfigError("field needs [background] kind");
      bg = sc.background_kind == "initial"
               ? std::make_unique<flow::BackgroundMetric>(phi, sc.flow.fiber_scheme)
               : std::make_unique<flow::BackgroundMetric>(*sc.background.build(), grid, sc.flow.fiber_scheme);
    }
    return *bg;
  };
  for (const auto& w : what) {
    if (w == "phi") {
      fields.push_back(phi);
    } else if (w == "ric") {
      fields.push_back(flow::ricci_field(state));
    } else if (w == "ricci_rhs") {
      fields.push_back(flow::ricci_rhs(state));
    } else if (w == "deturck_rhs") {
      fields.push_back(flow::deturck_rhs(state, background()));
    } else if (w == "xi1" || w == "xi2") {
      auto xi = flow::deturck_vector_field(state, background());
      fields.emplace_back(grid, 0, xi.xi[w == "xi1" ? 0 : 1]);
    } else {
      throw ConfigError("unknown field '" + w + "' (phi, ric, ricci_rhs, deturck_rhs, xi1, xi2)");
    }
    names.push_back(w);
  }
  std::vector<const bundle::ScalarBundleField*> ptrs;
  for (const auto& f : fields) ptrs.push_back(&f);
  if (output.empty() || output == "-") {
    bundle::write_fields_csv(std::cout, ptrs, names);
  } else {
    if (output.has_parent_path()) fs::create_directories(output.parent_path());
    bundle::write_fields_csv(output.string(), ptrs, names);
  }
  return 0;
}

// Conformal-factor reference solution: sup|u| before and after, as JSON.
int reference(const std::string& u0_text, double T, int n1, int n2, double cfl, double dt) {
  auto u0 = TorusFunction::parse(u0_text, 2);
  auto sol = oracles::conformal_reference(u0, T, n1, n2, cfl, dt);
  double before = 0.0, after = 0.0;
  for (int i = 0; i < n1; ++i)
    for (int j = 0; j < n2; ++j) {
      double x[2] = {sol.h(0) * i, sol.h(1) * j};
      before = std::max(before, std::abs(u0(std::span<const double>(x, 2))));
      after = std::max(after, std::abs(sol.at(i, j)));
    }
  std::printf("{\"u0\": \"%s\", \"T\": %.17g, \"n1\": %d, \"n2\": %d, \"steps\": %ld, "
              "\"sup_u0\": %.17g, \"sup_u\": %.17g, \"decay\": %.17g}\n",
              u0_text.c_str(), sol.t, n1, n2, sol.steps, before, after, before / after);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Finsler Ricci and Ricci-DeTurck flow on the unit-circle bundle of the 2-torus"};
  app.require_subcommand(1);

  fs::path cfg, out = "finsler_out", output;
  std::vector<std::string> sets;
  std::vector<std::string> what{"phi"};
  bool parallel = false;

  auto* run_cmd = app.add_subcommand("run", "run one scenario and write diagnostics, snapshots and report");
  run_cmd->add_option("scenario", cfg, "scenario config")->required();
  run_cmd->add_option("--out", out, "output directory");
  run_cmd->add_option("--set", sets, "override section.key=value")->allow_extra_args(false);

  auto* verify_cmd = app.add_subcommand("verify", "run every scenario of a suite");
  verify_cmd->add_option("suite", cfg, "suite config")->required();
  verify_cmd->add_option("--out", out, "output directory");
  verify_cmd->add_option("--set", sets, "override applied to every scenario")->allow_extra_args(false);
  verify_cmd->add_flag("--parallel", parallel, "run scenarios concurrently");

  auto* dump_cmd = app.add_subcommand("dump-field", "sample the initial structure and derived fields to CSV");
  dump_cmd->add_option("scenario", cfg, "scenario config")->required();
  dump_cmd->add_option("--output,-o", output, "CSV path (default stdout)");
  dump_cmd->add_option("--field", what, "phi, ric, ricci_rhs, deturck_rhs, xi1, xi2")->delimiter(',');
  dump_cmd->add_option("--set", sets, "override section.key=value")->allow_extra_args(false);

  std::string u0_text;
  double ref_T = 0.05, ref_cfl = 0.1, ref_dt = 0.0;
  int ref_n1 = 64, ref_n2 = 8;
  auto* ref_cmd = app.add_subcommand("reference", "solve the conformal-factor flow d_t u = exp(-2u) Lap u");
  ref_cmd->add_option("--u0", u0_text, "initial u, torus function text")->required();
  ref_cmd->add_option("--time,-T", ref_T, "final time");
  ref_cmd->add_option("--n1", ref_n1, "grid points along x1");
  ref_cmd->add_option("--n2", ref_n2, "grid points along x2");
  ref_cmd->add_option("--cfl", ref_cfl, "dt = cfl min(h)^2");
  ref_cmd->add_option("--dt", ref_dt, "fixed step (overrides cfl)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*run_cmd) return run(cfg, out, sets);
    if (*verify_cmd) return verify(cfg, out, sets, parallel);
    if (*dump_cmd) return dump_field(cfg, output, sets, what);
    if (*ref_cmd) return reference(u0_text, ref_T, ref_n1, ref_n2, ref_cfl, ref_dt);
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "%s\n", e.what());
    return 2;
  } catch (const ConvexityViolated& e) {
    std::fprintf(stderr, "ConfigError: %s\n", e.what());
    return 2;
  } catch (const BadResolution& e) {
    std::fprintf(stderr, "ConfigError: %s\n", e.what());
    return 2;
  } catch (const BlowUp& e) {
    std::fprintf(stderr, "%s\n", e.what());
    return 3;
  } catch (const CFLViolation& e) {
    std::fprintf(stderr, "ConfigError: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
