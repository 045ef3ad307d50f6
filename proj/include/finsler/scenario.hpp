#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "finsler/flow_engine.hpp"
#include "finsler/pullback.hpp"
#include "finsler/report.hpp"
#include "finsler/structure.hpp"

namespace finsler::scenario {

/// Structure description as read from a config section.
///   kind = euclidean | conformal | riemannian | randers
///   conformal = <torus function>           (u, metric exp(2u) m)
///   m11 / m12 / m22 = <torus function>     (riemannian and randers alpha)
///   b1 / b2 = <torus function>, b_profile = <torus function>   (randers)
///   perturb_epsilon, perturb_profile       (optional quartic perturbation)
///   diffeo = <diffeo text>                 (optional analytic pullback)
struct StructureSpec {
  std::string kind = "euclidean";
  std::string conformal = "0";
  std::string m11 = "1", m12 = "0", m22 = "1";
  std::string b1 = "0", b2 = "0", b_profile = "1";
  double perturb_epsilon = 0.0;
  std::string perturb_profile = "1";
  std::string diffeo;

  StructurePtr build() const;  // ConfigError or ConvexityViolated
};

struct GridSpec {
  int n1 = 32, n2 = 32, ntheta = 32;
  bundle::SphereBundleGrid build() const;
};

struct PullbackSpec {
  bool enabled = false;
  pullback::PullbackMode mode = pullback::PullbackMode::BaseReduced;
  int store_every = 0;  // 0: endpoint only
};

struct OutputSpec {
  std::string dir;  // empty: <cli --out>/<name>
  bool diagnostics = true;
  bool snapshots = true;
  bool trajectory = true;
};

struct Scenario {
  std::string name;
  std::filesystem::path source;
  std::vector<std::string> checks;
  StructureSpec initial;
  /// kind = none | euclidean | initial | <structure kind>
  std::string background_kind = "none";
  StructureSpec background;
  GridSpec grid;
  flow::FlowConfig flow;
  PullbackSpec pullback;
  OutputSpec output;
  /// Check parameters, e.g. dual_route_n, conformal_tolerance.
  std::map<std::string, std::string> params;

  double param(const std::string& key, double fallback) const;
};

/// Known check names; unknown names in a config are a ConfigError.
const std::vector<std::string>& known_checks();

/// Parses an INI-style scenario. `overrides` are "section.key=value" and win
/// over the file. Throws ConfigError.
Scenario load_scenario(const std::filesystem::path& path, const std::vector<std::string>& overrides = {});
Scenario parse_scenario(const std::string& text, const std::vector<std::string>& overrides = {},
                        const std::filesystem::path& source = {});

/// [suite] scenarios = a.cfg, b.cfg  (paths relative to the suite file).
std::vector<std::filesystem::path> load_suite(const std::filesystem::path& path);

struct RunOptions {
  std::filesystem::path out_dir = "finsler_out";
  bool write_files = true;
};

/// Runs the flow and every declared check. BlowUp does not escape: the
/// outcome is recorded with status "blowup". ConfigError does escape.
report::ScenarioReport run_scenario(const Scenario& scenario, const RunOptions& options = {});

/// 0 pass, 1 check failure, 3 blow-up.
int exit_code(const report::ScenarioReport& r);
int exit_code(const std::vector<report::ScenarioReport>& reports);

}  // namespace finsler::scenario
