#include "finsler/scenario.hpp"

#include <algorithm>
#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <chrono>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "finsler/errors.hpp"
#include "finsler/oracles.hpp"

namespace finsler::scenario {

namespace pt = boost::property_tree;
namespace fs = std::filesystem;
using bundle::ScalarBundleField;
using bundle::SphereBundleGrid;
using report::CheckResult;

namespace {

std::string trim(std::string s) {
  auto ws = [](unsigned char c) { return std::isspace(c); };
  s.erase(s.begin(), std::find_if_not(s.begin(), s.end(), ws));
  s.erase(std::find_if_not(s.rbegin(), s.rend(), ws).base(), s.end());
  return s;
}

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

const std::map<std::string, std::set<std::string>>& schema() {
  static const std::set<std::string> structure_keys = {
      "kind", "conformal", "m11", "m12", "m22", "b1", "b2", "b_profile", "perturb_epsilon", "perturb_profile", "diffeo"};
  static const std::map<std::string, std::set<std::string>> s = {
      {"scenario", {"name", "checks"}},
      {"initial", structure_keys},
      {"background", structure_keys},
      {"grid", {"n1", "n2", "ntheta"}},
      {"flow",
       {"gauge", "scheme", "dt", "cfl", "duration", "cadence", "snapshot_every", "fiber_scheme", "fiber_bandlimit"}},
      {"pullback", {"enabled", "mode", "store_every"}},
      {"output", {"dir", "diagnostics", "snapshots", "trajectory"}},
      {"checks", {}},  // free-form check parameters
  };
  return s;
}

template <class T>
T get(const pt::ptree& tree, const std::string& path, T fallback) {
  auto node = tree.get_optional<std::string>(path);
  if (!node) return fallback;
  std::string text = trim(*node);
  if constexpr (std::is_same_v<T, std::string>) {
    return text;
  } else if constexpr (std::is_same_v<T, bool>) {
    if (text == "true" || text == "yes" || text == "on" || text == "1") return true;
    if (text == "false" || text == "no" || text == "off" || text == "0") return false;
    throw ConfigError(path + ": expected a boolean, got '" + text + "'");
  } else {
    std::istringstream in(text);
    T v{};
    in >> v;
    if (in.fail() || !in.eof()) throw ConfigError(path + ": cannot parse '" + text + "'");
    return v;
  }
}

StructureSpec read_structure(const pt::ptree& tree, const std::string& section) {
  StructureSpec s;
  auto key = [&](const char* k) { return section + "." + k; };
  s.kind = get<std::string>(tree, key("kind"), s.kind);
  s.conformal = get<std::string>(tree, key("conformal"), s.conformal);
  s.m11 = get<std::string>(tree, key("m11"), s.m11);
  s.m12 = get<std::string>(tree, key("m12"), s.m12);
  s.m22 = get<std::string>(tree, key("m22"), s.m22);
  s.b1 = get<std::string>(tree, key("b1"), s.b1);
  s.b2 = get<std::string>(tree, key("b2"), s.b2);
  s.b_profile = get<std::string>(tree, key("b_profile"), s.b_profile);
  s.perturb_epsilon = get<double>(tree, key("perturb_epsilon"), s.perturb_epsilon);
  s.perturb_profile = get<std::string>(tree, key("perturb_profile"), s.perturb_profile);
  s.diffeo = get<std::string>(tree, key("diffeo"), s.diffeo);
  return s;
}

void apply_override(pt::ptree& tree, const std::string& assignment) {
  auto eq = assignment.find('=');
  if (eq == std::string::npos) throw ConfigError("override '" + assignment + "' is not key=value");
  std::string key = trim(assignment.substr(0, eq));
  auto dot = key.find('.');
  if (dot == std::string::npos) throw ConfigError("override key '" + key + "' needs a section (section.key)");
  tree.put(pt::ptree::path_type(key, '.'), trim(assignment.substr(eq + 1)));
}

void validate_keys(const pt::ptree& tree) {
  for (const auto& [section, body] : tree) {
    auto it = schema().find(section);
    if (it == schema().end()) throw ConfigError("unknown section [" + section + "]");
    if (section == "checks") continue;
    for (const auto& [key, value] : body)
      if (!it->second.count(key)) throw ConfigError("unknown key '" + key + "' in [" + section + "]");
  }
}

flow::Gauge parse_gauge(const std::string& s) {
  if (s == "direct") return flow::Gauge::Direct;
  if (s == "deturck") return flow::Gauge::DeTurck;
  throw ConfigError("flow.gauge must be direct or deturck, got '" + s + "'");
}

flow::Scheme parse_scheme(const std::string& s) {
  if (s == "euler") return flow::Scheme::Euler;
  if (s == "rk4") return flow::Scheme::RK4;
  throw ConfigError("flow.scheme must be euler or rk4, got '" + s + "'");
}

const char* gauge_name(flow::Gauge g) { return g == flow::Gauge::Direct ? "direct" : "deturck"; }
const char* scheme_name(flow::Scheme s) { return s == flow::Scheme::Euler ? "euler" : "rk4"; }

}  // namespace

StructurePtr StructureSpec::build() const {
  auto fn = [](const std::string& text) { return TorusFunction::parse(text, 2); };
  RiemannianSpec alpha;
  alpha.dim = 2;
  alpha.conformal = fn(conformal);
  if (m11 != "1" || m12 != "0" || m22 != "1") alpha.entries = {fn(m11), fn(m12), fn(m22)};
  StructurePtr s;
  if (kind == "euclidean") {
    s = make_euclidean(2);
  } else if (kind == "conformal" || kind == "riemannian") {
    s = make_riemannian(alpha);
  } else if (kind == "randers") {
    RandersSpec r;
    r.alpha = alpha;
    r.b_components = {fn(b1), fn(b2)};
    r.b_profile = fn(b_profile);
    s = make_randers(std::move(r));
  } else {
    throw ConfigError("unknown structure kind '" + kind + "'");
  }
  if (perturb_epsilon != 0.0) s = make_scalar_perturbation(s, perturb_epsilon, fn(perturb_profile));
  if (!diffeo.empty()) s = make_pulled_back(s, AnalyticDiffeo::parse(diffeo, 2));
  return s;
}

SphereBundleGrid GridSpec::build() const { return bundle::build_grid(n1, n2, ntheta); }

double Scenario::param(const std::string& key, double fallback) const {
  auto it = params.find(key);
  if (it == params.end()) return fallback;
  try {
    std::size_t used = 0;
    double v = std::stod(it->second, &used);
    if (used != it->second.size()) throw std::invalid_argument("trailing");
    return v;
  } catch (const std::exception&) {
    throw ConfigError("checks." + key + ": cannot parse '" + it->second + "'");
  }
}

const std::vector<std::string>& known_checks() {
  static const std::vector<std::string> names = {
      "stationary",      "parabolic",   "no_blowup",       "dual_route",          "xi_zero",
      "closure",         "closure_report", "tensor_route", "conformal_reference", "ricci_decay",
      "pullback_direct", "self_background"};
  return names;
}

Scenario parse_scenario(const std::string& text, const std::vector<std::string>& overrides, const fs::path& source) {
  pt::ptree tree;
  try {
    std::istringstream in(text);
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError(std::string("malformed config: ") + e.message() + " (line " + std::to_string(e.line()) + ")");
  }
  for (const auto& o : overrides) apply_override(tree, o);
  validate_keys(tree);

  Scenario s;
  s.source = source;
  s.name = get<std::string>(tree, "scenario.name", source.empty() ? "scenario" : source.stem().string());
  if (s.name.empty() || s.name.find_first_of("/\\ ") != std::string::npos)
    throw ConfigError("scenario.name must be a non-empty word");
  s.checks = split_list(get<std::string>(tree, "scenario.checks", ""));
  std::set<std::string> seen;
  for (const auto& c : s.checks) {
    if (std::find(known_checks().begin(), known_checks().end(), c) == known_checks().end())
      throw ConfigError("unknown check '" + c + "'");
    if (!seen.insert(c).second) throw ConfigError("check '" + c + "' listed twice");
  }

  s.initial = read_structure(tree, "initial");
  s.background_kind = get<std::string>(tree, "background.kind", "none");
  if (s.background_kind != "none" && s.background_kind != "initial") s.background = read_structure(tree, "background");

  s.grid.n1 = get<int>(tree, "grid.n1", s.grid.n1);
  s.grid.n2 = get<int>(tree, "grid.n2", s.grid.n2);
  s.grid.ntheta = get<int>(tree, "grid.ntheta", s.grid.ntheta);

  auto& f = s.flow;
  f.gauge = parse_gauge(get<std::string>(tree, "flow.gauge", "direct"));
  f.scheme = parse_scheme(get<std::string>(tree, "flow.scheme", "rk4"));
  f.dt = get<double>(tree, "flow.dt", f.dt);
  f.cfl = get<double>(tree, "flow.cfl", f.cfl);
  f.duration = get<double>(tree, "flow.duration", f.duration);
  f.cadence = get<int>(tree, "flow.cadence", f.cadence);
  f.snapshot_every = get<int>(tree, "flow.snapshot_every", f.snapshot_every);
  auto fiber = get<std::string>(tree, "flow.fiber_scheme", "spectral");
  if (fiber == "spectral") f.fiber_scheme = bundle::FiberScheme::Spectral;
  else if (fiber == "fd4") f.fiber_scheme = bundle::FiberScheme::FD4;
  else throw ConfigError("flow.fiber_scheme must be spectral or fd4");
  auto band = get<std::string>(tree, "flow.fiber_bandlimit", "auto");
  if (band == "auto") f.fiber_bandlimit = flow::FlowConfig::kAutoBandlimit;
  else if (band == "none") f.fiber_bandlimit = flow::FlowConfig::kNoBandlimit;
  else f.fiber_bandlimit = get<int>(tree, "flow.fiber_bandlimit", 0);
  f.validate();

  s.pullback.enabled = get<bool>(tree, "pullback.enabled", false);
  auto mode = get<std::string>(tree, "pullback.mode", "base_reduced");
  if (mode == "base_reduced") s.pullback.mode = pullback::PullbackMode::BaseReduced;
  else if (mode == "horizontal_lift") s.pullback.mode = pullback::PullbackMode::HorizontalLift;
  else throw ConfigError("pullback.mode must be base_reduced or horizontal_lift");
  s.pullback.store_every = get<int>(tree, "pullback.store_every", 0);
  if (s.pullback.store_every < 0) throw ConfigError("pullback.store_every must be >= 0");

  s.output.dir = get<std::string>(tree, "output.dir", "");
  s.output.diagnostics = get<bool>(tree, "output.diagnostics", true);
  s.output.snapshots = get<bool>(tree, "output.snapshots", true);
  s.output.trajectory = get<bool>(tree, "output.trajectory", true);

  if (auto checks = tree.get_child_optional("checks"))
    for (const auto& [key, value] : *checks) s.params[key] = trim(value.data());

  if (f.gauge == flow::Gauge::DeTurck && s.background_kind == "none")
    throw ConfigError("the deturck gauge needs [background] kind");
  if (s.pullback.enabled && f.gauge != flow::Gauge::DeTurck) throw ConfigError("pullback needs the deturck gauge");
  bool needs_pullback = std::find(s.checks.begin(), s.checks.end(), "pullback_direct") != s.checks.end();
  if (needs_pullback && !s.pullback.enabled) throw ConfigError("check pullback_direct needs pullback.enabled = true");
  // Structures and grid are resolved here so config errors surface before any run.
  (void)s.grid.build();
  (void)s.initial.build();
  if (s.background_kind != "none" && s.background_kind != "initial") (void)s.background.build();
  return s;
}

Scenario load_scenario(const fs::path& path, const std::vector<std::string>& overrides) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open scenario file " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_scenario(buf.str(), overrides, path);
}

std::vector<fs::path> load_suite(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open suite file " + path.string());
  pt::ptree tree;
  try {
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError(std::string("malformed suite: ") + e.message());
  }
  auto list = split_list(get<std::string>(tree, "suite.scenarios", ""));
  if (list.empty()) throw ConfigError("suite lists no scenarios");
  std::vector<fs::path> out;
  for (const auto& item : list) out.push_back(path.parent_path() / item);
  return out;
}

namespace {

struct Context {
  const Scenario& sc;
  SphereBundleGrid grid;
  StructurePtr initial;
  std::unique_ptr<flow::BackgroundMetric> background;
  std::optional<flow::FlowResult> result;
  std::optional<ScalarBundleField> pulled_back;
  std::optional<pullback::DiffeoTrajectory> trajectory;
  bool blew_up = false;
};

ScalarBundleField bandlimited_sample(const Context& c) {
  auto phi = bundle::sample_structure(*c.initial, c.grid);
  bundle::fiber_bandlimit(c.grid, phi.values(), c.sc.flow.effective_bandlimit());
  return phi;
}

flow::FlowResult direct_run(const Context& c) {
  auto cfg = c.sc.flow;
  cfg.gauge = flow::Gauge::Direct;
  cfg.record_xi = flow::XiRecording::None;
  cfg.snapshot_every = 0;
  cfg.cadence = std::max(cfg.cadence, 1);
  return flow::run_flow(*c.initial, c.grid, cfg);
}

CheckResult upper(const std::string& name, double value, double tol, std::string detail = {}) {
  return {name, value <= tol ? "pass" : "fail", value, tol, "<=", std::move(detail)};
}

CheckResult not_evaluated(const std::string& name) {
  return {name, "fail", std::nan(""), std::nullopt, "", "not evaluated: flow blew up"};
}

template <class F>
double max_over(const std::vector<flow::DiagnosticsRow>& rows, F f) {
  double m = 0.0;
  for (const auto& r : rows) m = std::max(m, f(r));
  return m;
}

CheckResult run_check(const std::string& name, Context& c) {
  const auto& sc = c.sc;
  if (name == "dual_route") {
    // Initial state only, on a fine verification grid: the routes agree to O(h^4).
    const int n = static_cast<int>(sc.param("dual_route_n", 128));
    SphereBundleGrid fine = bundle::build_grid(n, n, sc.grid.ntheta);
    flow::FlowState state(bundle::sample_structure(*c.initial, fine), 0.0, sc.flow.fiber_scheme);
    StructurePtr bgs = sc.background_kind == "none" || sc.background_kind == "initial" ? make_euclidean(2)
                                                                                       : sc.background.build();
    flow::BackgroundMetric bg(*bgs, fine, sc.flow.fiber_scheme);
    auto a = flow::deturck_rhs(state, bg);
    auto b = flow::deturck_rhs_expanded(state, bg);
    return upper(name, bundle::sup_difference(a, b.rhs), sc.param("dual_route_tolerance", 1e-5),
                 "initial state on " + std::to_string(n) + "x" + std::to_string(n) + "x" +
                     std::to_string(sc.grid.ntheta));
  }
  if (c.blew_up) {
    if (name == "no_blowup") return {name, "fail", 0.0, std::nullopt, "", "flow blew up"};
    if (name != "parabolic") return not_evaluated(name);
  }
  const auto& res = *c.result;
  const auto& rows = res.diagnostics;
  if (name == "no_blowup")
    return {name, "pass", res.final_phi ? res.steps * 1.0 : 0.0, std::nullopt, "", "completed all steps"};
  if (name == "parabolic") {
    double lo = INFINITY;
    for (const auto& r : rows) lo = std::min(lo, r.parabolicity_margin);
    return {name, lo > 0.0 ? "pass" : "fail", lo, 0.0, ">", "min margin over recorded steps"};
  }
  if (name == "stationary")
    return upper(name, bundle::sup_difference(*res.final_phi, res.snapshots.front().phi),
                 sc.param("stationary_tolerance", 1e-12), "sup |phi(T) - phi(0)|");
  if (name == "xi_zero")
    return upper(name, max_over(rows, [](const auto& r) { return r.xi_sup; }), sc.param("xi_tolerance", 1e-10),
                 "max over recorded steps");
  if (name == "closure")
    return upper(name, max_over(rows, [](const auto& r) { return r.closure; }),
                 sc.param("closure_tolerance", 1e-7), "fiber oscillation of g");
  if (name == "closure_report")
    return {name, "reported", max_over(rows, [](const auto& r) { return r.closure; }), std::nullopt, "",
            "fiber oscillation of g; no tolerance"};
  if (name == "tensor_route") {
    double worst = 0.0;
    for (const auto* phi : {&res.snapshots.front().phi, &*res.final_phi}) {
      flow::FlowState st(*phi, 0.0, sc.flow.fiber_scheme);
      auto scalar = flow::ricci_rhs(st);
      auto tensor = flow::tensor_route_rhs(st);
      worst = std::max(worst, bundle::sup_difference(scalar, tensor) / std::max(1.0, scalar.sup_norm()));
    }
    return upper(name, worst, sc.param("tensor_route_tolerance", 1e-8), "initial and final states, relative");
  }
  if (name == "conformal_reference") {
    if (sc.initial.kind != "conformal")
      throw ConfigError("check conformal_reference needs initial.kind = conformal");
    auto u0 = TorusFunction::parse(sc.initial.conformal, 2);
    bool x2_free = std::all_of(u0.modes().begin(), u0.modes().end(), [](const auto& m) { return m.wave[1] == 0; });
    const int rn = static_cast<int>(sc.param("reference_n", 256));
    auto ref = oracles::conformal_reference(u0, sc.flow.duration, rn, x2_free ? 8 : rn, sc.param("reference_cfl", 0.1));
    double err = 0.0;
    const auto& phi = *res.final_phi;
    for (std::size_t m = 0; m < phi.size(); ++m) {
      auto ijk = c.grid.coords(m);
      double u = ref.interpolate(c.grid.x1(ijk[0]), c.grid.x2(ijk[1]));
      err = std::max(err, std::abs(phi[m] - std::exp(2 * u)));
    }
    return upper(name, err, sc.param("conformal_tolerance", 1e-3),
                 "sup |F^2(T) - exp(2u(T))| against a " + std::to_string(rn) + "-point reference");
  }
  if (name == "ricci_decay") {
    bool monotone = true;
    for (std::size_t i = 1; i < rows.size(); ++i)
      if (rows[i].sup_ric > rows[i - 1].sup_ric * (1 + 1e-12)) monotone = false;
    double factor = rows.back().sup_ric > 0 ? rows.front().sup_ric / rows.back().sup_ric : INFINITY;
    double want = sc.param("decay_factor", 1.0);
    bool ok = monotone && factor >= want;
    return {name, ok ? "pass" : "fail", factor, want, ">=",
            monotone ? "sup|Ric| monotone; value is initial/final" : "sup|Ric| increased between recorded steps"};
  }
  if (name == "pullback_direct") {
    auto direct = direct_run(c);
    return upper(name, bundle::sup_difference(*c.pulled_back, *direct.final_phi),
                 sc.param("pullback_tolerance", 5e-3), "sup |Phi_T^* F~^2(T) - F^2(T)|");
  }
  if (name == "self_background") {
    auto cfg = sc.flow;
    cfg.gauge = flow::Gauge::DeTurck;
    cfg.record_xi = flow::XiRecording::None;
    flow::BackgroundMetric self(bandlimited_sample(c), sc.flow.fiber_scheme);
    auto det = flow::run_flow(*c.initial, c.grid, cfg, &self);
    auto direct = direct_run(c);
    return upper(name, bundle::sup_difference(*det.final_phi, *direct.final_phi),
                 sc.param("self_background_tolerance", 1e-6), "deturck with background = initial vs direct");
  }
  throw ConfigError("unknown check '" + name + "'");
}

void write_outputs(Context& c, const fs::path& dir, report::ScenarioReport& rep) {
  fs::create_directories(dir);
  const auto& sc = c.sc;
  const auto& res = *c.result;
  if (sc.output.diagnostics) {
    auto p = dir / "diagnostics.csv";
    std::ofstream out(p);
    flow::write_diagnostics_csv(out, res.diagnostics);
    rep.outputs["diagnostics"] = p.string();
  }
  if (sc.output.snapshots && !res.snapshots.empty()) {
    std::vector<const ScalarBundleField*> fields;
    std::vector<std::string> names;
    char label[64];
    for (const auto& s : res.snapshots) {
      std::snprintf(label, sizeof label, "phi_t%.6g", s.t);
      fields.push_back(&s.phi);
      names.push_back(label);
    }
    if (c.pulled_back) {
      fields.push_back(&*c.pulled_back);
      names.push_back("pulled_back");
    }
    auto p = dir / "snapshots.csv";
    bundle::write_fields_csv(p.string(), fields, names);
    rep.outputs["snapshots"] = p.string();
  }
  if (sc.output.trajectory && c.trajectory) {
    auto p = dir / "trajectory.csv";
    std::ofstream out(p);
    pullback::write_trajectory_csv(out, *c.trajectory);
    rep.outputs["trajectory"] = p.string();
  }
}

}  // namespace

report::ScenarioReport run_scenario(const Scenario& sc, const RunOptions& options) {
  const auto start = std::chrono::steady_clock::now();
  Context c{sc, sc.grid.build(), sc.initial.build(), nullptr, std::nullopt, std::nullopt, std::nullopt, false};
  report::ScenarioReport rep;
  rep.name = sc.name;
  rep.source = sc.source.string();
  rep.gauge = gauge_name(sc.flow.gauge);
  rep.scheme = scheme_name(sc.flow.scheme);
  rep.grid = {sc.grid.n1, sc.grid.n2, sc.grid.ntheta};

  if (sc.background_kind == "initial") {
    c.background = std::make_unique<flow::BackgroundMetric>(bandlimited_sample(c), sc.flow.fiber_scheme);
  } else if (sc.background_kind != "none") {
    c.background = std::make_unique<flow::BackgroundMetric>(*sc.background.build(), c.grid, sc.flow.fiber_scheme);
  }

  auto cfg = sc.flow;
  if (sc.pullback.enabled)
    cfg.record_xi = sc.pullback.mode == pullback::PullbackMode::BaseReduced ? flow::XiRecording::Base
                                                                             : flow::XiRecording::Full;
  try {
    c.result = flow::run_flow(*c.initial, c.grid, cfg, c.background.get());
  } catch (const flow::FlowBlowUp& e) {
    c.result = e.partial();
    c.blew_up = true;
    rep.blowup = report::BlowUpInfo{e.what(), e.node(), e.time()};
  }
  rep.steps = c.result->steps;
  rep.dt = c.result->dt;
  rep.final_time = c.result->snapshots.empty() ? 0.0 : c.result->snapshots.back().t;

  if (sc.pullback.enabled && !c.blew_up) {
    auto source = pullback::sampled_source(c.result->xi, sc.pullback.mode);
    int store = sc.pullback.store_every > 0 ? sc.pullback.store_every : static_cast<int>(c.result->steps);
    c.trajectory = pullback::integrate_diffeo(*source, c.grid, sc.flow.duration, c.result->dt, sc.pullback.mode,
                                              std::max(store, 1));
    c.pulled_back = pullback::pullback_structure(*c.result->final_phi, *c.trajectory, c.trajectory->samples.back());
  }

  for (const auto& name : sc.checks) {
    try {
      rep.checks.push_back(run_check(name, c));
    } catch (const ConfigError&) {
      throw;
    } catch (const Error& e) {
      rep.checks.push_back({name, "fail", std::nan(""), std::nullopt, "", e.what()});
    }
  }

  if (options.write_files) {
    fs::path dir = sc.output.dir.empty() ? options.out_dir / sc.name : fs::path(sc.output.dir);
    write_outputs(c, dir, rep);
  }
  bool all = std::all_of(rep.checks.begin(), rep.checks.end(), [](const auto& ck) { return ck.passed(); });
  rep.status = c.blew_up ? "blowup" : (all ? "pass" : "fail");
  rep.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return rep;
}

int exit_code(const report::ScenarioReport& r) {
  if (r.status == "blowup") return 3;
  return r.status == "pass" ? 0 : 1;
}

int exit_code(const std::vector<report::ScenarioReport>& reports) {
  int code = 0;
  for (const auto& r : reports) code = std::max(code, exit_code(r));
  return code;
}

}  // namespace finsler::scenario
