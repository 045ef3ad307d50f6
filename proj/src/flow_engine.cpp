#include "finsler/flow_engine.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ostream>

namespace finsler::flow {

using bundle::sym;
using Array = std::vector<double>;

namespace {

double sup_abs(const Array& a) {
  double m = 0.0;
  for (double v : a) m = std::max(m, std::abs(v));
  return m;
}

void require_same_grid(const SphereBundleGrid& a, const SphereBundleGrid& b) {
  if (!(a == b)) throw BadResolution("state and background live on different grids");
}

// Smallest eigenvalue of diag(g^-1, phi e_t g^-1 e_t) at node n.
double symbol_min(const GridGeometry& geo, std::size_t n, std::size_t k) {
  double g11 = geo.g[0][n], g12 = geo.g[1][n], g22 = geo.g[2][n];
  double det = g11 * g22 - g12 * g12;
  if (det == 0.0 || !std::isfinite(det)) return -std::numeric_limits<double>::infinity();
  double i11 = g22 / det, i12 = -g12 / det, i22 = g11 / det;
  double half_tr = 0.5 * (i11 + i22);
  double rad = std::sqrt(0.25 * (i11 - i22) * (i11 - i22) + i12 * i12);
  double e0 = -geo.grid.s(k), e1 = geo.grid.c(k);
  double vertical = geo.phi[n] * (i11 * e0 * e0 + 2 * i12 * e0 * e1 + i22 * e1 * e1);
  return std::min(half_tr - rad, vertical);
}

double margin_of(const GridGeometry& geo) {
  double m = std::numeric_limits<double>::infinity();
  const int nt = geo.grid.ntheta();
  for (std::size_t n = 0, k = 0; n < geo.size(); ++n, k = bundle::next_angle(k, nt)) m = std::min(m, symbol_min(geo, n, k));
  return m;
}

}  // namespace

void FlowConfig::validate() const {
  if (!(cfl > 0.0 && cfl <= 0.5)) throw ConfigError("cfl factor must lie in (0, 0.5]");
  if (!(duration > 0.0)) throw ConfigError("duration must be positive");
  if (dt < 0.0 || !std::isfinite(dt)) throw ConfigError("dt must be positive (or 0 to use cfl)");
  if (cadence < 1) throw ConfigError("cadence must be >= 1");
  if (snapshot_every < 0) throw ConfigError("snapshot_every must be >= 0");
  if (fiber_bandlimit < kAutoBandlimit) throw ConfigError("fiber_bandlimit must be >= -1 (or auto)");
}

double FlowConfig::time_step(const SphereBundleGrid& grid) const {
  double h = grid.min_spacing();
  double limit = 0.5 * h * h;
  if (dt > 0.0) {
    if (dt > limit) {
      char buf[160];
      std::snprintf(buf, sizeof buf, "dt=%g exceeds 0.5 min(h)^2=%g", dt, limit);
      throw CFLViolation(buf);
    }
    return dt;
  }
  if (!(cfl > 0.0 && cfl <= 0.5)) throw CFLViolation("cfl factor must lie in (0, 0.5]");
  return cfl * h * h;
}

int FlowConfig::effective_bandlimit() const {
  return fiber_bandlimit == kAutoBandlimit ? 2 : fiber_bandlimit;
}

BackgroundMetric::BackgroundMetric(const AnalyticFinslerStructure& S, const SphereBundleGrid& grid,
                                   FiberScheme scheme)
    : BackgroundMetric(bundle::sample_structure(S, grid), scheme) {}

BackgroundMetric::BackgroundMetric(const ScalarBundleField& phi, FiberScheme scheme)
    : geo_(std::make_shared<GridGeometry>(phi, scheme, GeometryLevel::Connection)) {}

FlowState::FlowState(ScalarBundleField phi, double t, FiberScheme scheme)
    : phi_(std::move(phi)), t_(t), scheme_(scheme) {
  if (phi_.degree() != 2) throw DegreeMismatch("flow state must be the degree-2 field F^2");
}

void FlowState::set_phi(ScalarBundleField phi) {
  if (phi.degree() != 2) throw DegreeMismatch("flow state must be the degree-2 field F^2");
  phi_ = std::move(phi);
  geo_.reset();
}

const GridGeometry& FlowState::geometry(GeometryLevel level) const {
  if (!geo_ || geo_->level < level) geo_ = std::make_shared<GridGeometry>(phi_, scheme_, level);
  return *geo_;
}

double DeTurckField::sup_norm() const { return std::max(sup_abs(xi[0]), sup_abs(xi[1])); }

ScalarBundleField ricci_field(const FlowState& state) {
  const auto& geo = state.geometry(GeometryLevel::Curvature);
  return ScalarBundleField(state.grid(), 0, geo.ric);
}

ScalarBundleField ricci_rhs(const FlowState& state) {
  const auto& geo = state.geometry(GeometryLevel::Curvature);
  Array out(geo.size());
  for (std::size_t n = 0; n < out.size(); ++n) out[n] = -2.0 * geo.phi[n] * geo.ric[n];
  return ScalarBundleField(state.grid(), 2, std::move(out));
}

ScalarBundleField tensor_route_rhs(const FlowState& state) {
  const auto& geo = state.geometry(GeometryLevel::Curvature);
  const std::size_t M = geo.size();
  Array f(M), ft(M), ftt(M);
  for (std::size_t n = 0; n < M; ++n) f[n] = 0.5 * geo.phi[n] * geo.ric[n];
  bundle::fiber_derivatives(geo.grid, geo.scheme, f, ft, ftt);
  Array out(M);
  const int nt = geo.grid.ntheta();
  for (std::size_t n = 0, k = 0; n < M; ++n, k = bundle::next_angle(k, nt)) {
    double c = geo.grid.c(k), s = geo.grid.s(k);
    double a = 2 * f[n], b = ft[n], e = ftt[n] + 2 * f[n];
    // Ric_jk = a E_rr + b (e_r e_t + e_t e_r) + e E_tt
    double r11 = a * c * c - 2 * b * c * s + e * s * s;
    double r12 = a * c * s + b * (c * c - s * s) - e * c * s;
    double r22 = a * s * s + 2 * b * c * s + e * c * c;
    out[n] = -2.0 * (r11 * c * c + 2 * r12 * c * s + r22 * s * s);
  }
  return ScalarBundleField(state.grid(), 2, std::move(out));
}

DeTurckField deturck_vector_field(const FlowState& state, const BackgroundMetric& background) {
  require_same_grid(state.grid(), background.grid());
  const auto& geo = state.geometry(GeometryLevel::Connection);
  const auto& bg = background.geometry();
  const std::size_t M = geo.size();
  DeTurckField out;
  for (auto& a : out.xi) a.resize(M);
  for (std::size_t n = 0; n < M; ++n) {
    const double gi[3] = {geo.ginv[0][n], 2 * geo.ginv[1][n], geo.ginv[2][n]};
    for (int k = 0; k < 2; ++k) {
      double v = 0.0;
      for (int q = 0; q < 3; ++q) v += gi[q] * (bg.Gamma[k * 3 + q][n] - geo.Gamma[k * 3 + q][n]);
      out.xi[k][n] = v;
    }
  }
  return out;
}

ScalarBundleField lie_term(const FlowState& state, const DeTurckField& xi) {
  const auto& geo = state.geometry(GeometryLevel::Connection);
  const std::size_t M = geo.size();
  std::array<std::array<Array, 2>, 2> dxi;  // dxi[l][p] = delta_p xi^l
  for (int l = 0; l < 2; ++l) {
    dxi[l][0].resize(M);
    dxi[l][1].resize(M);
    bundle::horizontal_gradient_bulk(geo, xi.xi[l], dxi[l][0], dxi[l][1]);
  }
  Array out(M);
  const int nt = geo.grid.ntheta();
  for (std::size_t n = 0, k = 0; n < M; ++n, k = bundle::next_angle(k, nt)) {
    const double er[2] = {geo.grid.c(k), geo.grid.s(k)};
    const double et[2] = {-geo.grid.s(k), geo.grid.c(k)};
    double acc = 0.0;
    for (int l = 0; l < 2; ++l) {
      // y_l = g_lq y^q = phi e_r + phi_t e_t / 2
      double yl = geo.phi[n] * er[l] + 0.5 * geo.phi_t[n] * et[l];
      // y^p nabla_p xi^l = y^p delta_p xi^l + N^l_s xi^s
      double cov = er[0] * dxi[l][0][n] + er[1] * dxi[l][1][n] + geo.N[l * 2 + 0][n] * xi.xi[0][n] +
                   geo.N[l * 2 + 1][n] * xi.xi[1][n];
      acc += yl * cov;
    }
    out[n] = 2.0 * acc;
  }
  return ScalarBundleField(state.grid(), 2, std::move(out));
}

ScalarBundleField deturck_rhs(const FlowState& state, const BackgroundMetric& background) {
  auto xi = deturck_vector_field(state, background);
  return ricci_rhs(state) - lie_term(state, xi);
}

ExpandedRhs deturck_rhs_expanded(const FlowState& state, const BackgroundMetric& background) {
  require_same_grid(state.grid(), background.grid());
  const auto& geo = state.geometry(GeometryLevel::Connection);
  const auto& bg = background.geometry();
  const std::size_t M = geo.size();
  const auto xi = deturck_vector_field(state, background);

  // dd[(s * 2 + h) * 3 + sym(p, q)] = delta_s delta_h g_pq
  std::array<Array, 12> dd;
  for (auto& a : dd) a.resize(M);
  for (int h = 0; h < 2; ++h)
    for (int q = 0; q < 3; ++q)
      bundle::horizontal_gradient_bulk(geo, geo.dg[h * 3 + q], dd[(0 * 2 + h) * 3 + q], dd[(1 * 2 + h) * 3 + q]);
  // dgh[p * 6 + l * 3 + sym(s, h)] = delta_p Gamma(h)^l_sh
  std::array<Array, 12> dgh;
  for (auto& a : dgh) a.resize(M);
  for (int i = 0; i < 6; ++i) bundle::horizontal_gradient_bulk(geo, bg.Gamma[i], dgh[i], dgh[6 + i]);

  Array rhs(M), ric_part(M), lie_part(M);
  const int nt = geo.grid.ntheta();
  for (std::size_t n = 0, k = 0; n < M; ++n, k = bundle::next_angle(k, nt)) {
    const double y[2] = {geo.grid.c(k), geo.grid.s(k)};
    double g[2][2], gi[2][2], D[2][2][2], DD[2][2][2][2], Gm[2][2][2], Dl[2][2][2], dGh[2][2][2][2], dgi[2][2][2];
    double x[2] = {xi.xi[0][n], xi.xi[1][n]};
    for (int a = 0; a < 2; ++a)
      for (int b = 0; b < 2; ++b) {
        g[a][b] = geo.g[sym(a, b)][n];
        gi[a][b] = geo.ginv[sym(a, b)][n];
      }
    for (int j = 0; j < 2; ++j)
      for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b) {
          D[j][a][b] = geo.dg[j * 3 + sym(a, b)][n];
          Gm[j][a][b] = geo.Gamma[j * 3 + sym(a, b)][n];
          Dl[j][a][b] = bg.Gamma[j * 3 + sym(a, b)][n] - Gm[j][a][b];
          for (int s = 0; s < 2; ++s) {
            DD[s][j][a][b] = dd[(s * 2 + j) * 3 + sym(a, b)][n];
            dGh[s][j][a][b] = dgh[s * 6 + j * 3 + sym(a, b)][n];
          }
        }
    // delta_p g^{sh} = -g^{sa} delta_p g_ab g^{bh}
    for (int p = 0; p < 2; ++p)
      for (int s = 0; s < 2; ++s)
        for (int h = 0; h < 2; ++h) {
          double v = 0.0;
          for (int a = 0; a < 2; ++a)
            for (int b = 0; b < 2; ++b) v -= gi[s][a] * D[p][a][b] * gi[b][h];
          dgi[p][s][h] = v;
        }

    double t1 = 0, t2 = 0, t3 = 0, t4 = 0, t5 = 0, t6 = 0, ric2 = 0, lie2 = 0;
    for (int p = 0; p < 2; ++p)
      for (int q = 0; q < 2; ++q) {
        const double w = y[p] * y[q];
        double a1 = 0, a2 = 0, a3 = 0, a4 = 0, a5 = 0, a6 = 0, r2 = 0, l2 = 0;
        for (int s = 0; s < 2; ++s)
          for (int h = 0; h < 2; ++h) {
            a1 += gi[s][h] * DD[s][h][p][q];
            a2 += Gm[s][h][s] * Gm[h][p][q] - Gm[s][h][q] * Gm[h][p][s];
            a3 += dgi[s][s][h] * (D[p][h][q] + D[q][p][h] - D[h][p][q]);
            a4 += dgi[q][s][h] * (D[p][h][s] + D[s][p][h] - D[h][p][s]);
            r2 += gi[s][h] * (DD[s][p][h][q] - DD[s][h][p][q] - DD[q][p][h][s] + DD[q][h][p][s]);
            // second-order part of the Lie term, from the delta delta g of Gamma(g)
            l2 += gi[s][h] * (DD[p][q][s][h] - DD[q][h][p][s] - DD[p][s][q][h]);
            for (int l = 0; l < 2; ++l) {
              a5 += g[q][l] * dgi[p][s][h] * Dl[l][s][h] + g[p][l] * dgi[q][s][h] * Dl[l][s][h] +
                    g[q][l] * gi[s][h] * dGh[p][l][s][h] + g[p][l] * gi[s][h] * dGh[q][l][s][h];
              a6 += gi[s][h] * D[p][q][l] * Gm[l][s][h];
            }
          }
        for (int l = 0; l < 2; ++l)
          for (int v = 0; v < 2; ++v) a5 += g[q][l] * Gm[l][p][v] * x[v] + g[p][l] * Gm[l][q][v] * x[v];
        t1 += w * a1;
        t2 += w * a2;
        t3 += w * a3;
        t4 += w * a4;
        t5 += w * a5;
        t6 += w * a6;
        ric2 += w * r2;
        lie2 += w * l2;
      }
    t2 *= -2.0;
    t3 *= -1.0;
    t5 *= -1.0;
    t6 *= -2.0;
    rhs[n] = t1 + t2 + t3 + t4 + t5 + t6;
    ric_part[n] = -ric2 + t2 + t3 + t4;
    lie_part[n] = lie2 - t6 - t5;
  }
  return {ScalarBundleField(state.grid(), 2, std::move(rhs)), ScalarBundleField(state.grid(), 2, std::move(ric_part)),
          ScalarBundleField(state.grid(), 2, std::move(lie_part))};
}

PrincipalSymbol principal_symbol(const FlowState& state, std::size_t node) {
  GridGeometry geo(state.phi(), state.scheme(), GeometryLevel::Metric, false);
  PrincipalSymbol ps;
  double g11 = geo.g[0][node], g12 = geo.g[1][node], g22 = geo.g[2][node];
  double det = g11 * g22 - g12 * g12;
  ps.block(0, 0) = g22 / det;
  ps.block(0, 1) = ps.block(1, 0) = -g12 / det;
  ps.block(1, 1) = g11 / det;
  double e0 = geo.et(node, 0), e1 = geo.et(node, 1);
  ps.block(2, 2) = geo.phi[node] * (ps.block(0, 0) * e0 * e0 + 2 * ps.block(0, 1) * e0 * e1 + ps.block(1, 1) * e1 * e1);
  ps.min_eigenvalue = symbol_min(geo, node, node % geo.grid.ntheta());
  return ps;
}

double check_parabolicity(const FlowState& state) {
  GridGeometry geo(state.phi(), state.scheme(), GeometryLevel::Metric, false);
  return margin_of(geo);
}

double riemannian_closure(const FlowState& state) {
  GridGeometry geo(state.phi(), state.scheme(), GeometryLevel::Metric, false);
  const int nt = geo.grid.ntheta();
  double worst = 0.0;
  for (std::size_t l = 0; l < geo.grid.lines(); ++l)
    for (int q = 0; q < 3; ++q) {
      double lo = geo.g[q][l * nt], hi = lo;
      for (int k = 1; k < nt; ++k) {
        double v = geo.g[q][l * nt + k];
        lo = std::min(lo, v);
        hi = std::max(hi, v);
      }
      worst = std::max(worst, hi - lo);
    }
  return worst;
}

namespace {

struct StageOutput {
  ScalarBundleField rhs;
  std::optional<DeTurckField> xi;
};

[[noreturn]] void rethrow_as_blowup(const NotPositiveDefinite& e, double t) {
  throw BlowUp(std::string("fundamental tensor lost positive definiteness (min eigenvalue ") +
                   std::to_string(e.eigenvalue()) + ")",
               e.node(), t);
}

void check_finite(const ScalarBundleField& f, double t) {
  for (std::size_t n = 0; n < f.size(); ++n)
    if (!std::isfinite(f[n])) throw BlowUp("non-finite value", n, t);
}

StageOutput evaluate(const FlowState& s, const FlowConfig& cfg, const BackgroundMetric* bg) {
  try {
    if (cfg.gauge == Gauge::Direct) {
      auto rhs = ricci_rhs(s);
      bundle::fiber_bandlimit(s.grid(), rhs.values(), cfg.effective_bandlimit());
      return {std::move(rhs), std::nullopt};
    }
    if (!bg) throw ConfigError("DeTurck gauge needs a background metric");
    auto xi = deturck_vector_field(s, *bg);
    auto rhs = ricci_rhs(s) - lie_term(s, xi);
    bundle::fiber_bandlimit(s.grid(), rhs.values(), cfg.effective_bandlimit());
    return {std::move(rhs), std::move(xi)};
  } catch (const NotPositiveDefinite& e) {
    rethrow_as_blowup(e, s.time());
  }
}

FlowState make_stage(const FlowState& base, const ScalarBundleField& k, double h, double t) {
  ScalarBundleField phi = base.phi();
  auto& v = phi.values();
  for (std::size_t n = 0; n < v.size(); ++n) v[n] += h * k[n];
  check_finite(phi, t);
  return FlowState(std::move(phi), t, base.scheme());
}

FlowState advance(const FlowState& s, const FlowConfig& cfg, const BackgroundMetric* bg, double dt,
                  const StageOutput& k1) {
  const double t = s.time();
  FlowState out = [&] {
    if (cfg.scheme == Scheme::Euler) return make_stage(s, k1.rhs, dt, t + dt);
    auto k2 = evaluate(make_stage(s, k1.rhs, 0.5 * dt, t + 0.5 * dt), cfg, bg);
    auto k3 = evaluate(make_stage(s, k2.rhs, 0.5 * dt, t + 0.5 * dt), cfg, bg);
    auto k4 = evaluate(make_stage(s, k3.rhs, dt, t + dt), cfg, bg);
    ScalarBundleField phi = s.phi();
    auto& v = phi.values();
    for (std::size_t n = 0; n < v.size(); ++n)
      v[n] += dt / 6.0 * (k1.rhs[n] + 2.0 * k2.rhs[n] + 2.0 * k3.rhs[n] + k4.rhs[n]);
    return FlowState(std::move(phi), t + dt, s.scheme());
  }();
  check_finite(out.phi(), out.time());
  try {
    out.geometry(GeometryLevel::Metric);
  } catch (const NotPositiveDefinite& e) {
    rethrow_as_blowup(e, out.time());
  }
  return out;
}

}  // namespace

FlowState step(const FlowState& state, const FlowConfig& config, const BackgroundMetric* background) {
  config.validate();
  double dt = config.time_step(state.grid());
  auto k1 = evaluate(state, config, background);
  return advance(state, config, background, dt, k1);
}

FlowResult run_flow(const AnalyticFinslerStructure& initial, const SphereBundleGrid& grid, const FlowConfig& config,
                    const BackgroundMetric* background) {
  return run_flow(bundle::sample_structure(initial, grid), config, background);
}

FlowResult run_flow(const ScalarBundleField& initial, const FlowConfig& config, const BackgroundMetric* background) {
  config.validate();
  if (config.gauge == Gauge::DeTurck && !background) throw ConfigError("DeTurck gauge needs a background metric");
  if (background) require_same_grid(initial.grid(), background->grid());
  const auto& grid = initial.grid();
  auto result = std::make_shared<FlowResult>();
  result->config = config;
  const double dt0 = config.time_step(grid);
  const long nsteps = std::max<long>(1, static_cast<long>(std::ceil(config.duration / dt0 - 1e-9)));
  const double dt = config.duration / nsteps;
  result->dt = dt;
  result->xi.grid = grid;
  result->xi.kind = config.gauge == Gauge::DeTurck ? config.record_xi : XiRecording::None;

  ScalarBundleField phi0 = initial;
  bundle::fiber_bandlimit(grid, phi0.values(), config.effective_bandlimit());
  FlowState s(std::move(phi0), 0.0, config.fiber_scheme);
  result->snapshots.push_back({0.0, s.phi()});

  const auto start = std::chrono::steady_clock::now();
  auto elapsed_ms = [&] {
    return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  };
  auto record = [&](long n, const StageOutput& k) {
    if (k.xi && result->xi.kind != XiRecording::None) {
      result->xi.times.push_back(s.time());
      if (result->xi.kind == XiRecording::Full) result->xi.full.push_back(k.xi->xi);
      result->xi.base.push_back(
          {bundle::fiber_average(grid, k.xi->xi[0]), bundle::fiber_average(grid, k.xi->xi[1])});
    }
    if (n % config.cadence != 0 && n != nsteps) return;
    const auto& geo = s.geometry(GeometryLevel::Curvature);
    DiagnosticsRow row;
    row.step = n;
    row.t = s.time();
    row.sup_ric = sup_abs(geo.ric);
    row.min_eig_g = *std::min_element(geo.min_eig.begin(), geo.min_eig.end());
    row.parabolicity_margin = margin_of(geo);
    row.max_dphi = k.rhs.sup_norm();
    row.xi_sup = k.xi ? k.xi->sup_norm() : 0.0;
    row.closure = riemannian_closure(s);
    row.wall_ms = elapsed_ms();
    result->diagnostics.push_back(row);
  };

  try {
    for (long n = 0; n < nsteps; ++n) {
      auto k1 = evaluate(s, config, background);
      record(n, k1);
      s = advance(s, config, background, dt, k1);
      if (n + 1 == nsteps) s.set_time(config.duration);
      result->steps = n + 1;
      if (config.snapshot_every > 0 && (n + 1) % config.snapshot_every == 0 && n + 1 != nsteps)
        result->snapshots.push_back({s.time(), s.phi()});
    }
    record(nsteps, evaluate(s, config, background));
  } catch (const BlowUp& e) {
    result->final_phi = s.phi();
    result->snapshots.push_back({s.time(), s.phi()});
    result->wall_seconds = elapsed_ms() / 1000.0;
    throw FlowBlowUp(e, result);
  }
  result->snapshots.push_back({s.time(), s.phi()});
  result->final_phi = s.phi();
  result->wall_seconds = elapsed_ms() / 1000.0;
  return std::move(*result);
}

void write_diagnostics_csv(std::ostream& out, const std::vector<DiagnosticsRow>& rows) {
  out << "step,t,sup_ric,min_eig_g,parabolicity_margin,max_dphi,wall_ms\n";
  char buf[256];
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof buf, "%ld,%.17g,%.17g,%.17g,%.17g,%.17g,%.3f\n", r.step, r.t, r.sup_ric, r.min_eig_g,
                  r.parabolicity_margin, r.max_dphi, r.wall_ms);
    out << buf;
  }
}

}  // namespace finsler::flow
