#pragma once

#include <array>
#include <memory>
#include <optional>
#include <vector>

#include "finsler/errors.hpp"
#include "finsler/grid_geometry.hpp"
#include "finsler/linalg.hpp"
#include "finsler/sphere_bundle.hpp"
#include "finsler/structure.hpp"

namespace finsler::flow {

using bundle::FiberScheme;
using bundle::GeometryLevel;
using bundle::GridGeometry;
using bundle::ScalarBundleField;
using bundle::SphereBundleGrid;

enum class Scheme { Euler, RK4 };
enum class Gauge { Direct, DeTurck };
enum class XiRecording { None, Base, Full };

struct FlowConfig {
  static constexpr int kAutoBandlimit = -2;
  static constexpr int kNoBandlimit = -1;

  Scheme scheme = Scheme::RK4;
  Gauge gauge = Gauge::Direct;
  double dt = 0.0;    // > 0 overrides cfl
  double cfl = 0.1;   // dt = cfl * min(h)^2
  double duration = 0.05;
  int cadence = 1;         // diagnostics every `cadence` steps
  int snapshot_every = 0;  // 0: initial and final only
  FiberScheme fiber_scheme = FiberScheme::Spectral;
  /// Fiber harmonics kept in the rhs and the initial data. Auto means 2: both
  /// gauges carry fourth-order fiber terms with spray-dependent sign, so high
  /// fiber modes grow like m^4 at full bandwidth.
  int fiber_bandlimit = kAutoBandlimit;
  XiRecording record_xi = XiRecording::None;

  void validate() const;  // ConfigError
  /// Step size on `grid`; throws CFLViolation above 0.5 min(h)^2.
  double time_step(const SphereBundleGrid& grid) const;
  int effective_bandlimit() const;
};

/// Fixed background structure with its Cartan connection on the grid.
class BackgroundMetric {
 public:
  BackgroundMetric(const AnalyticFinslerStructure& S, const SphereBundleGrid& grid,
                   FiberScheme scheme = FiberScheme::Spectral);
  explicit BackgroundMetric(const ScalarBundleField& phi, FiberScheme scheme = FiberScheme::Spectral);

  const GridGeometry& geometry() const { return *geo_; }
  const SphereBundleGrid& grid() const { return geo_->grid; }

 private:
  std::shared_ptr<const GridGeometry> geo_;
};

/// phi = F^2 at time t with lazily built connection caches.
class FlowState {
 public:
  explicit FlowState(ScalarBundleField phi, double t = 0.0, FiberScheme scheme = FiberScheme::Spectral);

  double time() const { return t_; }
  void set_time(double t) { t_ = t; }
  const ScalarBundleField& phi() const { return phi_; }
  const SphereBundleGrid& grid() const { return phi_.grid(); }
  FiberScheme scheme() const { return scheme_; }
  void set_phi(ScalarBundleField phi);

  /// Throws NotPositiveDefinite (with node) if g fails at some node.
  const GridGeometry& geometry(GeometryLevel level) const;

 private:
  ScalarBundleField phi_;
  double t_;
  FiberScheme scheme_;
  mutable std::shared_ptr<const GridGeometry> geo_;
};

struct DeTurckField {
  std::array<std::vector<double>, 2> xi;                  // xi^k per node
  std::optional<std::array<std::vector<double>, 2>> base;  // fiber average per base point
  double sup_norm() const;
};

struct PrincipalSymbol {
  SquareMatrix<double> block{3};  // diag(g^{sh}, F^2 g^{ij} e_t,i e_t,j) in (x1, x2, theta)
  double min_eigenvalue = 0.0;
};

ScalarBundleField ricci_rhs(const FlowState& state);
/// Ricci scalar field of the state (degree 0).
ScalarBundleField ricci_field(const FlowState& state);
/// -2 y^j y^k Ric_jk with Ric_jk the fiber Hessian of phi Ric / 2.
ScalarBundleField tensor_route_rhs(const FlowState& state);

DeTurckField deturck_vector_field(const FlowState& state, const BackgroundMetric& background);
/// y^p y^q (nabla_p xi_q + nabla_q xi_p) with the Cartan horizontal derivative.
ScalarBundleField lie_term(const FlowState& state, const DeTurckField& xi);
ScalarBundleField deturck_rhs(const FlowState& state, const BackgroundMetric& background);

/// Second route: the rhs written through delta-derivatives of g, with the
/// Lie term expanded in terms of the connections of g and the background.
struct ExpandedRhs {
  ScalarBundleField rhs;          // full DeTurck rhs
  ScalarBundleField ricci_part;   // -2 F^2 Ric via delta delta g
  ScalarBundleField lie_part;     // y y L_xi g via delta delta g
};
ExpandedRhs deturck_rhs_expanded(const FlowState& state, const BackgroundMetric& background);

PrincipalSymbol principal_symbol(const FlowState& state, std::size_t node);
/// Min over nodes of the principal-symbol eigenvalues; no throw on failure.
double check_parabolicity(const FlowState& state);

/// Largest oscillation of g over each fiber circle; zero for Riemannian data.
double riemannian_closure(const FlowState& state);

/// One explicit step. Throws BlowUp on loss of positive definiteness or
/// non-finite values, CFLViolation when dt is too large.
FlowState step(const FlowState& state, const FlowConfig& config, const BackgroundMetric* background = nullptr);

struct DiagnosticsRow {
  long step = 0;
  double t = 0.0;
  double sup_ric = 0.0;
  double min_eig_g = 0.0;
  double parabolicity_margin = 0.0;
  double max_dphi = 0.0;
  double wall_ms = 0.0;
  double xi_sup = 0.0;
  double closure = 0.0;
};

struct Snapshot {
  double t;
  ScalarBundleField phi;
};

/// xi samples at accepted step times, for the pullback ODE.
struct XiSeries {
  SphereBundleGrid grid{8, 8, 8};
  XiRecording kind = XiRecording::None;
  std::vector<double> times;
  std::vector<std::array<std::vector<double>, 2>> base;  // n1 * n2 values
  std::vector<std::array<std::vector<double>, 2>> full;  // grid.size() values
};

struct FlowResult {
  FlowConfig config;
  double dt = 0.0;
  long steps = 0;
  std::vector<DiagnosticsRow> diagnostics;
  std::vector<Snapshot> snapshots;
  XiSeries xi;
  std::optional<ScalarBundleField> final_phi;
  double wall_seconds = 0.0;
};

/// BlowUp thrown by run_flow, carrying the trajectory up to the failure.
class FlowBlowUp : public BlowUp {
 public:
  FlowBlowUp(const BlowUp& cause, std::shared_ptr<FlowResult> partial)
      : BlowUp(cause), partial_(std::move(partial)) {}
  const FlowResult& partial() const { return *partial_; }

 private:
  std::shared_ptr<FlowResult> partial_;
};

/// Projects the initial data per the config's bandlimit, then steps to T.
FlowResult run_flow(const ScalarBundleField& initial, const FlowConfig& config,
                    const BackgroundMetric* background = nullptr);
FlowResult run_flow(const AnalyticFinslerStructure& initial, const SphereBundleGrid& grid, const FlowConfig& config,
                    const BackgroundMetric* background = nullptr);

void write_diagnostics_csv(std::ostream& out, const std::vector<DiagnosticsRow>& rows);

}  // namespace finsler::flow
