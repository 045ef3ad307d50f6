#pragma once

#include <array>
#include <functional>
#include <iosfwd>
#include <memory>
#include <vector>

#include "finsler/flow_engine.hpp"
#include "finsler/sphere_bundle.hpp"

namespace finsler::pullback {

using bundle::ScalarBundleField;
using bundle::SphereBundleGrid;

/// BaseReduced: fiber-average xi to X(x), flow on the base and lift by the
/// differential. HorizontalLift: every line element (x, e_r(theta)) moves with
/// xi(x, theta) and carries its direction along the tangent map.
enum class PullbackMode { BaseReduced, HorizontalLift };

/// Fiber average of xi: one value per base point (j fastest).
std::array<std::vector<double>, 2> reduce_xi(const SphereBundleGrid& grid, const flow::DeTurckField& xi);
/// Largest variation of xi over a fiber circle.
double xi_fiber_variation(const SphereBundleGrid& grid, const flow::DeTurckField& xi);

/// Velocity of the diffeomorphism ODE frozen at one time.
class VelocitySlice {
 public:
  virtual ~VelocitySlice() = default;
  /// v = xi(x, theta), jac[a * 2 + b] = d xi^a / d x^b.
  virtual void eval(double x1, double x2, double theta, double v[2], double jac[4]) const = 0;
};

class VelocitySource {
 public:
  virtual ~VelocitySource() = default;
  virtual std::unique_ptr<VelocitySlice> at(double t) const = 0;
};

/// Interpolates recorded xi samples: cubic Lagrange in time, Lagrange of
/// `width` points in x and trigonometric in theta. BaseReduced uses the fiber
/// averages; HorizontalLift needs a Full recording.
std::unique_ptr<VelocitySource> sampled_source(const flow::XiSeries& series, PullbackMode mode, int width = 6);

using AnalyticVelocity = std::function<void(double x1, double x2, double theta, double t, double v[2], double jac[4])>;
std::unique_ptr<VelocitySource> analytic_source(AnalyticVelocity f);

/// A sample of the map: particle positions (unwrapped, so x - x0 is the
/// displacement) and, for HorizontalLift, the transported direction.
struct MapSample {
  double t = 0.0;
  std::vector<double> x1, x2;
  std::vector<double> v1, v2;  // HorizontalLift only
};

struct DiffeoTrajectory {
  SphereBundleGrid grid{8, 8, 8};
  PullbackMode mode = PullbackMode::BaseReduced;
  std::vector<MapSample> samples;  // samples.front() is the identity

  /// Particles per sample: n1 n2 in BaseReduced, the full grid otherwise.
  std::size_t particles() const;
  const MapSample& at_time(double t) const;
};

/// Advances points (x1, x2) and directions (v1, v2) from t0 to t1 with RK4.
/// Directions are left alone if v1 is empty. Throws DisplacementTooLarge if a
/// step moves a point by half a cell or more.
void integrate_points(const VelocitySource& source, const SphereBundleGrid& grid, double t0, double t1, double dt,
                      std::vector<double>& x1, std::vector<double>& x2, std::vector<double>& v1,
                      std::vector<double>& v2);

/// Integrates d/dt Phi = xi(Phi, t), Phi_0 = Id, for every particle of the
/// mode, storing every `store_every` steps and the endpoint.
DiffeoTrajectory integrate_diffeo(const VelocitySource& source, const SphereBundleGrid& grid, double duration,
                                  double dt, PullbackMode mode, int store_every = 1);

/// (Phi^* F~^2)(x, e_r(theta)) = F~^2(Phi(x), dPhi e_r) through degree-2
/// homogeneity. BaseReduced takes dPhi from 4th-order differences of the
/// displacement. Throws NonPositiveF if the result is not positive.
ScalarBundleField pullback_structure(const ScalarBundleField& phi_tilde, const DiffeoTrajectory& trajectory,
                                     const MapSample& map, const bundle::InterpolationOptions& opt = {});

/// CSV rows (t, i, j, x1_mapped, x2_mapped); HorizontalLift adds k and theta_mapped.
void write_trajectory_csv(std::ostream& out, const DiffeoTrajectory& trajectory);

}  // namespace finsler::pullback
