#pragma once

#include <array>
#include <cmath>
#include <functional>
#include <iosfwd>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include "finsler/linalg.hpp"
#include "finsler/structure.hpp"

namespace finsler::bundle {

/// Periodic (x1, x2, theta) grid over the unit-circle bundle of T^2. The fiber
/// angle is the fastest index: node = (i * n2 + j) * ntheta + k.
class SphereBundleGrid {
 public:
  SphereBundleGrid(int n1, int n2, int ntheta, double period1 = 2 * std::numbers::pi,
                   double period2 = 2 * std::numbers::pi);

  int n1() const { return n1_; }
  int n2() const { return n2_; }
  int ntheta() const { return nt_; }
  std::size_t size() const { return static_cast<std::size_t>(n1_) * n2_ * nt_; }
  std::size_t lines() const { return static_cast<std::size_t>(n1_) * n2_; }
  double period(int axis) const { return axis == 0 ? p1_ : p2_; }
  double h(int axis) const { return axis == 0 ? p1_ / n1_ : p2_ / n2_; }
  double htheta() const { return 2 * std::numbers::pi / nt_; }
  double min_spacing() const { return std::min({h(0), h(1), htheta()}); }
  double x1(int i) const { return i * h(0); }
  double x2(int j) const { return j * h(1); }
  double theta(int k) const { return k * htheta(); }

  std::size_t index(int i, int j, int k) const {
    i = wrap(i, n1_);
    j = wrap(j, n2_);
    k = wrap(k, nt_);
    return (static_cast<std::size_t>(i) * n2_ + j) * nt_ + k;
  }
  std::array<int, 3> coords(std::size_t node) const {
    int k = static_cast<int>(node % nt_);
    std::size_t line = node / nt_;
    return {static_cast<int>(line / n2_), static_cast<int>(line % n2_), k};
  }
  /// cos(theta_k), sin(theta_k).
  double c(int k) const { return cos_[k]; }
  double s(int k) const { return sin_[k]; }

  bool operator==(const SphereBundleGrid& o) const {
    return n1_ == o.n1_ && n2_ == o.n2_ && nt_ == o.nt_ && p1_ == o.p1_ && p2_ == o.p2_;
  }

  static int wrap(int i, int n) { return ((i % n) + n) % n; }

 private:
  int n1_, n2_, nt_;
  double p1_, p2_;
  std::vector<double> cos_, sin_;
};

SphereBundleGrid build_grid(int n1, int n2, int ntheta);

enum class FiberScheme { Spectral, FD4 };

/// Grid samples of a function on TM_0 that is positively homogeneous of degree
/// 0 or 2 in y, taken at the unit representatives y(theta) = (cos, sin).
class ScalarBundleField {
 public:
  ScalarBundleField(SphereBundleGrid grid, int degree);
  ScalarBundleField(SphereBundleGrid grid, int degree, std::vector<double> values);

  const SphereBundleGrid& grid() const { return grid_; }
  int degree() const { return degree_; }
  std::size_t size() const { return values_.size(); }
  double operator[](std::size_t n) const { return values_[n]; }
  double& operator[](std::size_t n) { return values_[n]; }
  double at(int i, int j, int k) const { return values_[grid_.index(i, j, k)]; }
  const std::vector<double>& values() const { return values_; }
  std::vector<double>& values() { return values_; }

  ScalarBundleField& operator+=(const ScalarBundleField& o);
  ScalarBundleField& operator-=(const ScalarBundleField& o);
  ScalarBundleField& operator*=(double s);
  friend ScalarBundleField operator+(ScalarBundleField a, const ScalarBundleField& b) { return a += b; }
  friend ScalarBundleField operator-(ScalarBundleField a, const ScalarBundleField& b) { return a -= b; }
  friend ScalarBundleField operator*(ScalarBundleField a, double s) { return a *= s; }
  friend ScalarBundleField operator*(double s, ScalarBundleField a) { return a *= s; }
  /// Pointwise product; the degrees add and must stay in {0, 2}.
  friend ScalarBundleField operator*(const ScalarBundleField& a, const ScalarBundleField& b);

  double sup_norm() const;

 private:
  void check_compatible(const ScalarBundleField& o, const char* op) const;
  SphereBundleGrid grid_;
  int degree_;
  std::vector<double> values_;
};

double sup_difference(const ScalarBundleField& a, const ScalarBundleField& b);

/// Symmetric 2x2 tensor per node (degree 0).
struct TensorBundleField {
  SphereBundleGrid grid;
  std::vector<double> c11, c12, c22;
  bool metric = false;

  explicit TensorBundleField(SphereBundleGrid g)
      : grid(std::move(g)), c11(grid.size()), c12(grid.size()), c22(grid.size()) {}
  SquareMatrix<double> at(std::size_t node) const;
  /// Throws NotPositiveDefinite when flagged as a metric and some node fails.
  void validate() const;
};

/// v[node] = F^2(x, y(theta)).
ScalarBundleField sample_structure(const AnalyticFinslerStructure& S, const SphereBundleGrid& grid);
ScalarBundleField sample_function(const SphereBundleGrid& grid, int degree,
                                  const std::function<double(double, double, double)>& f);

// Whole-array kernels. `in` and outputs have grid.size() entries.
void fiber_derivatives(const SphereBundleGrid& grid, FiberScheme scheme, std::span<const double> in,
                       std::span<double> d1, std::span<double> d2 = {}, std::span<double> d3 = {});
/// Periodic fourth-order central first derivative along base axis 0 or 1.
void x_derivative(const SphereBundleGrid& grid, std::span<const double> in, int axis, std::span<double> out);
/// Keeps fiber harmonics |m| <= max_harmonic on every fiber circle.
void fiber_bandlimit(const SphereBundleGrid& grid, std::span<double> data, int max_harmonic);
/// Mean over each fiber circle; one value per base point (j fastest).
std::vector<double> fiber_average(const SphereBundleGrid& grid, std::span<const double> data);

/// Cartesian y-gradient at a node from Euler's relation and the theta-derivative.
std::array<double, 2> fiber_derivative(const ScalarBundleField& f, std::size_t node,
                                       FiberScheme scheme = FiberScheme::Spectral);
/// y-Hessian of a degree-2 field from its polar decomposition f = r^2 psi(theta).
SquareMatrix<double> homogeneous_hessian(const ScalarBundleField& f, std::size_t node,
                                         FiberScheme scheme = FiberScheme::Spectral);
/// g = Hessian / 2 at every node, flagged as a metric.
TensorBundleField fundamental_tensor_field(const ScalarBundleField& f2, FiberScheme scheme = FiberScheme::Spectral);

/// N^i_j per node, stored as N[i * 2 + j].
struct ConnectionField {
  SphereBundleGrid grid;
  std::array<std::vector<double>, 4> N;
  explicit ConnectionField(SphereBundleGrid g) : grid(std::move(g)) {
    for (auto& v : N) v.assign(grid.size(), 0.0);
  }
};

/// delta_axis f = d_axis f - N^j_axis df/dy^j at a node.
double horizontal_derivative(const ScalarBundleField& f, const ConnectionField& N, std::size_t node, int axis,
                             FiberScheme scheme = FiberScheme::Spectral);

struct InterpolationOptions {
  int x_stencil = 6;          // Lagrange points per base axis (4 = cubic)
  bool spectral_theta = true;  // trigonometric in theta, else Lagrange with x_stencil points
};

/// Lagrange weights for a periodic uniform grid: fills `offsets` with node
/// indices and `weights` with the stencil weights.
void lagrange_weights(double coord, double h, int n, int width, std::span<int> index, std::span<double> weights);
/// Trigonometric cardinal weights on an even periodic grid of n points.
void trig_weights(double theta, int n, std::span<double> weights);

double interpolate(const ScalarBundleField& f, double x1, double x2, double theta, const InterpolationOptions& opt = {});
/// Interpolates a base field (n1 x n2 array, j fastest) at a continuous point.
double interpolate_base(const SphereBundleGrid& grid, std::span<const double> values, double x1, double x2,
                        int width = 6);

/// CSV dump: i,j,k,x1,x2,theta followed by one column per field, %.17g.
void write_fields_csv(std::ostream& out, const std::vector<const ScalarBundleField*>& fields,
                      const std::vector<std::string>& names);
void write_fields_csv(const std::string& path, const std::vector<const ScalarBundleField*>& fields,
                      const std::vector<std::string>& names);
/// Reads a dump written by write_fields_csv; all columns get `degree`.
std::vector<ScalarBundleField> read_fields_csv(std::istream& in, int degree, std::vector<std::string>* names = nullptr);

}  // namespace finsler::bundle
