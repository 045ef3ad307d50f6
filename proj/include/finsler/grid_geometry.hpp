#pragma once

#include <array>
#include <span>
#include <vector>

#include "finsler/sphere_bundle.hpp"

namespace finsler::bundle {

enum class GeometryLevel { Metric = 0, Curvature = 1, Connection = 2 };

/// Fiber index of the node after the one with fiber index k.
inline std::size_t next_angle(std::size_t k, int nt) { return k + 1 == static_cast<std::size_t>(nt) ? 0 : k + 1; }

/// Index of the symmetric pair (a, b) in {11, 12, 22}.
inline constexpr int sym(int a, int b) { return a + b; }

/// Connection data of a degree-2 field phi = F^2 sampled on the unit circle
/// bundle, computed in bulk. With e_r = (cos, sin), e_t = (-sin, cos):
///   g = phi E_rr + phi'/2 (e_r e_t + e_t e_r) + (phi''/2 + phi) E_tt,
///   d_theta g = (phi'''/2 + 2 phi') E_tt,
/// and y-derivatives of degree-d fields follow from d f e_r + f' e_t.
struct GridGeometry {
  using Array = std::vector<double>;

  /// With `strict`, a node where g is not positive definite throws
  /// NotPositiveDefinite carrying the node index.
  GridGeometry(const ScalarBundleField& phi, FiberScheme scheme, GeometryLevel level, bool strict = true);

  SphereBundleGrid grid;
  FiberScheme scheme;
  GeometryLevel level;

  Array phi, phi_t, phi_tt;
  std::array<Array, 3> g, ginv;
  Array min_eig;  // smallest eigenvalue of g per node

  // Curvature level and above.
  std::array<Array, 2> G, G_t;
  std::array<Array, 4> N;   // N^i_j at [i * 2 + j]
  std::array<Array, 2> nu;  // N^m_j e_t,m: the theta-rate of delta_j
  Array ric;

  // Connection level.
  Array cartan;              // c with d_theta g = c E_tt
  std::array<Array, 6> dg;   // delta_j g_pq at [j * 3 + sym(p, q)]
  std::array<Array, 6> Gamma;  // Gamma^i_jk at [i * 3 + sym(j, k)]

  std::size_t size() const { return phi.size(); }
  double er(std::size_t n, int a) const {
    int k = static_cast<int>(n % grid.ntheta());
    return a == 0 ? grid.c(k) : grid.s(k);
  }
  double et(std::size_t n, int a) const {
    int k = static_cast<int>(n % grid.ntheta());
    return a == 0 ? -grid.s(k) : grid.c(k);
  }
};

/// delta_a f = d_a f - nu_a f_theta for a degree-0 field f.
void horizontal_derivative_bulk(const GridGeometry& geo, std::span<const double> f, int axis, std::span<double> out);
/// Both horizontal derivatives, sharing one fiber transform.
void horizontal_gradient_bulk(const GridGeometry& geo, std::span<const double> f, std::span<double> d0,
                              std::span<double> d1);

}  // namespace finsler::bundle
