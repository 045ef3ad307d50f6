#pragma once

#include <functional>
#include <span>
#include <vector>

#include "finsler/linalg.hpp"
#include "finsler/torus.hpp"

namespace finsler::oracles {

/// Closed-form Randers fundamental tensor for F = sqrt(a(y,y)) + b.y:
/// g_ij = (F / alpha)(a_ij - l_i l_j) + (l_i + b_i)(l_j + b_j), l_i = a_ij y^j / alpha.
/// Throws ConvexityViolated unless |b|_a < 1.
SquareMatrix<double> randers_closed_form(const SquareMatrix<double>& a, std::span<const double> b,
                                         std::span<const double> y);

/// u(x, t) for d_t u = exp(-2u) (u_11 + u_22) on a periodic n1 x n2 grid.
struct ConformalSolution {
  int n1 = 0, n2 = 0;
  double period1 = 0, period2 = 0;
  double t = 0.0;
  long steps = 0;
  std::vector<double> u;  // j fastest

  double h(int axis) const { return axis == 0 ? period1 / n1 : period2 / n2; }
  double at(int i, int j) const { return u[static_cast<std::size_t>(i) * n2 + j]; }
  /// Sixth-order Lagrange interpolation at a continuous point.
  double interpolate(double x1, double x2) const;
};

/// Solves the 2-D conformal-factor Ricci flow with fourth-order periodic
/// differences (second derivatives as D1 D1) and RK4; dt = cfl min(h)^2
/// unless dt > 0. Throws BlowUp on non-finite values.
ConformalSolution conformal_reference(const TorusFunction& u0, double T, int n1, int n2, double cfl = 0.1,
                                      double dt = 0.0);

/// Worst relative error of a claimed derivative against fourth-order central
/// differences over a step schedule: |fd - d| / max(1, |d|).
double fd_check(const std::function<double(std::span<const double>)>& quantity, double derivative,
                std::span<const double> point, int variable, std::span<const double> steps);
double fd_check(const std::function<double(std::span<const double>)>& quantity, double derivative,
                std::span<const double> point, int variable);

}  // namespace finsler::oracles
