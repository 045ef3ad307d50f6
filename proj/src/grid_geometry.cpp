#include "finsler/grid_geometry.hpp"

#include <cmath>
#include <mutex>

#if defined(__GLIBC__)
#include <malloc.h>
#endif

#include "finsler/errors.hpp"

namespace finsler::bundle {

namespace {

using Array = GridGeometry::Array;

// Polar tensor basis at angle index k, as symmetric triples (11, 12, 22).
struct Basis {
  double rr[3], sh[3], tt[3];
};

Basis basis(double c, double s) {
  return {{c * c, c * s, s * s}, {-2 * c * s, c * c - s * s, 2 * c * s}, {s * s, -c * s, c * c}};
}

// Field arrays are large and short-lived; keeping them on the heap instead of
// fresh mmap pages avoids a page-fault storm on every rhs evaluation.
void tune_allocator() {
#if defined(__GLIBC__)
  static std::once_flag once;
  std::call_once(once, [] {
    mallopt(M_MMAP_THRESHOLD, 1 << 30);
    mallopt(M_TRIM_THRESHOLD, 1 << 30);
  });
#endif
}

}  // namespace

GridGeometry::GridGeometry(const ScalarBundleField& f, FiberScheme sch, GeometryLevel lvl, bool strict)
    : grid(f.grid()), scheme(sch), level(lvl) {
  if (f.degree() != 2) throw DegreeMismatch("geometry needs the degree-2 field F^2");
  tune_allocator();
  const std::size_t M = grid.size();
  const int nt = grid.ntheta();
  std::vector<Basis> bases(nt);
  for (int k = 0; k < nt; ++k) bases[k] = basis(grid.c(k), grid.s(k));
  phi = f.values();
  phi_t.resize(M);
  phi_tt.resize(M);
  Array phi_ttt;
  if (level == GeometryLevel::Connection) {
    phi_ttt.resize(M);
    fiber_derivatives(grid, scheme, phi, phi_t, phi_tt, phi_ttt);
  } else {
    fiber_derivatives(grid, scheme, phi, phi_t, phi_tt);
  }

  for (auto& a : g) a.resize(M);
  for (auto& a : ginv) a.resize(M);
  min_eig.resize(M);
  for (std::size_t n = 0, k = 0; n < M; ++n, k = next_angle(k, nt)) {
    const Basis& b = bases[k];
    double A = phi[n], B = 0.5 * phi_t[n], E = 0.5 * phi_tt[n] + phi[n];
    double g11 = A * b.rr[0] + B * b.sh[0] + E * b.tt[0];
    double g12 = A * b.rr[1] + B * b.sh[1] + E * b.tt[1];
    double g22 = A * b.rr[2] + B * b.sh[2] + E * b.tt[2];
    double det = g11 * g22 - g12 * g12;
    double half_tr = 0.5 * (g11 + g22);
    double lo = half_tr - std::sqrt(std::max(0.0, 0.25 * (g11 - g22) * (g11 - g22) + g12 * g12));
    min_eig[n] = lo;
    if (strict && (!(phi[n] > 0) || !(lo > 0) || !(det > 0)))
      throw NotPositiveDefinite("fundamental tensor at grid node " + std::to_string(n), lo, n);
    g[0][n] = g11;
    g[1][n] = g12;
    g[2][n] = g22;
    ginv[0][n] = g22 / det;
    ginv[1][n] = -g12 / det;
    ginv[2][n] = g11 / det;
  }
  if (level == GeometryLevel::Metric) return;

  // Spray: G^i = 1/4 g^{ih} (y^j d_j d_{y^h} F^2 - d_h F^2) at y = e_r.
  std::array<Array, 2> phi_x, phi_tx, phi_ttx;
  for (int a = 0; a < 2; ++a) {
    phi_x[a].resize(M);
    phi_tx[a].resize(M);
    x_derivative(grid, phi, a, phi_x[a]);
    x_derivative(grid, phi_t, a, phi_tx[a]);
    if (level == GeometryLevel::Connection) {
      phi_ttx[a].resize(M);
      x_derivative(grid, phi_tt, a, phi_ttx[a]);
    }
  }
  for (auto& a : G) a.resize(M);
  for (std::size_t n = 0, k = 0; n < M; ++n, k = next_angle(k, nt)) {
    double c = grid.c(k), s = grid.s(k);
    double radial = 2 * (c * phi_x[0][n] + s * phi_x[1][n]);
    double tangential = c * phi_tx[0][n] + s * phi_tx[1][n];
    double w0 = radial * c - tangential * s - phi_x[0][n];
    double w1 = radial * s + tangential * c - phi_x[1][n];
    G[0][n] = 0.25 * (ginv[0][n] * w0 + ginv[1][n] * w1);
    G[1][n] = 0.25 * (ginv[1][n] * w0 + ginv[2][n] * w1);
  }
  std::array<Array, 2> G_tt;
  std::array<Array, 4> Gx, Gtx;  // [i * 2 + j]
  for (int i = 0; i < 2; ++i) {
    G_t[i].resize(M);
    G_tt[i].resize(M);
    fiber_derivatives(grid, scheme, G[i], G_t[i], G_tt[i]);
    for (int j = 0; j < 2; ++j) {
      Gx[i * 2 + j].resize(M);
      Gtx[i * 2 + j].resize(M);
      x_derivative(grid, G[i], j, Gx[i * 2 + j]);
      x_derivative(grid, G_t[i], j, Gtx[i * 2 + j]);
    }
  }
  for (auto& a : N) a.resize(M);
  for (auto& a : nu) a.resize(M);
  ric.resize(M);
  for (std::size_t n = 0, k = 0; n < M; ++n, k = next_angle(k, nt)) {
    const double er[2] = {grid.c(k), grid.s(k)};
    const double et[2] = {-grid.s(k), grid.c(k)};
    const Basis& b = bases[k];
    double Nn[2][2];
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j) {
        Nn[i][j] = 2 * G[i][n] * er[j] + G_t[i][n] * et[j];
        N[i * 2 + j][n] = Nn[i][j];
      }
    for (int j = 0; j < 2; ++j) nu[j][n] = Nn[0][j] * et[0] + Nn[1][j] * et[1];
    double t1 = 2 * (Gx[0][n] + Gx[3][n]);
    double t2 = 0.0, t3 = 0.0, t4 = 0.0;
    for (int i = 0; i < 2; ++i) {
      for (int j = 0; j < 2; ++j) {
        // y^j d_j d_{y^i} G^i
        t2 += er[j] * (2 * Gx[i * 2 + j][n] * er[i] + Gtx[i * 2 + j][n] * et[i]);
        // G^j d_{y^j} d_{y^i} G^i
        double H = 2 * G[i][n] * b.rr[sym(j, i)] + G_t[i][n] * b.sh[sym(j, i)] +
                   (G_tt[i][n] + 2 * G[i][n]) * b.tt[sym(j, i)];
        t3 += 2 * G[j][n] * H;
        t4 += Nn[i][j] * Nn[j][i];
      }
    }
    ric[n] = (t1 - t2 + t3 - t4) / phi[n];
  }
  if (level != GeometryLevel::Connection) return;

  cartan.resize(M);
  for (auto& a : dg) a.resize(M);
  for (auto& a : Gamma) a.resize(M);
  for (std::size_t n = 0, k = 0; n < M; ++n, k = next_angle(k, nt)) {
    const Basis& b = bases[k];
    double cc = 0.5 * phi_ttt[n] + 2 * phi_t[n];
    cartan[n] = cc;
    double D[2][3];
    for (int j = 0; j < 2; ++j) {
      double A = phi_x[j][n], B = 0.5 * phi_tx[j][n], E = 0.5 * phi_ttx[j][n] + phi_x[j][n];
      for (int q = 0; q < 3; ++q) {
        D[j][q] = A * b.rr[q] + B * b.sh[q] + E * b.tt[q] - nu[j][n] * cc * b.tt[q];
        dg[j * 3 + q][n] = D[j][q];
      }
    }
    const double gi[2][2] = {{ginv[0][n], ginv[1][n]}, {ginv[1][n], ginv[2][n]}};
    for (int j = 0; j < 2; ++j)
      for (int kk = j; kk < 2; ++kk) {
        double low[2];
        for (int h = 0; h < 2; ++h) low[h] = 0.5 * (D[j][sym(h, kk)] + D[kk][sym(j, h)] - D[h][sym(j, kk)]);
        for (int i = 0; i < 2; ++i) Gamma[i * 3 + sym(j, kk)][n] = gi[i][0] * low[0] + gi[i][1] * low[1];
      }
  }
}

void horizontal_derivative_bulk(const GridGeometry& geo, std::span<const double> f, int axis, std::span<double> out) {
  const std::size_t M = geo.size();
  std::vector<double> ft(M);
  fiber_derivatives(geo.grid, geo.scheme, f, ft);
  x_derivative(geo.grid, f, axis, out);
  const auto& nu = geo.nu[axis];
  for (std::size_t n = 0; n < M; ++n) out[n] -= nu[n] * ft[n];
}

void horizontal_gradient_bulk(const GridGeometry& geo, std::span<const double> f, std::span<double> d0,
                              std::span<double> d1) {
  const std::size_t M = geo.size();
  std::vector<double> ft(M);
  fiber_derivatives(geo.grid, geo.scheme, f, ft);
  x_derivative(geo.grid, f, 0, d0);
  x_derivative(geo.grid, f, 1, d1);
  for (std::size_t n = 0; n < M; ++n) {
    d0[n] -= geo.nu[0][n] * ft[n];
    d1[n] -= geo.nu[1][n] * ft[n];
  }
}

}  // namespace finsler::bundle
