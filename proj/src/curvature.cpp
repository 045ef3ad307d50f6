#include "finsler/curvature.hpp"

namespace finsler {

ReducedCurvature reduced_curvature(const AnalyticFinslerStructure& S, const PointFrame& p) {
  LocalGeometry geo(S, p.x, p.y, 4);
  return {values_of(geo.reduced_curvature()), geo.ricci_scalar().value()};
}

double ricci_scalar(const AnalyticFinslerStructure& S, const PointFrame& p) {
  LocalGeometry geo(S, p.x, p.y, 4);
  return geo.ricci_scalar().value();
}

SquareMatrix<double> akbar_zadeh_ricci(const AnalyticFinslerStructure& S, const PointFrame& p) {
  LocalGeometry geo(S, p.x, p.y, 6);
  const int n = geo.dimension();
  Jet potential = 0.5 * (geo.f2() * geo.ricci_scalar());
  SquareMatrix<double> out(n);
  for (int j = 0; j < n; ++j) {
    Jet dj = geo.dy(potential, j);
    for (int k = j; k < n; ++k) {
      out(j, k) = geo.dy(dj, k).value();
      out(k, j) = out(j, k);
    }
  }
  return out;
}

namespace {

Tensor4<double> hh_from(const LocalGeometry& geo) {
  const int n = geo.dimension();
  const auto& Gam = geo.h_connection();
  const auto& N = geo.nonlinear_connection();
  const auto& Cm = geo.cartan_mixed();
  Tensor3<double> Rs(n);  // R^s_km
  for (int s = 0; s < n; ++s)
    for (int k = 0; k < n; ++k)
      for (int m = 0; m < n; ++m) Rs(s, k, m) = geo.delta(N(s, m), k).value() - geo.delta(N(s, k), m).value();
  Tensor4<double> dGam(n);  // delta_k Gamma^i_jm stored as (i, j, m, k)
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int m = j; m < n; ++m)
        for (int k = 0; k < n; ++k) {
          dGam(i, j, m, k) = geo.delta(Gam(i, j, m), k).value();
          dGam(i, m, j, k) = dGam(i, j, m, k);
        }
  Tensor4<double> R(n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k)
        for (int m = 0; m < n; ++m) {
          double v = dGam(i, j, m, k) - dGam(i, j, k, m);
          for (int s = 0; s < n; ++s) {
            v += Gam(i, s, k).value() * Gam(s, j, m).value() - Gam(i, s, m).value() * Gam(s, j, k).value();
            v += Rs(s, k, m) * Cm(i, s, j).value();
          }
          R(i, j, k, m) = v;
        }
  return R;
}

}  // namespace

Tensor4<double> hh_curvature(const AnalyticFinslerStructure& S, const PointFrame& p) {
  LocalGeometry geo(S, p.x, p.y, 4);
  return hh_from(geo);
}

double ricci_via_hh(const AnalyticFinslerStructure& S, const PointFrame& p) {
  LocalGeometry geo(S, p.x, p.y, 4);
  const int n = geo.dimension();
  Tensor4<double> R = hh_from(geo);
  double F = std::sqrt(geo.f2().value());
  double sum = 0.0;
  for (int s = 0; s < n; ++s)
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b) sum += (p.y[a] / F) * R(s, a, s, b) * (p.y[b] / F);
  return sum;
}

}  // namespace finsler
