#pragma once

#include "finsler/finsler_core.hpp"

namespace finsler {

struct ReducedCurvature {
  SquareMatrix<double> R;  // R^i_k
  double ric = 0.0;        // trace R^i_i
};

/// R^i_k = F^{-2} (2 dG^i/dx^k - y^j d^2G^i/dx^j dy^k + 2 G^j d^2G^i/dy^j dy^k
///                 - dG^i/dy^j dG^j/dy^k).
ReducedCurvature reduced_curvature(const AnalyticFinslerStructure& S, const PointFrame& p);
double ricci_scalar(const AnalyticFinslerStructure& S, const PointFrame& p);

/// Akbar-Zadeh Ricci tensor Ric_jk = d^2/dy^j dy^k (F^2 Ric / 2).
SquareMatrix<double> akbar_zadeh_ricci(const AnalyticFinslerStructure& S, const PointFrame& p);

/// Cartan hh-curvature R^i_jkm (indexed (i, j, k, m)), built from delta-derivatives
/// of Gamma plus the R^s_km C^i_sj term with R^s_km = delta_k N^s_m - delta_m N^s_k.
Tensor4<double> hh_curvature(const AnalyticFinslerStructure& S, const PointFrame& p);

/// l^p R^s_psq l^q with l = y / F.
double ricci_via_hh(const AnalyticFinslerStructure& S, const PointFrame& p);

}  // namespace finsler
