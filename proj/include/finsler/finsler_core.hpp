#pragma once

#include <optional>
#include <span>
#include <vector>

#include "finsler/jet.hpp"
#include "finsler/linalg.hpp"
#include "finsler/structure.hpp"

namespace finsler {

/// A point z = (x, y) of TM_0 with cached F and F^2.
struct PointFrame {
  std::vector<double> x;
  std::vector<double> y;
  double F = 0.0;
  double F2 = 0.0;
};

/// Validates y != 0 and fills the F caches. Throws NonPositiveF.
PointFrame make_point(const AnalyticFinslerStructure& S, std::vector<double> x, std::vector<double> y);

/// Taylor expansion of F^2 about (x, y) in all 2n variables and the chain of
/// connection quantities derived from it. Each quantity is itself a jet, so
/// its x- and y-derivatives are available to the order left over.
///
/// Orders consumed: g and G lose 2, N, C, delta g, Gamma and gamma lose 3,
/// R^i_k loses 4. Request order 4 for curvature values, 6 for Ric_jk.
class LocalGeometry {
 public:
  LocalGeometry(const AnalyticFinslerStructure& S, std::span<const double> x, std::span<const double> y, int order);

  int dimension() const { return n_; }
  int order() const { return order_; }

  Jet dx(const Jet& f, int i) const { return partial(f, i); }
  Jet dy(const Jet& f, int i) const { return partial(f, n_ + i); }
  /// delta_j f = d f/dx^j - N^l_j d f/dy^l.
  Jet delta(const Jet& f, int j) const;

  const Jet& y(int i) const { return yj_[i]; }
  const Jet& f2() const { return f2_; }
  const SquareMatrix<Jet>& metric() const;
  const SquareMatrix<Jet>& inverse_metric() const;
  const std::vector<Jet>& spray() const;
  const SquareMatrix<Jet>& nonlinear_connection() const;
  const Tensor3<Jet>& cartan_lower() const;
  const Tensor3<Jet>& cartan_mixed() const;
  /// D(j, h, k) = delta_j g_hk.
  const Tensor3<Jet>& delta_metric() const;
  const Tensor3<Jet>& h_connection() const;
  const Tensor3<Jet>& formal_christoffel() const;
  const SquareMatrix<Jet>& reduced_curvature() const;
  const Jet& ricci_scalar() const;

 private:
  int n_;
  int order_;
  std::vector<Jet> xj_, yj_;
  Jet f2_;
  mutable std::optional<SquareMatrix<Jet>> g_, ginv_, N_, R_;
  mutable std::optional<std::vector<Jet>> G_;
  mutable std::optional<Tensor3<Jet>> C_, Cm_, Dg_, Gamma_, gamma_;
  mutable std::optional<Jet> ric_;
};

struct CartanTensor {
  Tensor3<double> lower;  // C_ijk
  Tensor3<double> mixed;  // C^i_jk
};

double eval_F(const AnalyticFinslerStructure& S, const PointFrame& p);
SquareMatrix<double> fundamental_tensor(const AnalyticFinslerStructure& S, const PointFrame& p);
CartanTensor cartan_tensor(const AnalyticFinslerStructure& S, const PointFrame& p);
std::vector<double> spray(const AnalyticFinslerStructure& S, const PointFrame& p);
Tensor3<double> formal_christoffel(const AnalyticFinslerStructure& S, const PointFrame& p);
SquareMatrix<double> nonlinear_connection(const AnalyticFinslerStructure& S, const PointFrame& p);
Tensor3<double> cartan_h_connection(const AnalyticFinslerStructure& S, const PointFrame& p);
/// nabla_l g_jk by the Cartan horizontal covariant derivative, indexed (l, j, k).
Tensor3<double> horizontal_metric_derivative(const AnalyticFinslerStructure& S, const PointFrame& p);

/// Analytic gauge field xi^k = g^{mn}(-Gamma^k_mn + Gamma_bar^k_mn) at (x, y).
std::vector<double> deturck_field(const AnalyticFinslerStructure& S, const AnalyticFinslerStructure& background,
                                  const PointFrame& p);

/// Harmonic-map Laplacian of a torus diffeomorphism phi: (M, g) -> (M, h) at
/// the line element (x, y):
/// g^{pq}(d_pq phi^i - d_k phi^i Gamma^k_pq + Gamma_bar^i_kh d_p phi^k d_q phi^h),
/// with Gamma_bar evaluated at (phi(x), dphi y).
std::vector<double> harmonic_map_laplacian(const AnalyticFinslerStructure& domain,
                                           const AnalyticFinslerStructure& codomain, const AnalyticDiffeo& phi,
                                           const PointFrame& p);

template <class T>
Tensor3<double> values_of(const Tensor3<T>& t) {
  Tensor3<double> r(t.size());
  for (int i = 0; i < t.size(); ++i)
    for (int j = 0; j < t.size(); ++j)
      for (int k = 0; k < t.size(); ++k) r(i, j, k) = value_of(t(i, j, k));
  return r;
}

}  // namespace finsler
