#include "finsler/finsler_core.hpp"

#include <cmath>

#include "finsler/errors.hpp"

namespace finsler {

PointFrame make_point(const AnalyticFinslerStructure& S, std::vector<double> x, std::vector<double> y) {
  const int n = S.dimension();
  if (static_cast<int>(x.size()) != n || static_cast<int>(y.size()) != n)
    throw std::invalid_argument("make_point: dimension mismatch");
  double norm = 0.0;
  for (double v : y) norm += v * v;
  if (norm == 0.0) throw NonPositiveF("fiber vector y = 0");
  PointFrame p{std::move(x), std::move(y), 0.0, 0.0};
  p.F2 = S.f_squared(std::span<const double>(p.x), std::span<const double>(p.y));
  if (!(p.F2 > 0.0)) throw NonPositiveF("F^2 <= 0 at a nonzero y");
  p.F = std::sqrt(p.F2);
  return p;
}

LocalGeometry::LocalGeometry(const AnalyticFinslerStructure& S, std::span<const double> x, std::span<const double> y,
                             int order)
    : n_(S.dimension()), order_(order) {
  const JetLayout& L = JetLayout::get(2 * n_, order);
  for (int i = 0; i < n_; ++i) {
    xj_.push_back(Jet::variable(L, i, x[i], order));
    yj_.push_back(Jet::variable(L, n_ + i, y[i], order));
  }
  f2_ = S.f_squared(std::span<const Jet>(xj_), std::span<const Jet>(yj_));
  if (!(f2_.value() > 0.0)) throw NonPositiveF("F^2 <= 0");
}

Jet LocalGeometry::delta(const Jet& f, int j) const {
  const auto& N = nonlinear_connection();
  Jet r = dx(f, j);
  for (int l = 0; l < n_; ++l) r -= N(l, j) * dy(f, l);
  return r;
}

const SquareMatrix<Jet>& LocalGeometry::metric() const {
  if (!g_) {
    SquareMatrix<Jet> g(n_);
    std::vector<Jet> grad;
    for (int i = 0; i < n_; ++i) grad.push_back(dy(f2_, i));
    for (int i = 0; i < n_; ++i)
      for (int j = i; j < n_; ++j) {
        g(i, j) = 0.5 * dy(grad[i], j);
        g(j, i) = g(i, j);
      }
    g_ = std::move(g);
  }
  return *g_;
}

const SquareMatrix<Jet>& LocalGeometry::inverse_metric() const {
  if (!ginv_) ginv_ = spd_inverse(metric(), "fundamental tensor");
  return *ginv_;
}

const std::vector<Jet>& LocalGeometry::spray() const {
  if (!G_) {
    const auto& ginv = inverse_metric();
    std::vector<Jet> w(n_);
    for (int h = 0; h < n_; ++h) {
      Jet dyh = dy(f2_, h);
      Jet s = -dx(f2_, h);
      for (int j = 0; j < n_; ++j) s += dx(dyh, j) * yj_[j];
      w[h] = s;
    }
    std::vector<Jet> G(n_);
    for (int i = 0; i < n_; ++i) {
      Jet s(0.0);
      for (int h = 0; h < n_; ++h) s += ginv(i, h) * w[h];
      G[i] = 0.25 * s;
    }
    G_ = std::move(G);
  }
  return *G_;
}

const SquareMatrix<Jet>& LocalGeometry::nonlinear_connection() const {
  if (!N_) {
    const auto& G = spray();
    SquareMatrix<Jet> N(n_);
    for (int i = 0; i < n_; ++i)
      for (int j = 0; j < n_; ++j) N(i, j) = dy(G[i], j);
    N_ = std::move(N);
  }
  return *N_;
}

const Tensor3<Jet>& LocalGeometry::cartan_lower() const {
  if (!C_) {
    const auto& g = metric();
    Tensor3<Jet> C(n_);
    for (int i = 0; i < n_; ++i)
      for (int j = 0; j < n_; ++j)
        for (int k = 0; k < n_; ++k) C(i, j, k) = 0.5 * dy(g(j, k), i);
    C_ = std::move(C);
  }
  return *C_;
}

const Tensor3<Jet>& LocalGeometry::cartan_mixed() const {
  if (!Cm_) {
    const auto& C = cartan_lower();
    const auto& ginv = inverse_metric();
    Tensor3<Jet> Cm(n_);
    for (int i = 0; i < n_; ++i)
      for (int j = 0; j < n_; ++j)
        for (int k = 0; k < n_; ++k) {
          Jet s(0.0);
          for (int h = 0; h < n_; ++h) s += ginv(i, h) * C(h, j, k);
          Cm(i, j, k) = s;
        }
    Cm_ = std::move(Cm);
  }
  return *Cm_;
}

const Tensor3<Jet>& LocalGeometry::delta_metric() const {
  if (!Dg_) {
    const auto& g = metric();
    Tensor3<Jet> D(n_);
    for (int j = 0; j < n_; ++j)
      for (int h = 0; h < n_; ++h)
        for (int k = h; k < n_; ++k) {
          D(j, h, k) = delta(g(h, k), j);
          D(j, k, h) = D(j, h, k);
        }
    Dg_ = std::move(D);
  }
  return *Dg_;
}

namespace {

Tensor3<Jet> christoffel_from(const Tensor3<Jet>& D, const SquareMatrix<Jet>& ginv, int n) {
  // D(j, h, k) is a derivative of g_hk along coordinate j.
  Tensor3<Jet> out(n);
  for (int j = 0; j < n; ++j)
    for (int k = j; k < n; ++k) {
      std::vector<Jet> lower(n);
      for (int h = 0; h < n; ++h) lower[h] = 0.5 * (D(j, h, k) + D(k, j, h) - D(h, j, k));
      for (int i = 0; i < n; ++i) {
        Jet s(0.0);
        for (int h = 0; h < n; ++h) s += ginv(i, h) * lower[h];
        out(i, j, k) = s;
        out(i, k, j) = s;
      }
    }
  return out;
}

}  // namespace

const Tensor3<Jet>& LocalGeometry::h_connection() const {
  if (!Gamma_) Gamma_ = christoffel_from(delta_metric(), inverse_metric(), n_);
  return *Gamma_;
}

const Tensor3<Jet>& LocalGeometry::formal_christoffel() const {
  if (!gamma_) {
    const auto& g = metric();
    Tensor3<Jet> D(n_);
    for (int j = 0; j < n_; ++j)
      for (int h = 0; h < n_; ++h)
        for (int k = h; k < n_; ++k) {
          D(j, h, k) = dx(g(h, k), j);
          D(j, k, h) = D(j, h, k);
        }
    gamma_ = christoffel_from(D, inverse_metric(), n_);
  }
  return *gamma_;
}

const SquareMatrix<Jet>& LocalGeometry::reduced_curvature() const {
  if (!R_) {
    const auto& G = spray();
    const auto& N = nonlinear_connection();
    SquareMatrix<Jet> R(n_);
    Jet inv_f2 = reciprocal(f2_);
    for (int i = 0; i < n_; ++i) {
      for (int k = 0; k < n_; ++k) {
        Jet s = 2.0 * dx(G[i], k);
        for (int j = 0; j < n_; ++j) {
          s -= dx(N(i, k), j) * yj_[j];
          s += 2.0 * (G[j] * dy(N(i, j), k));
          s -= N(i, j) * N(j, k);
        }
        R(i, k) = inv_f2 * s;
      }
    }
    R_ = std::move(R);
  }
  return *R_;
}

const Jet& LocalGeometry::ricci_scalar() const {
  if (!ric_) {
    const auto& R = reduced_curvature();
    Jet s = R(0, 0);
    for (int i = 1; i < n_; ++i) s += R(i, i);
    ric_ = std::move(s);
  }
  return *ric_;
}

double eval_F(const AnalyticFinslerStructure& S, const PointFrame& p) {
  return make_point(S, p.x, p.y).F;
}

SquareMatrix<double> fundamental_tensor(const AnalyticFinslerStructure& S, const PointFrame& p) {
  LocalGeometry geo(S, p.x, p.y, 2);
  geo.inverse_metric();  // asserts positive definiteness
  return values_of(geo.metric());
}

CartanTensor cartan_tensor(const AnalyticFinslerStructure& S, const PointFrame& p) {
  LocalGeometry geo(S, p.x, p.y, 3);
  return {values_of(geo.cartan_lower()), values_of(geo.cartan_mixed())};
}

std::vector<double> spray(const AnalyticFinslerStructure& S, const PointFrame& p) {
  LocalGeometry geo(S, p.x, p.y, 2);
  std::vector<double> out;
  for (const auto& g : geo.spray()) out.push_back(g.value());
  return out;
}

Tensor3<double> formal_christoffel(const AnalyticFinslerStructure& S, const PointFrame& p) {
  LocalGeometry geo(S, p.x, p.y, 3);
  return values_of(geo.formal_christoffel());
}

SquareMatrix<double> nonlinear_connection(const AnalyticFinslerStructure& S, const PointFrame& p) {
  LocalGeometry geo(S, p.x, p.y, 3);
  return values_of(geo.nonlinear_connection());
}

Tensor3<double> cartan_h_connection(const AnalyticFinslerStructure& S, const PointFrame& p) {
  LocalGeometry geo(S, p.x, p.y, 3);
  return values_of(geo.h_connection());
}

Tensor3<double> horizontal_metric_derivative(const AnalyticFinslerStructure& S, const PointFrame& p) {
  LocalGeometry geo(S, p.x, p.y, 3);
  const int n = geo.dimension();
  const auto& g = geo.metric();
  const auto& D = geo.delta_metric();
  const auto& Gam = geo.h_connection();
  Tensor3<double> out(n);
  for (int l = 0; l < n; ++l)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k) {
        double s = D(l, j, k).value();
        for (int s_ = 0; s_ < n; ++s_) {
          s -= g(s_, k).value() * Gam(s_, j, l).value();
          s -= g(j, s_).value() * Gam(s_, k, l).value();
        }
        out(l, j, k) = s;
      }
  return out;
}

std::vector<double> deturck_field(const AnalyticFinslerStructure& S, const AnalyticFinslerStructure& background,
                                  const PointFrame& p) {
  LocalGeometry geo(S, p.x, p.y, 3);
  LocalGeometry bg(background, p.x, p.y, 3);
  const int n = geo.dimension();
  const auto& ginv = geo.inverse_metric();
  const auto& Gam = geo.h_connection();
  const auto& Bar = bg.h_connection();
  std::vector<double> xi(n, 0.0);
  for (int k = 0; k < n; ++k)
    for (int m = 0; m < n; ++m)
      for (int q = 0; q < n; ++q) xi[k] += ginv(m, q).value() * (Bar(k, m, q).value() - Gam(k, m, q).value());
  return xi;
}

std::vector<double> harmonic_map_laplacian(const AnalyticFinslerStructure& domain,
                                           const AnalyticFinslerStructure& codomain, const AnalyticDiffeo& phi,
                                           const PointFrame& p) {
  const int n = domain.dimension();
  const JetLayout& L = JetLayout::get(n, 2);
  std::vector<Jet> xj;
  for (int i = 0; i < n; ++i) xj.push_back(Jet::variable(L, i, p.x[i], 2));
  auto image = phi(std::span<const Jet>(xj));
  SquareMatrix<double> dphi(n);
  Tensor3<double> d2phi(n);
  for (int i = 0; i < n; ++i)
    for (int a = 0; a < n; ++a) {
      Jet da = partial(image[i], a);
      dphi(i, a) = da.value();
      for (int b = 0; b < n; ++b) d2phi(i, a, b) = partial(da, b).value();
    }
  std::vector<double> xbar(n), ybar(n, 0.0);
  for (int i = 0; i < n; ++i) {
    xbar[i] = image[i].value();
    for (int a = 0; a < n; ++a) ybar[i] += dphi(i, a) * p.y[a];
  }
  LocalGeometry geo(domain, p.x, p.y, 3);
  LocalGeometry bar(codomain, xbar, ybar, 3);
  const auto& ginv = geo.inverse_metric();
  const auto& Gam = geo.h_connection();
  const auto& Bar = bar.h_connection();
  std::vector<double> out(n, 0.0);
  for (int i = 0; i < n; ++i)
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b) {
        double term = d2phi(i, a, b);
        for (int k = 0; k < n; ++k) term -= dphi(i, k) * Gam(k, a, b).value();
        for (int k = 0; k < n; ++k)
          for (int h = 0; h < n; ++h) term += Bar(i, k, h).value() * dphi(k, a) * dphi(h, b);
        out[i] += ginv(a, b).value() * term;
      }
  return out;
}

}  // namespace finsler
