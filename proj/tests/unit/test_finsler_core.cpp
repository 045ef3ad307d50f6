#include <cmath>

#include "doctest.h"
#include "finsler/errors.hpp"
#include "finsler/finsler_core.hpp"
#include "finsler/oracles.hpp"
#include "samples.hpp"

using namespace finsler;
using samples::rel;

namespace {

PointFrame at(const StructurePtr& S, std::vector<double> x, std::vector<double> y) {
  return make_point(*S, std::move(x), std::move(y));
}

double max_abs(const SquareMatrix<double>& a, const SquareMatrix<double>& b) {
  double m = 0.0;
  for (int i = 0; i < a.size(); ++i)
    for (int j = 0; j < a.size(); ++j) m = std::max(m, std::abs(a(i, j) - b(i, j)));
  return m;
}

}  // namespace

TEST_CASE("eval_F examples") {
  auto E = make_euclidean(2);
  CHECK(eval_F(*E, at(E, {0.3, 1.0}, {3, 4})) == doctest::Approx(5.0).epsilon(1e-15));
  auto R = samples::randers(0.3, 0.0);
  CHECK(eval_F(*R, at(R, {0, 0}, {1, 0})) == doctest::Approx(1.3).epsilon(1e-15));
  for (const auto& s : samples::analytic(30)) {
    double f1 = eval_F(*s.S, at(s.S, s.x, s.y));
    double f2 = eval_F(*s.S, at(s.S, s.x, {2 * s.y[0], 2 * s.y[1]}));
    CHECK(std::abs(f2 - 2 * f1) <= 1e-14 * f2);
  }
}

TEST_CASE("make_point rejects the zero vector") {
  auto E = make_euclidean(2);
  CHECK_THROWS_AS(make_point(*E, {0, 0}, {0, 0}), NonPositiveF);
}

TEST_CASE("fundamental_tensor examples") {
  auto E = make_euclidean(2);
  auto g = fundamental_tensor(*E, at(E, {1, 2}, {0.3, -0.7}));
  CHECK(max_abs(g, SquareMatrix<double>::identity(2)) <= 1e-15);

  auto R = samples::randers(0.3, 0.0);
  auto gR = fundamental_tensor(*R, at(R, {0, 0}, {1, 0}));
  SquareMatrix<double> a = SquareMatrix<double>::identity(2);
  double b[2] = {0.3, 0.0}, y[2] = {1.0, 0.0};
  CHECK(max_abs(gR, oracles::randers_closed_form(a, b, y)) <= 1e-12);

  // Riemannian: g = a(x), independent of y
  auto G = samples::general_riemannian();
  std::vector<double> x{0.7, -1.1};
  auto* rs = dynamic_cast<const RiemannianStructure*>(G.get());
  REQUIRE(rs);
  auto ax = rs->metric<double>(x);
  for (double th : {0.0, 0.4, 2.0, 4.5}) {
    auto gx = fundamental_tensor(*G, at(G, x, {std::cos(th), std::sin(th)}));
    CHECK(max_abs(gx, ax) <= 1e-14);
  }
}

TEST_CASE("cartan_tensor examples") {
  auto G = samples::general_riemannian();
  auto C = cartan_tensor(*G, at(G, {0.2, 0.9}, {1.0, 2.0}));
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j)
      for (int k = 0; k < 2; ++k) CHECK(std::abs(C.lower(i, j, k)) <= 1e-14);

  auto R = samples::randers(0.3, 0.0);
  std::vector<double> y{1.0, 0.0};
  auto CR = cartan_tensor(*R, at(R, {0, 0}, y));
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) CHECK(std::abs(CR.lower(i, j, 0) * y[0] + CR.lower(i, j, 1) * y[1]) <= 1e-12);

  // y = (0, 1): C_ijk = 1/2 d g_ij / dy^k against fourth-order differences of g
  std::vector<double> y2{0.0, 1.0};
  auto C2 = cartan_tensor(*R, at(R, {0, 0}, y2));
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j)
      for (int k = 0; k < 2; ++k) {
        auto gij = [&](std::span<const double> yy) {
          return fundamental_tensor(*R, at(R, {0, 0}, {yy[0], yy[1]}))(i, j);
        };
        CHECK(oracles::fd_check(gij, 2 * C2.lower(i, j, k), y2, k) <= 1e-8);
      }
}

TEST_CASE("cartan tensor is totally symmetric and C^i_jk = g^ih C_hjk") {
  for (const auto& s : samples::analytic(30, 7)) {
    auto p = at(s.S, s.x, s.y);
    auto C = cartan_tensor(*s.S, p);
    auto g = fundamental_tensor(*s.S, p);
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j)
        for (int k = 0; k < 2; ++k) {
          CHECK(std::abs(C.lower(i, j, k) - C.lower(j, i, k)) <= 1e-13);
          CHECK(std::abs(C.lower(i, j, k) - C.lower(k, j, i)) <= 1e-13);
          double lowered = g(i, 0) * C.mixed(0, j, k) + g(i, 1) * C.mixed(1, j, k);
          CHECK(std::abs(lowered - C.lower(i, j, k)) <= 1e-12);
        }
  }
}

TEST_CASE("spray examples") {
  auto E = make_euclidean(2);
  auto G0 = spray(*E, at(E, {1, 1}, {0.5, 2}));
  CHECK(std::abs(G0[0]) + std::abs(G0[1]) == 0.0);

  samples::ConformalOracle o{0.1};
  auto C = samples::conformal(0.1);
  for (double x1 : {0.0, 0.6, 2.2, 4.0}) {
    std::vector<double> y{0.8, -0.3};
    auto G = spray(*C, at(C, {x1, 0.4}, y));
    for (int i = 0; i < 2; ++i) {
      double ref = 0.0;
      for (int j = 0; j < 2; ++j)
        for (int k = 0; k < 2; ++k) ref += 0.5 * o.christoffel(i, j, k, x1) * y[j] * y[k];
      CHECK(std::abs(G[i] - ref) <= 1e-10);
    }
  }
  for (const auto& s : samples::analytic(30, 3)) {
    auto G1 = spray(*s.S, at(s.S, s.x, s.y));
    auto G2 = spray(*s.S, at(s.S, s.x, {2 * s.y[0], 2 * s.y[1]}));
    for (int i = 0; i < 2; ++i) CHECK(std::abs(G2[i] - 4 * G1[i]) <= 1e-12 * std::max(1.0, std::abs(G2[i])));
  }
}

TEST_CASE("formal_christoffel examples") {
  auto E = make_euclidean(2);
  auto g0 = formal_christoffel(*E, at(E, {0, 0}, {1, 1}));
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j)
      for (int k = 0; k < 2; ++k) CHECK(g0(i, j, k) == 0.0);

  samples::ConformalOracle o{0.1};
  auto C = samples::conformal(0.1);
  for (double x1 : {0.3, 1.9, 5.1}) {
    auto gam = formal_christoffel(*C, at(C, {x1, 2.0}, {0.1, 1.0}));
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j)
        for (int k = 0; k < 2; ++k) {
          CHECK(std::abs(gam(i, j, k) - o.christoffel(i, j, k, x1)) <= 1e-10);
          CHECK(gam(i, j, k) == gam(i, k, j));
        }
  }
  for (const auto& s : samples::analytic(15, 11)) {
    auto gam = formal_christoffel(*s.S, at(s.S, s.x, s.y));
    for (int i = 0; i < 2; ++i) CHECK(gam(i, 0, 1) == gam(i, 1, 0));
  }
}

TEST_CASE("nonlinear_connection examples") {
  auto E = make_euclidean(2);
  auto N0 = nonlinear_connection(*E, at(E, {0, 0}, {1, 0}));
  CHECK(max_abs(N0, SquareMatrix<double>(2)) == 0.0);

  auto G = samples::general_riemannian();
  std::vector<double> y{0.6, -1.2};
  auto p = at(G, {1.3, 0.2}, y);
  auto N = nonlinear_connection(*G, p);
  auto gam = formal_christoffel(*G, p);
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) CHECK(std::abs(N(i, j) - (gam(i, j, 0) * y[0] + gam(i, j, 1) * y[1])) <= 1e-10);
}

TEST_CASE("cartan_h_connection examples") {
  auto E = make_euclidean(2);
  auto G0 = cartan_h_connection(*E, at(E, {0, 0}, {1, 0}));
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j)
      for (int k = 0; k < 2; ++k) CHECK(G0(i, j, k) == 0.0);

  auto R = samples::general_riemannian();
  auto p = at(R, {2.1, 0.5}, {1.0, 0.25});
  auto Gam = cartan_h_connection(*R, p);
  auto gam = formal_christoffel(*R, p);
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j)
      for (int k = 0; k < 2; ++k) CHECK(std::abs(Gam(i, j, k) - gam(i, j, k)) <= 1e-10);

  for (const auto& s : samples::analytic(30, 5)) {
    if (s.family != "randers") continue;
    auto nab = horizontal_metric_derivative(*s.S, at(s.S, s.x, s.y));
    for (int l = 0; l < 2; ++l)
      for (int j = 0; j < 2; ++j)
        for (int k = 0; k < 2; ++k) CHECK(std::abs(nab(l, j, k)) <= 1e-9);
  }
}

TEST_CASE("homogeneity suite") {
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> lam(1e-3, 4.0);
  for (const auto& s : samples::analytic(100, 2024)) {
    double l = lam(rng);
    auto p = at(s.S, s.x, s.y);
    auto q = at(s.S, s.x, {l * s.y[0], l * s.y[1]});
    CHECK(std::abs(eval_F(*s.S, q) - l * eval_F(*s.S, p)) <= 1e-12 * eval_F(*s.S, q));
    CHECK(max_abs(fundamental_tensor(*s.S, q), fundamental_tensor(*s.S, p)) <= 1e-12);
    auto Gp = spray(*s.S, p), Gq = spray(*s.S, q);
    auto Np = nonlinear_connection(*s.S, p), Nq = nonlinear_connection(*s.S, q);
    for (int i = 0; i < 2; ++i) {
      CHECK(std::abs(Gq[i] - l * l * Gp[i]) <= 1e-12 * std::max(1.0, std::abs(Gq[i])));
      for (int j = 0; j < 2; ++j) CHECK(std::abs(Nq(i, j) - l * Np(i, j)) <= 1e-11 * std::max(1.0, std::abs(Nq(i, j))));
    }
  }
}

TEST_CASE("Euler identities") {
  for (const auto& s : samples::analytic(60, 31)) {
    auto p = at(s.S, s.x, s.y);
    const auto& y = s.y;
    auto g = fundamental_tensor(*s.S, p);
    double gyy = 0.0;
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j) gyy += g(i, j) * y[i] * y[j];
    CHECK(rel(gyy, p.F2) <= 1e-10);
    auto C = cartan_tensor(*s.S, p);
    auto G = spray(*s.S, p);
    auto N = nonlinear_connection(*s.S, p);
    auto Gam = cartan_h_connection(*s.S, p);
    for (int i = 0; i < 2; ++i) {
      CHECK(rel(N(i, 0) * y[0] + N(i, 1) * y[1], 2 * G[i]) <= 1e-10);
      for (int j = 0; j < 2; ++j) {
        CHECK(std::abs(C.lower(i, j, 0) * y[0] + C.lower(i, j, 1) * y[1]) <= 1e-10);
        CHECK(rel(Gam(i, j, 0) * y[0] + Gam(i, j, 1) * y[1], N(i, j)) <= 1e-10);
      }
    }
  }
}

TEST_CASE("Riemannian reduction") {
  auto R = samples::general_riemannian();
  for (const auto& s : samples::analytic(12, 77)) {
    auto p = at(R, s.x, s.y);
    auto C = cartan_tensor(*R, p);
    auto Gam = cartan_h_connection(*R, p);
    auto gam = formal_christoffel(*R, p);
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j)
        for (int k = 0; k < 2; ++k) {
          CHECK(std::abs(C.lower(i, j, k)) <= 1e-13);
          CHECK(std::abs(Gam(i, j, k) - gam(i, j, k)) <= 1e-12);
        }
  }
}

TEST_CASE("jet derivatives match central differences") {
  // step 1e-5 central differences: truncation ~1e-10, roundoff ~1e-11
  const double h = 1e-5;
  for (const auto& s : samples::analytic(24, 4242)) {
    LocalGeometry geo(*s.S, s.x, s.y, 2);
    auto f2 = [&](double y0, double y1) {
      double yy[2] = {y0, y1};
      return s.S->f_squared(std::span<const double>(s.x), std::span<const double>(yy, 2));
    };
    for (int i = 0; i < 2; ++i) {
      double e[2] = {i == 0 ? h : 0.0, i == 1 ? h : 0.0};
      double fd = (f2(s.y[0] + e[0], s.y[1] + e[1]) - f2(s.y[0] - e[0], s.y[1] - e[1])) / (2 * h);
      CHECK(rel(geo.dy(geo.f2(), i).value(), fd) <= 1e-7);
      for (int j = 0; j < 2; ++j) {
        double d[2] = {j == 0 ? h : 0.0, j == 1 ? h : 0.0};
        auto dfi = [&](double y0, double y1) {
          LocalGeometry g2(*s.S, s.x, std::vector<double>{y0, y1}, 1);
          return g2.dy(g2.f2(), i).value();
        };
        double fd2 = (dfi(s.y[0] + d[0], s.y[1] + d[1]) - dfi(s.y[0] - d[0], s.y[1] - d[1])) / (2 * h);
        CHECK(rel(geo.dy(geo.dy(geo.f2(), i), j).value(), fd2) <= 1e-7);
      }
    }
  }
}

TEST_CASE("Randers construction enforces |b|_a < 1") {
  CHECK_THROWS_AS(samples::randers(1.0, 0.2), ConvexityViolated);
  CHECK_NOTHROW(samples::randers(0.6, 0.2));
}

TEST_CASE("pulled-back and perturbed structures stay strongly convex") {
  auto base = samples::randers(0.2, 0.1, "cos 0.1 1 0 0");
  auto pert = make_scalar_perturbation(base, 0.05, TorusFunction::parse("bump 1 1 2", 2));
  auto pulled = make_pulled_back(pert, AnalyticDiffeo::parse("sin 0.1 0 1 0 0", 2));
  for (const auto& s : samples::analytic(20, 8)) {
    auto g = fundamental_tensor(*pulled, at(pulled, s.x, s.y));
    CHECK(min_eigenvalue(g) > 0.0);
  }
}
