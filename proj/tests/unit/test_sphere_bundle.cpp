#include <cmath>
#include <numbers>
#include <sstream>

#include "doctest.h"
#include "finsler/errors.hpp"
#include "finsler/finsler_core.hpp"
#include "finsler/grid_geometry.hpp"
#include "finsler/sphere_bundle.hpp"
#include "samples.hpp"

using namespace finsler;
using namespace finsler::bundle;

namespace {

/// Randers over a non-conformal alpha: F^2 has every fiber harmonic.
StructurePtr rich_randers() {
  RandersSpec r;
  r.alpha.conformal = TorusFunction::parse("cos 0.1 1 0 0", 2);
  r.alpha.entries = {TorusFunction::parse("1; cos 0.2 0 1 0", 2), TorusFunction::parse("sin 0.15 1 0", 2),
                     TorusFunction::constant(1.0)};
  r.b_components = {TorusFunction::constant(0.25), TorusFunction::parse("cos 0.1 1 1 0", 2)};
  return make_randers(r);
}

PointFrame node_point(const AnalyticFinslerStructure& S, const SphereBundleGrid& g, std::size_t n) {
  auto c = g.coords(n);
  return make_point(S, {g.x1(c[0]), g.x2(c[1])}, {g.c(c[2]), g.s(c[2])});
}

}  // namespace

TEST_CASE("build_grid examples") {
  auto g = build_grid(16, 16, 16);
  CHECK(g.size() == 4096);
  CHECK(g.h(0) == doctest::Approx(2 * std::numbers::pi / 16));
  CHECK_NOTHROW(build_grid(8, 8, 8));
  CHECK_THROWS_AS(build_grid(7, 8, 8), BadResolution);
  CHECK_THROWS_AS(build_grid(8, 8, 6), BadResolution);
}

TEST_CASE("periodic index arithmetic") {
  auto g = build_grid(8, 10, 12);
  for (int i = 0; i < 8; ++i)
    for (int j = 0; j < 10; ++j)
      for (int k = 0; k < 12; ++k) {
        CHECK(g.index(i + 8, j - 10, k + 24) == g.index(i, j, k));
        auto c = g.coords(g.index(i, j, k));
        CHECK((c[0] == i && c[1] == j && c[2] == k));
      }
}

TEST_CASE("sample_structure examples") {
  auto g = build_grid(8, 8, 16);
  auto e = sample_structure(*make_euclidean(2), g);
  for (std::size_t n = 0; n < e.size(); ++n) CHECK(e[n] == doctest::Approx(1.0).epsilon(1e-15));
  auto r = sample_structure(*samples::randers(0.3, 0.0), g);
  CHECK(r.at(3, 5, 0) == doctest::Approx(1.69).epsilon(1e-14));
  auto c = sample_structure(*samples::conformal(0.1), g);
  for (int i = 0; i < 8; ++i)
    for (int k = 0; k < 16; ++k) CHECK(std::abs(c.at(i, 2, k) - std::exp(0.2 * std::cos(g.x1(i)))) <= 1e-14);
}

TEST_CASE("degree bookkeeping") {
  auto g = build_grid(8, 8, 8);
  ScalarBundleField a(g, 0), b(g, 2);
  CHECK_THROWS_AS(a + b, DegreeMismatch);
  CHECK_THROWS_AS(b * b, DegreeMismatch);
  CHECK_NOTHROW(a * b);
  CHECK_THROWS_AS(ScalarBundleField(g, 1), DegreeMismatch);
}

TEST_CASE("fiber_derivative examples") {
  auto g = build_grid(8, 8, 64);
  auto e = sample_structure(*make_euclidean(2), g);
  auto d = fiber_derivative(e, g.index(0, 0, 0));
  CHECK(std::abs(d[0] - 2.0) <= 1e-14);
  CHECK(std::abs(d[1]) <= 1e-14);
  ScalarBundleField c(g, 0, std::vector<double>(g.size(), 3.0));
  auto dc = fiber_derivative(c, g.index(1, 1, 5));
  CHECK(std::abs(dc[0]) + std::abs(dc[1]) <= 1e-14);

  auto S = rich_randers();
  auto f = sample_structure(*S, g);
  double worst = 0.0;
  for (std::size_t n = 0; n < g.size(); n += 7) {
    auto p = node_point(*S, g, n);
    LocalGeometry geo(*S, p.x, p.y, 1);
    auto grad = fiber_derivative(f, n);
    for (int i = 0; i < 2; ++i) worst = std::max(worst, std::abs(grad[i] - geo.dy(geo.f2(), i).value()));
  }
  CHECK(worst <= 1e-6);
}

TEST_CASE("homogeneous_hessian examples") {
  auto g = build_grid(8, 8, 64);
  auto e = sample_structure(*make_euclidean(2), g);
  auto H = homogeneous_hessian(e, g.index(2, 3, 9));
  CHECK(std::abs(H(0, 0) - 2) + std::abs(H(1, 1) - 2) + std::abs(H(0, 1)) <= 1e-13);

  auto S = rich_randers();
  auto f = sample_structure(*S, g);
  double worst = 0.0, euler = 0.0;
  for (std::size_t n = 0; n < g.size(); n += 5) {
    auto Hn = homogeneous_hessian(f, n);
    auto gn = fundamental_tensor(*S, node_point(*S, g, n));
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j) worst = std::max(worst, std::abs(Hn(i, j) / 2 - gn(i, j)));
    CHECK(Hn(0, 1) == Hn(1, 0));
    int k = static_cast<int>(n % g.ntheta());
    double y[2] = {g.c(k), g.s(k)};
    double c = 0.0;
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j) c += y[i] * y[j] * Hn(i, j);
    euler = std::max(euler, std::abs(c - 2 * f[n]) / f[n]);
  }
  CHECK(worst <= 1e-6);
  CHECK(euler <= 1e-9);
  CHECK_THROWS_AS(homogeneous_hessian(ScalarBundleField(g, 0), 0), DegreeMismatch);
}

namespace {

double sin_derivative_error(int n) {
  auto g = build_grid(n, 8, 8);
  ConnectionField zero(g);
  auto s = sample_function(g, 0, [](double x1, double, double) { return std::sin(x1); });
  double worst = 0.0;
  for (int i = 0; i < n; ++i)
    worst = std::max(worst, std::abs(horizontal_derivative(s, zero, g.index(i, 0, 0), 0) - std::cos(g.x1(i))));
  return worst;
}

}  // namespace

TEST_CASE("horizontal_derivative examples") {
  auto g = build_grid(32, 32, 16);
  ConnectionField zero(g);
  auto flat = sample_structure(*make_euclidean(2), g);
  CHECK(std::abs(horizontal_derivative(flat, zero, g.index(3, 4, 5), 0)) <= 1e-14);

  // the 5-point stencil maps sin to cos times (8 sin h - sin 2h) / 6h
  for (int n : {16, 32, 64}) {
    double h = 2 * std::numbers::pi / n;
    double truncation = 1.0 - (8 * std::sin(h) - std::sin(2 * h)) / (6 * h);
    CHECK(std::abs(sin_derivative_error(n) - truncation) <= 1e-13);
  }
  CHECK(sin_derivative_error(96) <= 1e-6);
}

// 1e-6 at N_x = 32 is below the stencil's own truncation (h^4/30 = 4.9e-5).
TEST_CASE("horizontal_derivative of sin x1 at N_x = 32 within 1e-6" * doctest::may_fail()) {
  double e = sin_derivative_error(32);
  MESSAGE("sin x1 derivative error at N_x = 32: " << e);
  CHECK(e <= 1e-6);
}

TEST_CASE("horizontal_derivative on the conformal torus matches the jet evaluation") {
  // grid delta-derivative of a degree-2 field against d_j f - N^l_j df/dy^l
  auto g = build_grid(64, 64, 16);
  auto C = samples::conformal(0.1);
  auto probe = [](auto x1, auto x2, auto y1, auto y2) {
    using std::cos;
    return (1.0 + 0.3 * cos(x1 + x2)) * (y1 * y1 + 0.5 * y1 * y2 + y2 * y2);
  };
  auto f = sample_function(g, 2, [&](double x1, double x2, double th) {
    return probe(x1, x2, std::cos(th), std::sin(th));
  });
  ConnectionField N(g);
  for (std::size_t n = 0; n < g.size(); ++n) {
    auto Nn = nonlinear_connection(*C, node_point(*C, g, n));
    for (int q = 0; q < 4; ++q) N.N[q][n] = Nn(q / 2, q % 2);
  }
  double worst = 0.0;
  for (std::size_t n = 0; n < g.size(); n += 5) {
    auto p = node_point(*C, g, n);
    LocalGeometry geo(*C, p.x, p.y, 3);
    const auto& L = JetLayout::get(4, 3);
    Jet x1 = Jet::variable(L, 0, p.x[0], 3), x2 = Jet::variable(L, 1, p.x[1], 3);
    Jet y1 = Jet::variable(L, 2, p.y[0], 3), y2 = Jet::variable(L, 3, p.y[1], 3);
    Jet fj = probe(x1, x2, y1, y2);
    for (int a = 0; a < 2; ++a)
      worst = std::max(worst, std::abs(horizontal_derivative(f, N, n, a) - geo.delta(fj, a).value()));
  }
  MESSAGE("conformal delta-derivative error at 64x64x16: " << worst);
  CHECK(worst <= 1e-5);
}

TEST_CASE("interpolation examples") {
  auto g = build_grid(32, 32, 16);
  ScalarBundleField c(g, 0, std::vector<double>(g.size(), 2.5));
  CHECK(std::abs(interpolate(c, 1.234, 5.0, 0.77) - 2.5) <= 1e-13);
  auto S = rich_randers();
  auto f = sample_structure(*S, g);
  for (std::size_t n = 0; n < g.size(); n += 97) {
    auto ijk = g.coords(n);
    CHECK(std::abs(interpolate(f, g.x1(ijk[0]), g.x2(ijk[1]), g.theta(ijk[2])) - f[n]) <= 1e-13);
  }
  auto cx = sample_function(g, 0, [](double x1, double, double) { return std::cos(x1); });
  CHECK(std::abs(interpolate(cx, 0.123, 0.4, 1.0) - std::cos(0.123)) <= 1e-6);
  InterpolationOptions cubic;
  cubic.x_stencil = 4;
  CHECK(std::abs(interpolate(cx, 0.123, 0.4, 1.0, cubic) - std::cos(0.123)) <= 1e-4);
}

TEST_CASE("grid connection converges to the analytic one at fourth order") {
  auto S = rich_randers();
  auto error = [&](int n) {
    auto g = build_grid(n, n, n);
    auto f = sample_structure(*S, g);
    GridGeometry geo(f, FiberScheme::FD4, GeometryLevel::Curvature);
    double worst = 0.0;
    for (std::size_t m = 0; m < g.size(); m += 3) {
      auto N = nonlinear_connection(*S, node_point(*S, g, m));
      for (int q = 0; q < 4; ++q) worst = std::max(worst, std::abs(geo.N[q][m] - N(q / 2, q % 2)));
    }
    return worst;
  };
  double e16 = error(16), e32 = error(32), e64 = error(64);
  double order = std::log2(e32 / e64);
  MESSAGE("connection error 16: " << e16 << ", 32: " << e32 << ", 64: " << e64 << ", order " << order);
  CHECK(order >= 3.5);
}

TEST_CASE("field CSV round trip is bit exact") {
  auto g = build_grid(8, 8, 8);
  auto f = sample_structure(*rich_randers(), g);
  auto h = sample_function(g, 2, [](double x1, double x2, double th) { return 1.0 / 3.0 + x1 * x2 * std::sin(th); });
  std::stringstream buf;
  write_fields_csv(buf, {&f, &h}, {"phi", "other"});
  std::vector<std::string> names;
  auto back = read_fields_csv(buf, 2, &names);
  REQUIRE(back.size() == 2);
  CHECK(names == std::vector<std::string>{"phi", "other"});
  CHECK(back[0].values() == f.values());
  CHECK(back[1].values() == h.values());
}

TEST_CASE("fiber average and bandlimit") {
  auto g = build_grid(8, 8, 16);
  auto f = sample_function(g, 0, [](double x1, double, double th) { return x1 + std::cos(3 * th) + 0.5 * std::sin(th); });
  auto avg = fiber_average(g, f.values());
  for (int i = 0; i < 8; ++i) CHECK(std::abs(avg[i * 8 + 1] - g.x1(i)) <= 1e-14);
  auto v = f.values();
  fiber_bandlimit(g, v, 2);
  for (std::size_t n = 0; n < v.size(); ++n) {
    auto c = g.coords(n);
    CHECK(std::abs(v[n] - (g.x1(c[0]) + 0.5 * std::sin(g.theta(c[2])))) <= 1e-14);
  }
}
