#include <cmath>
#include <random>

#include "doctest.h"
#include "finsler/errors.hpp"
#include "finsler/finsler_core.hpp"
#include "finsler/oracles.hpp"
#include "samples.hpp"

using namespace finsler;
using namespace finsler::oracles;

namespace {

double sup_u(const ConformalSolution& s) {
  double m = 0.0;
  for (double v : s.u) m = std::max(m, std::abs(v));
  return m;
}

}  // namespace

TEST_CASE("randers_closed_form examples") {
  auto a = SquareMatrix<double>::identity(2);
  a(0, 0) = 1.5;
  a(0, 1) = a(1, 0) = 0.2;
  const std::vector<double> zero{0.0, 0.0}, y{0.3, -1.1};
  auto g = randers_closed_form(a, zero, y);
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) CHECK(std::abs(g(i, j) - a(i, j)) <= 1e-15);

  const std::vector<double> b{0.3, 0.0}, e1{1.0, 0.0};
  auto G = randers_closed_form(SquareMatrix<double>::identity(2), b, e1);
  double F2 = 0.0;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) F2 += G(i, j) * e1[i] * e1[j];
  CHECK(std::abs(F2 - 1.69) <= 1e-14);

  const std::vector<double> big{1.0, 0.0}, origin{0.0, 0.0};
  CHECK_THROWS_AS(randers_closed_form(SquareMatrix<double>::identity(2), big, e1), ConvexityViolated);
  CHECK_THROWS_AS(randers_closed_form(SquareMatrix<double>::identity(2), b, origin), NonPositiveF);
}

TEST_CASE("randers_closed_form agrees with the jet fundamental tensor") {
  int n = 0;
  for (const auto& s : samples::analytic(300, 2024)) {
    if (s.family != "randers") continue;
    const auto& R = dynamic_cast<const RandersStructure&>(*s.S);
    std::span<const double> x(s.x);
    auto ref = randers_closed_form(R.alpha_metric(x), R.one_form(x), s.y);
    auto g = fundamental_tensor(*s.S, make_point(*s.S, s.x, s.y));
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j) CHECK(std::abs(g(i, j) - ref(i, j)) <= 1e-12);
    ++n;
  }
  CHECK(n == 100);
}

TEST_CASE("conformal_reference: constant data is stationary") {
  auto s = conformal_reference(TorusFunction::constant(0.3), 0.05, 16, 16);
  for (double v : s.u) CHECK(v == 0.3);
  CHECK(s.t == doctest::Approx(0.05).epsilon(1e-15));
  CHECK_THROWS_AS(conformal_reference(TorusFunction::constant(0.0), 0.05, 4, 16), BadResolution);
}

TEST_CASE("conformal_reference: golden decay of u0 = 0.1 cos x1") {
  // finsler-flow reference --u0 "cos 0.1 1 0 0" -T 0.05 --n1 64 --n2 8
  auto s = conformal_reference(TorusFunction::parse("cos 0.1 1 0 0", 2), 0.05, 64, 8);
  CHECK(std::abs(0.1 / sup_u(s) - 1.0421232338088808) <= 1e-12);
}

TEST_CASE("conformal_reference: small data follows linear heat decay") {
  // u_t = Lap u for u = eps cos x1 decays like exp(-T)
  for (double T : {0.05, 0.2}) {
    auto s = conformal_reference(TorusFunction::parse("cos 0.001 1 0 0", 2), T, 64, 8);
    CHECK(std::abs(sup_u(s) / 0.001 - std::exp(-T)) <= 0.05 * std::exp(-T));
  }
}

TEST_CASE("conformal_reference converges at fourth order") {
  auto u0 = TorusFunction::parse("cos 0.1 1 0 0; cos 0.05 2 0 0.4", 2);
  auto ref = conformal_reference(u0, 0.05, 256, 8, 0.1, 1e-4);
  auto error = [&](int n) {
    auto s = conformal_reference(u0, 0.05, n, 8, 0.1, 1e-4);
    double e = 0.0;
    for (int i = 0; i < n; ++i) e = std::max(e, std::abs(s.at(i, 0) - ref.at(i * (256 / n), 0)));
    return e;
  };
  double e32 = error(32), e64 = error(64);
  double order = std::log2(e32 / e64);
  MESSAGE("reference errors 32: " << e32 << ", 64: " << e64 << ", order " << order);
  CHECK(order >= 3.5);
}

TEST_CASE("conformal_reference interpolation") {
  auto s = conformal_reference(TorusFunction::parse("cos 0.1 1 0 0", 2), 0.0, 64, 8);
  CHECK(std::abs(s.interpolate(0.123, 2.0) - 0.1 * std::cos(0.123)) <= 1e-9);
  CHECK(s.interpolate(s.h(0) * 3, 0.0) == doctest::Approx(s.at(3, 0)).epsilon(1e-15));
}

TEST_CASE("fd_check examples") {
  // d(F^2)/dy on the Euclidean torus
  auto E = make_euclidean(2);
  std::vector<double> z{0.3, 1.2, 0.8, -0.6};
  auto f2 = [&](std::span<const double> p) { return E->f_squared(p.subspan(0, 2), p.subspan(2, 2)); };
  CHECK(fd_check(f2, 2 * z[2], z, 2) <= 1e-10);
  CHECK(fd_check(f2, 2 * z[3], z, 3) <= 1e-10);
  CHECK(fd_check(f2, 2 * z[3] + 1e-3, z, 3) >= 1e-4);

  // d(g_jk)/dy on a Randers structure
  auto R = samples::randers(0.3, -0.2, "cos 0.1 1 1 0");
  LocalGeometry geo(*R, std::span<const double>(z).subspan(0, 2), std::span<const double>(z).subspan(2, 2), 3);
  double worst = 0.0;
  for (int j = 0; j < 2; ++j)
    for (int k = 0; k < 2; ++k)
      for (int l = 0; l < 2; ++l) {
        auto gjk = [&](std::span<const double> p) {
          return fundamental_tensor(*R, make_point(*R, {p[0], p[1]}, {p[2], p[3]}))(j, k);
        };
        worst = std::max(worst, fd_check(gjk, geo.dy(geo.metric()(j, k), l).value(), z, 2 + l));
      }
  CHECK(worst <= 1e-7);

  // dG^i/dx on the conformal torus
  auto C = samples::conformal(0.1);
  LocalGeometry cg(*C, std::span<const double>(z).subspan(0, 2), std::span<const double>(z).subspan(2, 2), 3);
  worst = 0.0;
  for (int i = 0; i < 2; ++i)
    for (int l = 0; l < 2; ++l) {
      auto Gi = [&](std::span<const double> p) { return spray(*C, make_point(*C, {p[0], p[1]}, {p[2], p[3]}))[i]; };
      worst = std::max(worst, fd_check(Gi, cg.dx(cg.spray()[i], l).value(), z, l));
    }
  CHECK(worst <= 1e-6);
}
