#include <cmath>
#include <numbers>
#include <sstream>

#include "doctest.h"
#include "finsler/curvature.hpp"
#include "finsler/errors.hpp"
#include "finsler/pullback.hpp"
#include "samples.hpp"

using namespace finsler;
using namespace finsler::pullback;
using bundle::build_grid;
using bundle::sample_structure;

namespace {

constexpr double kPi = std::numbers::pi;

std::unique_ptr<VelocitySource> constant_velocity(double a, double b) {
  return analytic_source([a, b](double, double, double, double, double v[2], double jac[4]) {
    v[0] = a;
    v[1] = b;
    for (int q = 0; q < 4; ++q) jac[q] = 0.0;
  });
}

// theta-independent, autonomous: (0.1 sin x2, 0.05 cos x1)
std::unique_ptr<VelocitySource> swirl() {
  return analytic_source([](double x1, double x2, double, double, double v[2], double jac[4]) {
    v[0] = 0.1 * std::sin(x2);
    v[1] = 0.05 * std::cos(x1);
    jac[0] = 0.0;
    jac[1] = 0.1 * std::cos(x2);
    jac[2] = -0.05 * std::sin(x1);
    jac[3] = 0.0;
  });
}

double sup_diff(const std::vector<double>& a, const std::vector<double>& b) {
  double m = 0.0;
  for (std::size_t n = 0; n < a.size(); ++n) m = std::max(m, std::abs(a[n] - b[n]));
  return m;
}

flow::DeTurckField riemannian_xi(const SphereBundleGrid& g) {
  flow::FlowState s(sample_structure(*samples::general_riemannian(), g));
  return flow::deturck_vector_field(s, flow::BackgroundMetric(*make_euclidean(2), g));
}

}  // namespace

TEST_CASE("reduce_xi examples") {
  auto g = build_grid(16, 16, 16);
  flow::DeTurckField zero;
  for (auto& a : zero.xi) a.assign(g.size(), 0.0);
  auto X0 = reduce_xi(g, zero);
  for (int q = 0; q < 2; ++q) CHECK(sup_diff(X0[q], std::vector<double>(g.lines(), 0.0)) == 0.0);

  // theta-independent xi reduces to itself
  auto xi = riemannian_xi(g);
  auto X = reduce_xi(g, xi);
  double worst = 0.0;
  for (std::size_t n = 0; n < g.size(); ++n)
    for (int q = 0; q < 2; ++q) worst = std::max(worst, std::abs(X[q][n / 16] - xi.xi[q][n]));
  CHECK(worst <= 1e-14);
  CHECK(xi_fiber_variation(g, xi) <= 1e-12);

  // Randers xi varies along the fiber; the average is the midpoint rule
  flow::FlowState r(sample_structure(
      *samples::randers(0.2, 0.0, "0", "bump 1 " + samples::num(kPi) + " " + samples::num(kPi)), g));
  auto rx = flow::deturck_vector_field(r, flow::BackgroundMetric(*make_euclidean(2), g));
  auto RX = reduce_xi(g, rx);
  double variation = xi_fiber_variation(g, rx);
  MESSAGE("Randers xi fiber variation " << variation);
  CHECK(variation > 1e-3);
  worst = 0.0;
  for (std::size_t b = 0; b < g.lines(); ++b)
    for (int q = 0; q < 2; ++q) {
      double s = 0.0;
      for (int k = 0; k < 16; ++k) s += rx.xi[q][b * 16 + k] * (2 * kPi / 16);
      worst = std::max(worst, std::abs(RX[q][b] - s / (2 * kPi)));
    }
  CHECK(worst <= 1e-9);
}

TEST_CASE("integrate_diffeo: zero and constant fields") {
  auto g = build_grid(16, 16, 8);
  auto id = integrate_diffeo(*constant_velocity(0, 0), g, 0.3, 0.01, PullbackMode::BaseReduced, 5);
  REQUIRE(id.samples.size() == 7);
  for (const auto& s : id.samples) {
    CHECK(sup_diff(s.x1, id.samples.front().x1) == 0.0);
    CHECK(sup_diff(s.x2, id.samples.front().x2) == 0.0);
  }

  auto tr = integrate_diffeo(*constant_velocity(0.7, 0), g, 0.4, 0.01, PullbackMode::BaseReduced);
  const auto& end = tr.samples.back();
  CHECK(end.t == 0.4);
  double worst = 0.0;
  for (int i = 0; i < 16; ++i)
    for (int j = 0; j < 16; ++j) {
      std::size_t b = static_cast<std::size_t>(i) * 16 + j;
      worst = std::max({worst, std::abs(end.x1[b] - (g.x1(i) + 0.28)), std::abs(end.x2[b] - g.x2(j))});
    }
  CHECK(worst <= 1e-10);
  CHECK(&tr.at_time(0.4) == &tr.samples.back());
  CHECK_THROWS_AS(tr.at_time(0.123), std::out_of_range);
}

TEST_CASE("integrate_diffeo: manufactured time-dependent field") {
  // xi = (sin x2, 0) e^-t: x1(T) = x1 + sin x2 (1 - e^-T)
  auto src = analytic_source([](double, double x2, double, double t, double v[2], double jac[4]) {
    v[0] = std::sin(x2) * std::exp(-t);
    v[1] = 0.0;
    jac[0] = jac[2] = jac[3] = 0.0;
    jac[1] = std::cos(x2) * std::exp(-t);
  });
  auto g = build_grid(16, 16, 8);
  const double T = 0.5;
  auto tr = integrate_diffeo(*src, g, T, 0.01, PullbackMode::BaseReduced);
  double worst = 0.0;
  for (int i = 0; i < 16; ++i)
    for (int j = 0; j < 16; ++j) {
      std::size_t b = static_cast<std::size_t>(i) * 16 + j;
      double ref = g.x1(i) + std::sin(g.x2(j)) * (1 - std::exp(-T));
      worst = std::max(worst, std::abs(tr.samples.back().x1[b] - ref));
    }
  CHECK(worst <= 1e-8);
}

TEST_CASE("BaseReduced and HorizontalLift agree for theta-independent xi") {
  auto g = build_grid(16, 16, 8);
  auto a = integrate_diffeo(*swirl(), g, 0.5, 0.01, PullbackMode::BaseReduced);
  auto b = integrate_diffeo(*swirl(), g, 0.5, 0.01, PullbackMode::HorizontalLift);
  CHECK(b.particles() == g.size());
  CHECK(a.particles() == g.lines());
  double worst = 0.0;
  for (std::size_t n = 0; n < g.size(); ++n) {
    worst = std::max(worst, std::abs(b.samples.back().x1[n] - a.samples.back().x1[n / 8]));
    worst = std::max(worst, std::abs(b.samples.back().x2[n] - a.samples.back().x2[n / 8]));
  }
  CHECK(worst <= 1e-9);
}

TEST_CASE("group property of an autonomous flow") {
  auto g = build_grid(16, 16, 8);
  const double s = 0.3, t = 0.5;
  auto whole = integrate_diffeo(*swirl(), g, s + t, 0.01, PullbackMode::BaseReduced);
  auto first = integrate_diffeo(*swirl(), g, s, 0.005, PullbackMode::BaseReduced);
  auto x1 = first.samples.back().x1, x2 = first.samples.back().x2;
  std::vector<double> v1, v2;
  integrate_points(*swirl(), g, 0.0, t, 0.02, x1, x2, v1, v2);
  CHECK(sup_diff(x1, whole.samples.back().x1) <= 1e-7);
  CHECK(sup_diff(x2, whole.samples.back().x2) <= 1e-7);
}

TEST_CASE("sampled xi series drive the same flow as the analytic field") {
  auto g = build_grid(16, 16, 8);
  flow::XiSeries series;
  series.grid = g;
  series.kind = flow::XiRecording::Base;
  for (int m = 0; m <= 10; ++m) {
    series.times.push_back(0.05 * m);
    series.base.push_back({std::vector<double>(g.lines(), 0.7), std::vector<double>(g.lines(), -0.2)});
  }
  auto src = sampled_source(series, PullbackMode::BaseReduced);
  auto a = integrate_diffeo(*src, g, 0.5, 0.01, PullbackMode::BaseReduced);
  auto b = integrate_diffeo(*constant_velocity(0.7, -0.2), g, 0.5, 0.01, PullbackMode::BaseReduced);
  CHECK(sup_diff(a.samples.back().x1, b.samples.back().x1) <= 1e-12);
  CHECK(sup_diff(a.samples.back().x2, b.samples.back().x2) <= 1e-12);
  CHECK_THROWS_AS(sampled_source(series, PullbackMode::HorizontalLift), ConfigError);
}

TEST_CASE("displacement guard") {
  auto g = build_grid(16, 16, 8);
  CHECK_THROWS_AS(integrate_diffeo(*constant_velocity(100, 0), g, 1.0, 0.1, PullbackMode::BaseReduced),
                  DisplacementTooLarge);
  CHECK_THROWS_AS(integrate_diffeo(*constant_velocity(0, 0), g, 1.0, 0.0, PullbackMode::BaseReduced), ConfigError);
}

TEST_CASE("pullback_structure examples") {
  auto g = build_grid(16, 16, 16);
  auto phi = sample_structure(*samples::randers(0.2, 0.1, "cos 0.1 1 0 0"), g);
  auto id = integrate_diffeo(*constant_velocity(0, 0), g, 0.1, 0.01, PullbackMode::BaseReduced);
  CHECK(pullback_structure(phi, id, id.samples.back()).values() == phi.values());

  auto flat = sample_structure(*make_euclidean(2), g);
  auto tr = integrate_diffeo(*constant_velocity(0.3, 0.1), g, 1.0, 0.01, PullbackMode::BaseReduced);
  CHECK(sup_diff(pullback_structure(flat, tr, tr.samples.back()).values(), flat.values()) <= 1e-12);

  auto bad = phi;
  for (auto& v : bad.values()) v = -v;
  CHECK_THROWS_AS(pullback_structure(bad, id, id.samples.back()), NonPositiveF);
}

TEST_CASE("pullback_structure reproduces an analytic pullback") {
  // map samples of psi = x + 0.1 sin x against the sampled PulledBackStructure
  auto base = samples::randers(0.2, 0.1, "cos 0.1 1 0 0");
  auto psi = AnalyticDiffeo::parse("sin 0.1 0 1 0 0; sin 0 0.1 0 1 0", 2);
  auto pulled = make_pulled_back(base, psi);
  double prev = 0.0;
  for (int n : {32, 64}) {
    auto g = build_grid(n, n, 32);
    DiffeoTrajectory traj;
    traj.grid = g;
    MapSample map;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        std::vector<double> x{g.x1(i), g.x2(j)};
        auto y = psi(std::span<const double>(x));
        map.x1.push_back(y[0]);
        map.x2.push_back(y[1]);
      }
    traj.samples.push_back(map);
    auto mine = pullback_structure(sample_structure(*base, g), traj, map);
    double err = sup_diff(mine.values(), sample_structure(*pulled, g).values());
    MESSAGE(n << "^2: pullback error " << err);
    CHECK(err <= 1e-4);
    if (n == 64) CHECK(std::log2(prev / err) >= 3.5);
    prev = err;
  }
}

TEST_CASE("Ricci scalar commutes with pullback") {
  auto psi = AnalyticDiffeo::parse("sin 0.1 0 1 0 0; sin 0 0.1 0 1 0", 2);
  int checked = 0;
  for (const auto& s : samples::analytic(30, 77)) {
    auto pulled = make_pulled_back(s.S, psi);
    std::span<const double> x(s.x);
    auto px = psi(x);
    auto J = psi.jacobian(x);
    std::vector<double> py{J(0, 0) * s.y[0] + J(0, 1) * s.y[1], J(1, 0) * s.y[0] + J(1, 1) * s.y[1]};
    double lhs = ricci_scalar(*pulled, make_point(*pulled, s.x, s.y));
    double rhs = ricci_scalar(*s.S, make_point(*s.S, px, py));
    CHECK(std::abs(lhs - rhs) <= 1e-6);
    ++checked;
  }
  CHECK(checked == 30);
}

TEST_CASE("trajectory CSV layout") {
  auto g = build_grid(8, 8, 8);
  for (auto mode : {PullbackMode::BaseReduced, PullbackMode::HorizontalLift}) {
    auto tr = integrate_diffeo(*swirl(), g, 0.1, 0.05, mode);
    std::ostringstream out;
    write_trajectory_csv(out, tr);
    std::istringstream in(out.str());
    std::string header, line;
    std::getline(in, header);
    std::size_t rows = 0, columns = 0;
    while (std::getline(in, line)) {
      ++rows;
      columns = std::count(line.begin(), line.end(), ',') + 1;
    }
    bool lift = mode == PullbackMode::HorizontalLift;
    CHECK(header == (lift ? "t,i,j,k,x1_mapped,x2_mapped,theta_mapped" : "t,i,j,x1_mapped,x2_mapped"));
    CHECK(columns == (lift ? 7u : 5u));
    CHECK(rows == tr.samples.size() * tr.particles());
  }
}
