#include "finsler/oracles.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "finsler/errors.hpp"

namespace finsler::oracles {

SquareMatrix<double> randers_closed_form(const SquareMatrix<double>& a, std::span<const double> b,
                                         std::span<const double> y) {
  const int n = a.size();
  if (static_cast<int>(b.size()) != n || static_cast<int>(y.size()) != n)
    throw std::invalid_argument("randers_closed_form: dimension mismatch");
  auto ainv = spd_inverse(a, "randers_closed_form alpha metric");
  double bnorm2 = 0.0, alpha2 = 0.0, beta = 0.0;
  std::vector<double> l(n, 0.0);
  for (int i = 0; i < n; ++i) {
    beta += b[i] * y[i];
    for (int j = 0; j < n; ++j) {
      bnorm2 += b[i] * ainv(i, j) * b[j];
      alpha2 += a(i, j) * y[i] * y[j];
      l[i] += a(i, j) * y[j];
    }
  }
  if (!(bnorm2 < 1.0)) throw ConvexityViolated("|b|_a = " + std::to_string(std::sqrt(bnorm2)) + " >= 1");
  if (!(alpha2 > 0.0)) throw NonPositiveF("randers_closed_form needs y != 0");
  const double alpha = std::sqrt(alpha2);
  const double F = alpha + beta;
  for (auto& v : l) v /= alpha;
  SquareMatrix<double> g(n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) g(i, j) = F / alpha * (a(i, j) - l[i] * l[j]) + (l[i] + b[i]) * (l[j] + b[j]);
  return g;
}

namespace {

void d1(const std::vector<double>& in, int n1, int n2, int axis, double h, std::vector<double>& out) {
  const double inv = 1.0 / (12.0 * h);
  auto w = [](int i, int n) { return ((i % n) + n) % n; };
  for (int i = 0; i < n1; ++i)
    for (int j = 0; j < n2; ++j) {
      auto at = [&](int di, int dj) { return in[static_cast<std::size_t>(w(i + di, n1)) * n2 + w(j + dj, n2)]; };
      double v = axis == 0 ? at(-2, 0) - 8 * at(-1, 0) + 8 * at(1, 0) - at(2, 0)
                           : at(0, -2) - 8 * at(0, -1) + 8 * at(0, 1) - at(0, 2);
      out[static_cast<std::size_t>(i) * n2 + j] = v * inv;
    }
}

void conformal_rhs(const std::vector<double>& u, int n1, int n2, double h1, double h2, std::vector<double>& out) {
  const std::size_t M = u.size();
  std::vector<double> a(M), b(M), lap(M, 0.0);
  d1(u, n1, n2, 0, h1, a);
  d1(a, n1, n2, 0, h1, b);
  for (std::size_t n = 0; n < M; ++n) lap[n] = b[n];
  d1(u, n1, n2, 1, h2, a);
  d1(a, n1, n2, 1, h2, b);
  for (std::size_t n = 0; n < M; ++n) out[n] = std::exp(-2 * u[n]) * (lap[n] + b[n]);
}

}  // namespace

double ConformalSolution::interpolate(double x1, double x2) const {
  const int width = 6;
  double sum = 0.0;
  double s1 = x1 / h(0), s2 = x2 / h(1);
  int b1 = static_cast<int>(std::floor(s1)), b2 = static_cast<int>(std::floor(s2));
  double t1 = s1 - b1, t2 = s2 - b2;
  auto weight = [&](double t, int a) {
    double w = 1.0;
    for (int b = 0; b < width; ++b)
      if (b != a) w *= (t - (b - 2)) / static_cast<double>(a - b);
    return w;
  };
  for (int a = 0; a < width; ++a)
    for (int b = 0; b < width; ++b) {
      int i = ((b1 + a - 2) % n1 + n1) % n1, j = ((b2 + b - 2) % n2 + n2) % n2;
      sum += weight(t1, a) * weight(t2, b) * at(i, j);
    }
  return sum;
}

ConformalSolution conformal_reference(const TorusFunction& u0, double T, int n1, int n2, double cfl, double dt) {
  if (n1 < 8 || n2 < 8) throw BadResolution("conformal_reference needs at least 8 points per axis");
  if (!(T >= 0.0)) throw ConfigError("conformal_reference needs T >= 0");
  ConformalSolution sol;
  sol.n1 = n1;
  sol.n2 = n2;
  sol.period1 = sol.period2 = 2 * std::numbers::pi;
  const double h1 = sol.h(0), h2 = sol.h(1);
  const std::size_t M = static_cast<std::size_t>(n1) * n2;
  sol.u.resize(M);
  for (int i = 0; i < n1; ++i)
    for (int j = 0; j < n2; ++j) {
      double x[2] = {i * h1, j * h2};
      sol.u[static_cast<std::size_t>(i) * n2 + j] = u0(std::span<const double>(x, 2));
    }
  if (T == 0.0) return sol;
  const double hmin = std::min(h1, h2);
  const double step = dt > 0.0 ? dt : cfl * hmin * hmin;
  const long steps = std::max<long>(1, static_cast<long>(std::ceil(T / step - 1e-9)));
  const double k = T / steps;
  std::vector<double> k1(M), k2(M), k3(M), k4(M), tmp(M);
  for (long s = 0; s < steps; ++s) {
    conformal_rhs(sol.u, n1, n2, h1, h2, k1);
    for (std::size_t n = 0; n < M; ++n) tmp[n] = sol.u[n] + 0.5 * k * k1[n];
    conformal_rhs(tmp, n1, n2, h1, h2, k2);
    for (std::size_t n = 0; n < M; ++n) tmp[n] = sol.u[n] + 0.5 * k * k2[n];
    conformal_rhs(tmp, n1, n2, h1, h2, k3);
    for (std::size_t n = 0; n < M; ++n) tmp[n] = sol.u[n] + k * k3[n];
    conformal_rhs(tmp, n1, n2, h1, h2, k4);
    for (std::size_t n = 0; n < M; ++n) {
      sol.u[n] += k / 6.0 * (k1[n] + 2 * k2[n] + 2 * k3[n] + k4[n]);
      if (!std::isfinite(sol.u[n])) throw BlowUp("conformal reference diverged", n, (s + 1) * k);
    }
  }
  sol.t = T;
  sol.steps = steps;
  return sol;
}

double fd_check(const std::function<double(std::span<const double>)>& quantity, double derivative,
                std::span<const double> point, int variable, std::span<const double> steps) {
  std::vector<double> z(point.begin(), point.end());
  auto at = [&](double offset) {
    z[variable] = point[variable] + offset;
    return quantity(z);
  };
  double worst = 0.0;
  for (double h : steps) {
    double fd = (-at(2 * h) + 8 * at(h) - 8 * at(-h) + at(-2 * h)) / (12 * h);
    worst = std::max(worst, std::abs(fd - derivative) / std::max(1.0, std::abs(derivative)));
  }
  return worst;
}

double fd_check(const std::function<double(std::span<const double>)>& quantity, double derivative,
                std::span<const double> point, int variable) {
  static const double schedule[] = {2e-3, 1e-3, 5e-4};
  return fd_check(quantity, derivative, point, variable, schedule);
}

}  // namespace finsler::oracles
