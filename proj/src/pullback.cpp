#include "finsler/pullback.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <ostream>

#include "finsler/errors.hpp"

namespace finsler::pullback {

using Array = std::vector<double>;

namespace {

// Periodic fourth-order derivative of a base array (n1 x n2, j fastest).
void base_derivative(const SphereBundleGrid& grid, const Array& in, int axis, Array& out) {
  const int n1 = grid.n1(), n2 = grid.n2();
  const double inv = 1.0 / (12.0 * grid.h(axis));
  out.resize(in.size());
  auto at = [&](int i, int j) { return in[static_cast<std::size_t>(SphereBundleGrid::wrap(i, n1)) * n2 +
                                         SphereBundleGrid::wrap(j, n2)]; };
  for (int i = 0; i < n1; ++i)
    for (int j = 0; j < n2; ++j) {
      double v = axis == 0 ? at(i - 2, j) - 8 * at(i - 1, j) + 8 * at(i + 1, j) - at(i + 2, j)
                           : at(i, j - 2) - 8 * at(i, j - 1) + 8 * at(i, j + 1) - at(i, j + 2);
      out[static_cast<std::size_t>(i) * n2 + j] = v * inv;
    }
}

double wrap_angle(double a) {
  const double tau = 2 * std::numbers::pi;
  a = std::fmod(a, tau);
  return a < 0 ? a + tau : a;
}

// Lagrange weights in time over up to four neighbouring samples.
void time_weights(const std::vector<double>& times, double t, std::size_t& first, std::vector<double>& w) {
  const std::size_t S = times.size();
  const std::size_t width = std::min<std::size_t>(4, S);
  std::size_t m = std::upper_bound(times.begin(), times.end(), t) - times.begin();
  m = m == 0 ? 0 : m - 1;
  std::size_t lo = m >= 1 ? m - 1 : 0;
  if (lo + width > S) lo = S - width;
  first = lo;
  w.assign(width, 1.0);
  for (std::size_t a = 0; a < width; ++a) {
    if (times[lo + a] == t) {
      std::fill(w.begin(), w.end(), 0.0);
      w[a] = 1.0;
      return;
    }
    for (std::size_t b = 0; b < width; ++b)
      if (b != a) w[a] *= (t - times[lo + b]) / (times[lo + a] - times[lo + b]);
  }
}

class BaseSlice final : public VelocitySlice {
 public:
  BaseSlice(const SphereBundleGrid& grid, Array x1, Array x2, int width)
      : grid_(grid), width_(width), v_{std::move(x1), std::move(x2)} {
    if (width_ < 2 || width_ > 8) throw ConfigError("interpolation stencil must have 2..8 points");
    for (int a = 0; a < 2; ++a)
      for (int b = 0; b < 2; ++b) base_derivative(grid_, v_[a], b, jac_[a * 2 + b]);
  }
  void eval(double x1, double x2, double, double v[2], double jac[4]) const override {
    // One set of weights serves all six fields.
    int i1[8], i2[8];
    double w1[8], w2[8];
    bundle::lagrange_weights(x1, grid_.h(0), grid_.n1(), width_, {i1, 8}, {w1, 8});
    bundle::lagrange_weights(x2, grid_.h(1), grid_.n2(), width_, {i2, 8}, {w2, 8});
    double acc[6] = {0, 0, 0, 0, 0, 0};
    const std::size_t n2 = static_cast<std::size_t>(grid_.n2());
    for (int a = 0; a < width_; ++a)
      for (int b = 0; b < width_; ++b) {
        const double w = w1[a] * w2[b];
        const std::size_t idx = static_cast<std::size_t>(i1[a]) * n2 + i2[b];
        acc[0] += w * v_[0][idx];
        acc[1] += w * v_[1][idx];
        for (int q = 0; q < 4; ++q) acc[2 + q] += w * jac_[q][idx];
      }
    v[0] = acc[0];
    v[1] = acc[1];
    for (int q = 0; q < 4; ++q) jac[q] = acc[2 + q];
  }

 private:
  SphereBundleGrid grid_;
  int width_;
  std::array<Array, 2> v_;
  std::array<Array, 4> jac_;
};

class FullSlice final : public VelocitySlice {
 public:
  FullSlice(const SphereBundleGrid& grid, Array x1, Array x2, int width)
      : opt_{width, true},
        v_{ScalarBundleField(grid, 0, std::move(x1)), ScalarBundleField(grid, 0, std::move(x2))},
        jac_{ScalarBundleField(grid, 0), ScalarBundleField(grid, 0), ScalarBundleField(grid, 0),
             ScalarBundleField(grid, 0)} {
    for (int a = 0; a < 2; ++a)
      for (int b = 0; b < 2; ++b) bundle::x_derivative(grid, v_[a].values(), b, jac_[a * 2 + b].values());
  }
  void eval(double x1, double x2, double theta, double v[2], double jac[4]) const override {
    for (int a = 0; a < 2; ++a) v[a] = bundle::interpolate(v_[a], x1, x2, theta, opt_);
    for (int q = 0; q < 4; ++q) jac[q] = bundle::interpolate(jac_[q], x1, x2, theta, opt_);
  }

 private:
  bundle::InterpolationOptions opt_;
  std::array<ScalarBundleField, 2> v_;
  std::array<ScalarBundleField, 4> jac_;
};

class SampledSource final : public VelocitySource {
 public:
  SampledSource(const flow::XiSeries& series, bool full, int width)
      : series_(series), full_(full), width_(width) {
    if (series_.times.empty()) throw ConfigError("xi series is empty");
    if (full_ && series_.full.size() != series_.times.size())
      throw ConfigError("horizontal lift needs a full xi recording");
    if (!full_ && series_.base.size() != series_.times.size()) throw ConfigError("xi series has no base samples");
  }
  std::unique_ptr<VelocitySlice> at(double t) const override {
    std::size_t first;
    std::vector<double> w;
    time_weights(series_.times, t, first, w);
    const auto& data = full_ ? series_.full : series_.base;
    std::array<Array, 2> v;
    for (int a = 0; a < 2; ++a) {
      v[a].assign(data[first][a].size(), 0.0);
      for (std::size_t q = 0; q < w.size(); ++q) {
        if (w[q] == 0.0) continue;
        const auto& src = data[first + q][a];
        for (std::size_t n = 0; n < src.size(); ++n) v[a][n] += w[q] * src[n];
      }
    }
    if (full_) return std::make_unique<FullSlice>(series_.grid, std::move(v[0]), std::move(v[1]), width_);
    return std::make_unique<BaseSlice>(series_.grid, std::move(v[0]), std::move(v[1]), width_);
  }

 private:
  const flow::XiSeries& series_;
  bool full_;
  int width_;
};

class AnalyticSlice final : public VelocitySlice {
 public:
  AnalyticSlice(const AnalyticVelocity& f, double t) : f_(f), t_(t) {}
  void eval(double x1, double x2, double theta, double v[2], double jac[4]) const override {
    f_(x1, x2, theta, t_, v, jac);
  }

 private:
  const AnalyticVelocity& f_;
  double t_;
};

class AnalyticSource final : public VelocitySource {
 public:
  explicit AnalyticSource(AnalyticVelocity f) : f_(std::move(f)) {}
  std::unique_ptr<VelocitySlice> at(double t) const override { return std::make_unique<AnalyticSlice>(f_, t); }

 private:
  AnalyticVelocity f_;
};

}  // namespace

std::array<std::vector<double>, 2> reduce_xi(const SphereBundleGrid& grid, const flow::DeTurckField& xi) {
  return {bundle::fiber_average(grid, xi.xi[0]), bundle::fiber_average(grid, xi.xi[1])};
}

double xi_fiber_variation(const SphereBundleGrid& grid, const flow::DeTurckField& xi) {
  const int nt = grid.ntheta();
  double worst = 0.0;
  for (const auto& comp : xi.xi)
    for (std::size_t l = 0; l < grid.lines(); ++l) {
      auto first = comp.begin() + static_cast<std::ptrdiff_t>(l * nt);
      auto [lo, hi] = std::minmax_element(first, first + nt);
      worst = std::max(worst, *hi - *lo);
    }
  return worst;
}

std::unique_ptr<VelocitySource> sampled_source(const flow::XiSeries& series, PullbackMode mode, int width) {
  bool full = mode == PullbackMode::HorizontalLift;
  return std::make_unique<SampledSource>(series, full, width);
}

std::unique_ptr<VelocitySource> analytic_source(AnalyticVelocity f) {
  return std::make_unique<AnalyticSource>(std::move(f));
}

std::size_t DiffeoTrajectory::particles() const {
  return mode == PullbackMode::BaseReduced ? grid.lines() : grid.size();
}

const MapSample& DiffeoTrajectory::at_time(double t) const {
  for (const auto& s : samples)
    if (std::abs(s.t - t) <= 1e-12 * std::max(1.0, std::abs(t))) return s;
  throw std::out_of_range("no map sample at t=" + std::to_string(t));
}

void integrate_points(const VelocitySource& source, const SphereBundleGrid& grid, double t0, double t1, double dt,
                      std::vector<double>& x1, std::vector<double>& x2, std::vector<double>& v1,
                      std::vector<double>& v2) {
  if (!(t1 > t0)) return;
  const long steps = std::max<long>(1, static_cast<long>(std::ceil((t1 - t0) / dt - 1e-9)));
  const double h = (t1 - t0) / steps;
  const double guard = 0.5 * std::min(grid.h(0), grid.h(1));
  const bool lift = !v1.empty();
  const std::size_t P = x1.size();
  auto slice0 = source.at(t0);
  for (long n = 0; n < steps; ++n) {
    const double t = t0 + n * h;
    auto slice_mid = source.at(t + 0.5 * h);
    auto slice_end = source.at(n + 1 == steps ? t1 : t + h);
    for (std::size_t p = 0; p < P; ++p) {
      // state (x1, x2, v1, v2); the direction only sets theta for the velocity lookup
      double y[4] = {x1[p], x2[p], lift ? v1[p] : 1.0, lift ? v2[p] : 0.0};
      double k[4][4];
      auto rhs = [&](const VelocitySlice& s, const double* z, double* out) {
        double v[2], J[4];
        s.eval(z[0], z[1], lift ? std::atan2(z[3], z[2]) : 0.0, v, J);
        out[0] = v[0];
        out[1] = v[1];
        out[2] = J[0] * z[2] + J[1] * z[3];
        out[3] = J[2] * z[2] + J[3] * z[3];
      };
      double z[4];
      rhs(*slice0, y, k[0]);
      for (int q = 0; q < 4; ++q) z[q] = y[q] + 0.5 * h * k[0][q];
      rhs(*slice_mid, z, k[1]);
      for (int q = 0; q < 4; ++q) z[q] = y[q] + 0.5 * h * k[1][q];
      rhs(*slice_mid, z, k[2]);
      for (int q = 0; q < 4; ++q) z[q] = y[q] + h * k[2][q];
      rhs(*slice_end, z, k[3]);
      for (int q = 0; q < 4; ++q) z[q] = y[q] + h / 6.0 * (k[0][q] + 2 * k[1][q] + 2 * k[2][q] + k[3][q]);
      double step = std::hypot(z[0] - y[0], z[1] - y[1]);
      if (!(step < guard)) {
        char buf[200];
        std::snprintf(buf, sizeof buf, "particle %zu moved %g in one step at t=%g (limit %g)", p, step, t, guard);
        throw DisplacementTooLarge(buf);
      }
      x1[p] = z[0];
      x2[p] = z[1];
      if (lift) {
        v1[p] = z[2];
        v2[p] = z[3];
      }
    }
    slice0 = std::move(slice_end);
  }
}

DiffeoTrajectory integrate_diffeo(const VelocitySource& source, const SphereBundleGrid& grid, double duration,
                                  double dt, PullbackMode mode, int store_every) {
  if (!(duration >= 0.0) || !(dt > 0.0)) throw ConfigError("integrate_diffeo needs duration >= 0 and dt > 0");
  if (store_every < 1) throw ConfigError("store_every must be >= 1");
  DiffeoTrajectory traj;
  traj.grid = grid;
  traj.mode = mode;
  MapSample cur;
  for (int i = 0; i < grid.n1(); ++i)
    for (int j = 0; j < grid.n2(); ++j) {
      if (mode == PullbackMode::BaseReduced) {
        cur.x1.push_back(grid.x1(i));
        cur.x2.push_back(grid.x2(j));
        continue;
      }
      for (int k = 0; k < grid.ntheta(); ++k) {
        cur.x1.push_back(grid.x1(i));
        cur.x2.push_back(grid.x2(j));
        cur.v1.push_back(grid.c(k));
        cur.v2.push_back(grid.s(k));
      }
    }
  traj.samples.push_back(cur);
  if (duration == 0.0) return traj;
  const long steps = std::max<long>(1, static_cast<long>(std::ceil(duration / dt - 1e-9)));
  const double h = duration / steps;
  for (long n = 0; n < steps; n += store_every) {
    long m = std::min<long>(steps, n + store_every);
    double t0 = n * h, t1 = m == steps ? duration : m * h;
    integrate_points(source, grid, t0, t1, h, cur.x1, cur.x2, cur.v1, cur.v2);
    cur.t = t1;
    traj.samples.push_back(cur);
  }
  return traj;
}

ScalarBundleField pullback_structure(const ScalarBundleField& phi_tilde, const DiffeoTrajectory& trajectory,
                                     const MapSample& map, const bundle::InterpolationOptions& opt) {
  const auto& grid = phi_tilde.grid();
  if (!(grid == trajectory.grid)) throw BadResolution("pullback: field and map live on different grids");
  if (phi_tilde.degree() != 2) throw DegreeMismatch("pullback_structure expects F^2");
  const int n2 = grid.n2(), nt = grid.ntheta();
  ScalarBundleField out(grid, 2);
  auto put = [&](std::size_t node, double x1, double x2, double v1, double v2, double norm2) {
    double val = norm2 * bundle::interpolate(phi_tilde, x1, x2, wrap_angle(std::atan2(v2, v1)), opt);
    if (!(val > 0.0) || !std::isfinite(val)) throw NonPositiveF("pulled-back F^2 at node " + std::to_string(node));
    out[node] = val;
  };
  if (trajectory.mode == PullbackMode::HorizontalLift) {
    for (std::size_t n = 0; n < grid.size(); ++n)
      put(n, map.x1[n], map.x2[n], map.v1[n], map.v2[n], map.v1[n] * map.v1[n] + map.v2[n] * map.v2[n]);
    return out;
  }
  // Displacement and its differential D = dPhi - I.
  Array d1(grid.lines()), d2(grid.lines());
  for (int i = 0; i < grid.n1(); ++i)
    for (int j = 0; j < n2; ++j) {
      std::size_t b = static_cast<std::size_t>(i) * n2 + j;
      d1[b] = map.x1[b] - grid.x1(i);
      d2[b] = map.x2[b] - grid.x2(j);
    }
  std::array<Array, 4> D;
  base_derivative(grid, d1, 0, D[0]);
  base_derivative(grid, d1, 1, D[1]);
  base_derivative(grid, d2, 0, D[2]);
  base_derivative(grid, d2, 1, D[3]);
  for (std::size_t b = 0; b < grid.lines(); ++b) {
    // dPhi^T dPhi - I = D + D^T + D^T D, kept separate so the identity map is exact
    const double a11 = D[0][b], a12 = D[1][b], a21 = D[2][b], a22 = D[3][b];
    const double m11 = 2 * a11 + a11 * a11 + a21 * a21;
    const double m12 = a12 + a21 + a11 * a12 + a21 * a22;
    const double m22 = 2 * a22 + a12 * a12 + a22 * a22;
    for (int k = 0; k < nt; ++k) {
      const double c = grid.c(k), s = grid.s(k);
      const double v1 = c + a11 * c + a12 * s, v2 = s + a21 * c + a22 * s;
      const double norm2 = 1.0 + (m11 * c * c + 2 * m12 * c * s + m22 * s * s);
      put(b * nt + k, map.x1[b], map.x2[b], v1, v2, norm2);
    }
  }
  return out;
}

void write_trajectory_csv(std::ostream& out, const DiffeoTrajectory& trajectory) {
  const auto& grid = trajectory.grid;
  const bool lift = trajectory.mode == PullbackMode::HorizontalLift;
  out << (lift ? "t,i,j,k,x1_mapped,x2_mapped,theta_mapped\n" : "t,i,j,x1_mapped,x2_mapped\n");
  char buf[200];
  for (const auto& s : trajectory.samples) {
    std::size_t p = 0;
    for (int i = 0; i < grid.n1(); ++i)
      for (int j = 0; j < grid.n2(); ++j) {
        if (!lift) {
          std::snprintf(buf, sizeof buf, "%.17g,%d,%d,%.17g,%.17g\n", s.t, i, j, s.x1[p], s.x2[p]);
          out << buf;
          ++p;
          continue;
        }
        for (int k = 0; k < grid.ntheta(); ++k, ++p) {
          std::snprintf(buf, sizeof buf, "%.17g,%d,%d,%d,%.17g,%.17g,%.17g\n", s.t, i, j, k, s.x1[p], s.x2[p],
                        wrap_angle(std::atan2(s.v2[p], s.v1[p])));
          out << buf;
        }
      }
  }
}

}  // namespace finsler::pullback
