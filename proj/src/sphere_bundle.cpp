#include "finsler/sphere_bundle.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>

#include "fiber_transform.hpp"
#include "finsler/errors.hpp"

namespace finsler::bundle {

SphereBundleGrid::SphereBundleGrid(int n1, int n2, int ntheta, double period1, double period2)
    : n1_(n1), n2_(n2), nt_(ntheta), p1_(period1), p2_(period2) {
  for (int n : {n1, n2, ntheta}) {
    if (n < 8 || n % 2 != 0)
      throw BadResolution("grid counts must be even and >= 8, got " + std::to_string(n1) + "x" +
                          std::to_string(n2) + "x" + std::to_string(ntheta));
  }
  if (!(period1 > 0) || !(period2 > 0)) throw BadResolution("periods must be positive");
  cos_.resize(nt_);
  sin_.resize(nt_);
  for (int k = 0; k < nt_; ++k) {
    cos_[k] = std::cos(theta(k));
    sin_[k] = std::sin(theta(k));
  }
}

SphereBundleGrid build_grid(int n1, int n2, int ntheta) { return SphereBundleGrid(n1, n2, ntheta); }

ScalarBundleField::ScalarBundleField(SphereBundleGrid grid, int degree)
    : grid_(std::move(grid)), degree_(degree), values_(grid_.size(), 0.0) {
  if (degree != 0 && degree != 2) throw DegreeMismatch("field degree must be 0 or 2");
}

ScalarBundleField::ScalarBundleField(SphereBundleGrid grid, int degree, std::vector<double> values)
    : grid_(std::move(grid)), degree_(degree), values_(std::move(values)) {
  if (degree != 0 && degree != 2) throw DegreeMismatch("field degree must be 0 or 2");
  if (values_.size() != grid_.size()) throw BadResolution("value count does not match grid");
}

void ScalarBundleField::check_compatible(const ScalarBundleField& o, const char* op) const {
  if (!(grid_ == o.grid_)) throw BadResolution(std::string(op) + ": grids differ");
  if (degree_ != o.degree_)
    throw DegreeMismatch(std::string(op) + " of degree " + std::to_string(degree_) + " and degree " +
                         std::to_string(o.degree_) + " fields");
}

ScalarBundleField& ScalarBundleField::operator+=(const ScalarBundleField& o) {
  check_compatible(o, "sum");
  for (std::size_t n = 0; n < values_.size(); ++n) values_[n] += o.values_[n];
  return *this;
}

ScalarBundleField& ScalarBundleField::operator-=(const ScalarBundleField& o) {
  check_compatible(o, "difference");
  for (std::size_t n = 0; n < values_.size(); ++n) values_[n] -= o.values_[n];
  return *this;
}

ScalarBundleField& ScalarBundleField::operator*=(double s) {
  for (double& v : values_) v *= s;
  return *this;
}

ScalarBundleField operator*(const ScalarBundleField& a, const ScalarBundleField& b) {
  if (!(a.grid_ == b.grid_)) throw BadResolution("product: grids differ");
  int d = a.degree_ + b.degree_;
  if (d != 0 && d != 2) throw DegreeMismatch("product would have degree " + std::to_string(d));
  ScalarBundleField r(a.grid_, d);
  for (std::size_t n = 0; n < r.values_.size(); ++n) r.values_[n] = a.values_[n] * b.values_[n];
  return r;
}

double ScalarBundleField::sup_norm() const {
  double m = 0.0;
  for (double v : values_) m = std::max(m, std::abs(v));
  return m;
}

double sup_difference(const ScalarBundleField& a, const ScalarBundleField& b) {
  if (!(a.grid() == b.grid())) throw BadResolution("sup_difference: grids differ");
  double m = 0.0;
  for (std::size_t n = 0; n < a.size(); ++n) m = std::max(m, std::abs(a[n] - b[n]));
  return m;
}

SquareMatrix<double> TensorBundleField::at(std::size_t node) const {
  SquareMatrix<double> m(2);
  m(0, 0) = c11[node];
  m(0, 1) = m(1, 0) = c12[node];
  m(1, 1) = c22[node];
  return m;
}

void TensorBundleField::validate() const {
  if (!metric) return;
  for (std::size_t n = 0; n < grid.size(); ++n) {
    double det = c11[n] * c22[n] - c12[n] * c12[n];
    if (!(c11[n] > 0) || !(det > 0)) throw NotPositiveDefinite("metric at node " + std::to_string(n), min_eigenvalue(at(n)));
  }
}

ScalarBundleField sample_structure(const AnalyticFinslerStructure& S, const SphereBundleGrid& grid) {
  if (S.dimension() != 2) throw BadResolution("sphere-bundle grids are two-dimensional");
  ScalarBundleField f(grid, 2);
  double x[2], y[2];
  for (int i = 0; i < grid.n1(); ++i)
    for (int j = 0; j < grid.n2(); ++j) {
      x[0] = grid.x1(i);
      x[1] = grid.x2(j);
      for (int k = 0; k < grid.ntheta(); ++k) {
        y[0] = grid.c(k);
        y[1] = grid.s(k);
        double v = S.f_squared(std::span<const double>(x, 2), std::span<const double>(y, 2));
        if (!(v > 0)) throw NonPositiveF("sampled F^2 <= 0");
        f[grid.index(i, j, k)] = v;
      }
    }
  return f;
}

ScalarBundleField sample_function(const SphereBundleGrid& grid, int degree,
                                  const std::function<double(double, double, double)>& fn) {
  ScalarBundleField f(grid, degree);
  for (int i = 0; i < grid.n1(); ++i)
    for (int j = 0; j < grid.n2(); ++j)
      for (int k = 0; k < grid.ntheta(); ++k) f[grid.index(i, j, k)] = fn(grid.x1(i), grid.x2(j), grid.theta(k));
  return f;
}

namespace {

void fd4_fiber(std::size_t lines, int n, const double* in, double* out, int order) {
  const double h = 2 * std::numbers::pi / n;
  for (std::size_t l = 0; l < lines; ++l) {
    const double* f = in + l * n;
    double* o = out + l * n;
    auto F = [&](int k) { return f[SphereBundleGrid::wrap(k, n)]; };
    for (int k = 0; k < n; ++k) {
      switch (order) {
        case 1:
          o[k] = (F(k - 2) - 8 * F(k - 1) + 8 * F(k + 1) - F(k + 2)) / (12 * h);
          break;
        case 2:
          o[k] = (-F(k - 2) + 16 * F(k - 1) - 30 * F(k) + 16 * F(k + 1) - F(k + 2)) / (12 * h * h);
          break;
        default:
          o[k] = (F(k - 3) - 8 * F(k - 2) + 13 * F(k - 1) - 13 * F(k + 1) + 8 * F(k + 2) - F(k + 3)) / (8 * h * h * h);
      }
    }
  }
}

}  // namespace

void fiber_derivatives(const SphereBundleGrid& grid, FiberScheme scheme, std::span<const double> in,
                       std::span<double> d1, std::span<double> d2, std::span<double> d3) {
  std::vector<double*> outs;
  std::vector<int> orders;
  if (!d1.empty()) outs.push_back(d1.data()), orders.push_back(1);
  if (!d2.empty()) outs.push_back(d2.data()), orders.push_back(2);
  if (!d3.empty()) outs.push_back(d3.data()), orders.push_back(3);
  if (scheme == FiberScheme::Spectral) {
    detail::FiberTransform::get(grid.lines(), grid.ntheta()).derivatives(in.data(), outs, orders);
  } else {
    for (std::size_t q = 0; q < outs.size(); ++q) fd4_fiber(grid.lines(), grid.ntheta(), in.data(), outs[q], orders[q]);
  }
}

void x_derivative(const SphereBundleGrid& grid, std::span<const double> in, int axis, std::span<double> out) {
  const int n1 = grid.n1(), n2 = grid.n2(), nt = grid.ntheta();
  const double inv = 1.0 / (12.0 * grid.h(axis));
  for (int i = 0; i < n1; ++i)
    for (int j = 0; j < n2; ++j) {
      const double *m2, *m1, *p1, *p2;
      if (axis == 0) {
        m2 = &in[grid.index(i - 2, j, 0)];
        m1 = &in[grid.index(i - 1, j, 0)];
        p1 = &in[grid.index(i + 1, j, 0)];
        p2 = &in[grid.index(i + 2, j, 0)];
      } else {
        m2 = &in[grid.index(i, j - 2, 0)];
        m1 = &in[grid.index(i, j - 1, 0)];
        p1 = &in[grid.index(i, j + 1, 0)];
        p2 = &in[grid.index(i, j + 2, 0)];
      }
      double* o = &out[grid.index(i, j, 0)];
      for (int k = 0; k < nt; ++k) o[k] = (m2[k] - 8.0 * m1[k] + 8.0 * p1[k] - p2[k]) * inv;
    }
}

void fiber_bandlimit(const SphereBundleGrid& grid, std::span<double> data, int max_harmonic) {
  if (max_harmonic < 0 || max_harmonic >= grid.ntheta() / 2) return;
  detail::FiberTransform::get(grid.lines(), grid.ntheta()).bandlimit(data.data(), max_harmonic);
}

std::vector<double> fiber_average(const SphereBundleGrid& grid, std::span<const double> data) {
  const int nt = grid.ntheta();
  std::vector<double> out(grid.lines());
  for (std::size_t l = 0; l < out.size(); ++l) {
    double s = 0.0;
    for (int k = 0; k < nt; ++k) s += data[l * nt + k];
    out[l] = s / nt;
  }
  return out;
}

namespace {

struct LineDerivatives {
  double v, d1, d2;
};

LineDerivatives line_derivatives(const ScalarBundleField& f, std::size_t node, FiberScheme scheme) {
  const auto& grid = f.grid();
  const int nt = grid.ntheta();
  auto c = grid.coords(node);
  std::size_t base = grid.index(c[0], c[1], 0);
  std::vector<double> in(f.values().begin() + base, f.values().begin() + base + nt), d1(nt), d2(nt);
  if (scheme == FiberScheme::Spectral) {
    double* outs[2] = {d1.data(), d2.data()};
    int orders[2] = {1, 2};
    detail::FiberTransform::get(1, nt).derivatives(in.data(), outs, orders);
  } else {
    fd4_fiber(1, nt, in.data(), d1.data(), 1);
    fd4_fiber(1, nt, in.data(), d2.data(), 2);
  }
  return {in[c[2]], d1[c[2]], d2[c[2]]};
}

}  // namespace

std::array<double, 2> fiber_derivative(const ScalarBundleField& f, std::size_t node, FiberScheme scheme) {
  auto k = f.grid().coords(node)[2];
  double c = f.grid().c(k), s = f.grid().s(k);
  auto d = line_derivatives(f, node, scheme);
  double deg = f.degree();
  return {deg * d.v * c - d.d1 * s, deg * d.v * s + d.d1 * c};
}

SquareMatrix<double> homogeneous_hessian(const ScalarBundleField& f, std::size_t node, FiberScheme scheme) {
  if (f.degree() != 2) throw DegreeMismatch("homogeneous_hessian needs a degree-2 field");
  auto k = f.grid().coords(node)[2];
  double c = f.grid().c(k), s = f.grid().s(k);
  auto d = line_derivatives(f, node, scheme);
  // H = 2 psi E_rr + psi' (e_r e_t + e_t e_r) + (psi'' + 2 psi) E_tt
  double a = 2 * d.v, b = d.d1, e = d.d2 + 2 * d.v;
  SquareMatrix<double> H(2);
  H(0, 0) = a * c * c - 2 * b * c * s + e * s * s;
  H(1, 1) = a * s * s + 2 * b * c * s + e * c * c;
  H(0, 1) = H(1, 0) = a * c * s + b * (c * c - s * s) - e * c * s;
  return H;
}

TensorBundleField fundamental_tensor_field(const ScalarBundleField& f2, FiberScheme scheme) {
  if (f2.degree() != 2) throw DegreeMismatch("fundamental tensor needs a degree-2 field");
  const auto& grid = f2.grid();
  std::vector<double> d1(grid.size()), d2(grid.size());
  fiber_derivatives(grid, scheme, f2.values(), d1, d2);
  TensorBundleField g(grid);
  g.metric = true;
  for (std::size_t n = 0; n < grid.size(); ++n) {
    int k = static_cast<int>(n % grid.ntheta());
    double c = grid.c(k), s = grid.s(k);
    double a = f2[n], b = 0.5 * d1[n], e = 0.5 * d2[n] + f2[n];
    g.c11[n] = a * c * c - 2 * b * c * s + e * s * s;
    g.c22[n] = a * s * s + 2 * b * c * s + e * c * c;
    g.c12[n] = a * c * s + b * (c * c - s * s) - e * c * s;
  }
  return g;
}

double horizontal_derivative(const ScalarBundleField& f, const ConnectionField& N, std::size_t node, int axis,
                             FiberScheme scheme) {
  const auto& grid = f.grid();
  auto c = grid.coords(node);
  auto at = [&](int di, int dj) {
    return f[grid.index(c[0] + (axis == 0 ? di : 0), c[1] + (axis == 1 ? dj : 0), c[2])];
  };
  double dx = axis == 0 ? (at(-2, 0) - 8 * at(-1, 0) + 8 * at(1, 0) - at(2, 0)) / (12 * grid.h(0))
                        : (at(0, -2) - 8 * at(0, -1) + 8 * at(0, 1) - at(0, 2)) / (12 * grid.h(1));
  auto grad = fiber_derivative(f, node, scheme);
  return dx - N.N[0 * 2 + axis][node] * grad[0] - N.N[1 * 2 + axis][node] * grad[1];
}

void lagrange_weights(double coord, double h, int n, int width, std::span<int> index, std::span<double> weights) {
  double s = coord / h;
  // Snap onto a node so that node queries reproduce node values exactly.
  if (double r = std::round(s); std::abs(s - r) < 1e-12) s = r;
  double fl = std::floor(s);
  int i0 = static_cast<int>(fl);
  double t = s - fl;
  const int first = -(width / 2 - 1);
  for (int a = 0; a < width; ++a) {
    int oa = first + a;
    double w = 1.0;
    for (int b = 0; b < width; ++b) {
      if (b == a) continue;
      int ob = first + b;
      w *= (t - ob) / static_cast<double>(oa - ob);
    }
    weights[a] = w;
    index[a] = SphereBundleGrid::wrap(i0 + oa, n);
  }
}

void trig_weights(double theta, int n, std::span<double> weights) {
  const double h = 2 * std::numbers::pi / n;
  double s = theta / h;
  double r = std::round(s);
  if (std::abs(s - r) < 1e-13) {
    std::fill(weights.begin(), weights.end(), 0.0);
    weights[SphereBundleGrid::wrap(static_cast<int>(r), n)] = 1.0;
    return;
  }
  for (int k = 0; k < n; ++k) {
    double d = theta - k * h;
    weights[k] = std::sin(n * d / 2) / (n * std::tan(d / 2));
  }
}

double interpolate(const ScalarBundleField& f, double x1, double x2, double theta, const InterpolationOptions& opt) {
  const auto& grid = f.grid();
  const int w = opt.x_stencil;
  const int nt = grid.ntheta();
  std::vector<int> i1(w), i2(w);
  std::vector<double> w1(w), w2(w);
  lagrange_weights(x1, grid.h(0), grid.n1(), w, i1, w1);
  lagrange_weights(x2, grid.h(1), grid.n2(), w, i2, w2);
  std::vector<double> wt(nt, 0.0);
  std::vector<int> kt;
  if (opt.spectral_theta) {
    trig_weights(theta, nt, wt);
    for (int k = 0; k < nt; ++k)
      if (wt[k] != 0.0) kt.push_back(k);
  } else {
    std::vector<int> idx(w);
    std::vector<double> ww(w);
    lagrange_weights(theta, grid.htheta(), nt, w, idx, ww);
    for (int a = 0; a < w; ++a) {
      wt[idx[a]] += ww[a];
      kt.push_back(idx[a]);
    }
    std::sort(kt.begin(), kt.end());
    kt.erase(std::unique(kt.begin(), kt.end()), kt.end());
  }
  double sum = 0.0;
  for (int a = 0; a < w; ++a) {
    if (w1[a] == 0.0) continue;
    for (int b = 0; b < w; ++b) {
      if (w2[b] == 0.0) continue;
      const double* line = &f.values()[grid.index(i1[a], i2[b], 0)];
      double inner = 0.0;
      for (int k : kt) inner += wt[k] * line[k];
      sum += w1[a] * w2[b] * inner;
    }
  }
  return sum;
}

double interpolate_base(const SphereBundleGrid& grid, std::span<const double> values, double x1, double x2, int width) {
  std::vector<int> i1(width), i2(width);
  std::vector<double> w1(width), w2(width);
  lagrange_weights(x1, grid.h(0), grid.n1(), width, i1, w1);
  lagrange_weights(x2, grid.h(1), grid.n2(), width, i2, w2);
  double sum = 0.0;
  for (int a = 0; a < width; ++a) {
    if (w1[a] == 0.0) continue;
    double inner = 0.0;
    for (int b = 0; b < width; ++b) inner += w2[b] * values[static_cast<std::size_t>(i1[a]) * grid.n2() + i2[b]];
    sum += w1[a] * inner;
  }
  return sum;
}

void write_fields_csv(std::ostream& out, const std::vector<const ScalarBundleField*>& fields,
                      const std::vector<std::string>& names) {
  if (fields.empty() || fields.size() != names.size()) throw std::invalid_argument("write_fields_csv: bad columns");
  const auto& grid = fields.front()->grid();
  out << "i,j,k,x1,x2,theta";
  for (const auto& n : names) out << ',' << n;
  out << '\n';
  char buf[64];
  for (int i = 0; i < grid.n1(); ++i)
    for (int j = 0; j < grid.n2(); ++j)
      for (int k = 0; k < grid.ntheta(); ++k) {
        out << i << ',' << j << ',' << k;
        for (double v : {grid.x1(i), grid.x2(j), grid.theta(k)}) {
          std::snprintf(buf, sizeof buf, ",%.17g", v);
          out << buf;
        }
        std::size_t node = grid.index(i, j, k);
        for (const auto* f : fields) {
          std::snprintf(buf, sizeof buf, ",%.17g", (*f)[node]);
          out << buf;
        }
        out << '\n';
      }
}

void write_fields_csv(const std::string& path, const std::vector<const ScalarBundleField*>& fields,
                      const std::vector<std::string>& names) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  write_fields_csv(out, fields, names);
}

std::vector<ScalarBundleField> read_fields_csv(std::istream& in, int degree, std::vector<std::string>* names) {
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("empty field dump");
  std::vector<std::string> header;
  {
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) header.push_back(cell);
  }
  if (header.size() < 7) throw std::runtime_error("field dump has no value columns");
  const std::size_t nv = header.size() - 6;
  struct Row {
    int i, j, k;
    double x1, x2;
    std::vector<double> v;
  };
  std::vector<Row> rows;
  int n1 = 0, n2 = 0, nt = 0;
  double h1 = 0, h2 = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    Row r;
    const char* p = line.c_str();
    char* end;
    r.i = static_cast<int>(std::strtol(p, &end, 10));
    r.j = static_cast<int>(std::strtol(end + 1, &end, 10));
    r.k = static_cast<int>(std::strtol(end + 1, &end, 10));
    r.x1 = std::strtod(end + 1, &end);
    r.x2 = std::strtod(end + 1, &end);
    std::strtod(end + 1, &end);
    for (std::size_t q = 0; q < nv; ++q) r.v.push_back(std::strtod(end + 1, &end));
    n1 = std::max(n1, r.i + 1);
    n2 = std::max(n2, r.j + 1);
    nt = std::max(nt, r.k + 1);
    if (r.i == 1) h1 = r.x1;
    if (r.j == 1) h2 = r.x2;
    rows.push_back(std::move(r));
  }
  SphereBundleGrid grid(n1, n2, nt, h1 * n1, h2 * n2);
  if (rows.size() != grid.size()) throw std::runtime_error("field dump is incomplete");
  std::vector<ScalarBundleField> out(nv, ScalarBundleField(grid, degree));
  for (const auto& r : rows)
    for (std::size_t q = 0; q < nv; ++q) out[q][grid.index(r.i, r.j, r.k)] = r.v[q];
  if (names) names->assign(header.begin() + 6, header.end());
  return out;
}

}  // namespace finsler::bundle
