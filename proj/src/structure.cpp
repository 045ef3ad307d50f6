#include "finsler/structure.hpp"

#include <cmath>
#include <sstream>

#include "finsler/errors.hpp"

namespace finsler {

namespace {

int triangle_size(int n) { return n * (n + 1) / 2; }

int triangle_index(int n, int i, int j) {
  if (i > j) std::swap(i, j);
  return i * n - i * (i - 1) / 2 + (j - i);
}

template <class T>
T checked_sqrt(const T& v, const char* what) {
  if (!(value_of(v) > 0.0)) throw NonPositiveF(what);
  using std::sqrt;
  return sqrt(v);
}

}  // namespace

RiemannianStructure::RiemannianStructure(RiemannianSpec spec)
    : AnalyticFinslerStructure(spec.dim), spec_(std::move(spec)) {
  const int n = spec_.dim;
  if (n < 2) throw ConfigError("dimension must be >= 2");
  if (!spec_.entries.empty() && static_cast<int>(spec_.entries.size()) != triangle_size(n))
    throw ConfigError("Riemannian metric needs n(n+1)/2 entries");
  if (spec_.entries.empty()) return;
  const int samples = n == 2 ? 32 : 8;
  std::vector<double> x(n, 0.0);
  std::vector<int> idx(n, 0);
  for (;;) {
    for (int i = 0; i < n; ++i) x[i] = 2 * std::numbers::pi * idx[i] / samples;
    double lo = min_eigenvalue(metric<double>(x));
    if (!(lo > 0)) throw NotPositiveDefinite("Riemannian coefficient matrix", lo);
    int d = 0;
    while (d < n && ++idx[d] == samples) idx[d++] = 0;
    if (d == n) break;
  }
}

template <class T>
SquareMatrix<T> RiemannianStructure::metric(std::span<const T> x) const {
  const int n = spec_.dim;
  using std::exp;
  T scale = exp(2.0 * spec_.conformal(x));
  SquareMatrix<T> a(n);
  for (int i = 0; i < n; ++i) {
    for (int j = i; j < n; ++j) {
      T m = spec_.entries.empty() ? T(i == j ? 1.0 : 0.0) : spec_.entries[triangle_index(n, i, j)](x);
      a(i, j) = scale * m;
      a(j, i) = a(i, j);
    }
  }
  return a;
}

template SquareMatrix<double> RiemannianStructure::metric<double>(std::span<const double>) const;
template SquareMatrix<Jet> RiemannianStructure::metric<Jet>(std::span<const Jet>) const;

template <class T>
T RiemannianStructure::eval(std::span<const T> x, std::span<const T> y) const {
  const int n = spec_.dim;
  using std::exp;
  T scale = exp(2.0 * spec_.conformal(x));
  if (spec_.entries.empty()) {
    T s = y[0] * y[0];
    for (int i = 1; i < n; ++i) s += y[i] * y[i];
    return scale * s;
  }
  T s(0.0);
  for (int i = 0; i < n; ++i) {
    for (int j = i; j < n; ++j) {
      T m = spec_.entries[triangle_index(n, i, j)](x);
      s += (i == j ? 1.0 : 2.0) * (m * (y[i] * y[j]));
    }
  }
  return scale * s;
}

double RiemannianStructure::f_squared(std::span<const double> x, std::span<const double> y) const {
  return eval<double>(x, y);
}
Jet RiemannianStructure::f_squared(std::span<const Jet> x, std::span<const Jet> y) const { return eval<Jet>(x, y); }

std::string RiemannianStructure::describe() const {
  std::ostringstream out;
  out << "riemannian(u=" << spec_.conformal.describe();
  for (const auto& e : spec_.entries) out << ", m=" << e.describe();
  out << ")";
  return out.str();
}

RandersStructure::RandersStructure(RandersSpec spec)
    : AnalyticFinslerStructure(spec.alpha.dim), spec_(std::move(spec)), alpha_(spec_.alpha) {
  const int n = dimension();
  if (static_cast<int>(spec_.b_components.size()) != n) throw ConfigError("Randers one-form needs n components");
  const int samples = n == 2 ? 48 : 12;
  std::vector<double> x(n, 0.0);
  std::vector<int> idx(n, 0);
  for (;;) {
    for (int i = 0; i < n; ++i) x[i] = 2 * std::numbers::pi * idx[i] / samples;
    auto a = alpha_.metric<double>(x);
    auto ainv = spd_inverse(a, "Randers alpha metric");
    auto bv = b<double>(x);
    double s = 0.0;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) s += ainv(i, j) * bv[i] * bv[j];
    sup_b_norm_ = std::max(sup_b_norm_, std::sqrt(s));
    int d = 0;
    while (d < n && ++idx[d] == samples) idx[d++] = 0;
    if (d == n) break;
  }
  if (!(sup_b_norm_ < 1.0))
    throw ConvexityViolated("Randers one-form has |b|_a = " + std::to_string(sup_b_norm_) + " >= 1");
}

template <class T>
std::vector<T> RandersStructure::b(std::span<const T> x) const {
  T p = spec_.b_profile(x);
  std::vector<T> out;
  for (const auto& c : spec_.b_components) out.push_back(c(x) * p);
  return out;
}

template <class T>
T RandersStructure::eval(std::span<const T> x, std::span<const T> y) const {
  T a2 = alpha_.f_squared(x, y);
  T alpha = checked_sqrt(a2, "Randers alpha(y,y) <= 0");
  auto bv = b<T>(x);
  T beta = bv[0] * y[0];
  for (int i = 1; i < dimension(); ++i) beta += bv[i] * y[i];
  T F = alpha + beta;
  if (!(value_of(F) > 0.0)) throw NonPositiveF("Randers alpha + beta <= 0");
  return F * F;
}

std::vector<double> RandersStructure::one_form(std::span<const double> x) const { return b<double>(x); }

double RandersStructure::f_squared(std::span<const double> x, std::span<const double> y) const {
  return eval<double>(x, y);
}
Jet RandersStructure::f_squared(std::span<const Jet> x, std::span<const Jet> y) const { return eval<Jet>(x, y); }

std::string RandersStructure::describe() const {
  std::ostringstream out;
  out << "randers(alpha=" << alpha_.describe() << ", profile=" << spec_.b_profile.describe();
  for (const auto& c : spec_.b_components) out << ", b=" << c.describe();
  out << ")";
  return out.str();
}

ScalarPerturbation::ScalarPerturbation(StructurePtr base, double epsilon, TorusFunction profile)
    : AnalyticFinslerStructure(base->dimension()), base_(std::move(base)), epsilon_(epsilon), profile_(std::move(profile)) {}

template <class T>
T ScalarPerturbation::eval(std::span<const T> x, std::span<const T> y) const {
  T quartic = y[0] * y[0] * y[0] * y[0];
  T r2 = y[0] * y[0];
  for (int i = 1; i < dimension(); ++i) {
    T sq = y[i] * y[i];
    quartic += sq * sq;
    r2 += sq;
  }
  T base = base_->f_squared(x, y);
  T factor = 1.0 + epsilon_ * profile_(x) * (quartic / (r2 * r2));
  T f2 = base * factor;
  if (!(value_of(f2) > 0.0)) throw NonPositiveF("perturbed F^2 <= 0");
  return f2;
}

double ScalarPerturbation::f_squared(std::span<const double> x, std::span<const double> y) const {
  return eval<double>(x, y);
}
Jet ScalarPerturbation::f_squared(std::span<const Jet> x, std::span<const Jet> y) const { return eval<Jet>(x, y); }

std::string ScalarPerturbation::describe() const {
  std::ostringstream out;
  out << "perturbed(" << base_->describe() << ", eps=" << epsilon_ << ", rho=" << profile_.describe() << ")";
  return out.str();
}

PulledBackStructure::PulledBackStructure(StructurePtr base, AnalyticDiffeo psi)
    : AnalyticFinslerStructure(base->dimension()), base_(std::move(base)), psi_(std::move(psi)) {
  if (psi_.dimension() != dimension()) throw ConfigError("diffeomorphism dimension mismatch");
}

template <class T>
T PulledBackStructure::eval(std::span<const T> x, std::span<const T> y) const {
  const int n = dimension();
  auto px = psi_(x);
  auto J = psi_.jacobian(x);
  std::vector<T> py(n, T(0.0));
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) py[i] += J(i, j) * y[j];
  return base_->f_squared(std::span<const T>(px), std::span<const T>(py));
}

double PulledBackStructure::f_squared(std::span<const double> x, std::span<const double> y) const {
  return eval<double>(x, y);
}
Jet PulledBackStructure::f_squared(std::span<const Jet> x, std::span<const Jet> y) const { return eval<Jet>(x, y); }

std::string PulledBackStructure::describe() const { return "pullback(" + base_->describe() + ")"; }

StructurePtr make_euclidean(int dim) {
  RiemannianSpec s;
  s.dim = dim;
  return std::make_shared<RiemannianStructure>(s);
}

StructurePtr make_conformal(double epsilon, int dim) {
  RiemannianSpec s;
  s.dim = dim;
  std::vector<int> k(dim, 0);
  k[0] = 1;
  s.conformal = TorusFunction::cosine(0.0, {{epsilon, k, 0.0}});
  return std::make_shared<RiemannianStructure>(s);
}

StructurePtr make_riemannian(RiemannianSpec spec) { return std::make_shared<RiemannianStructure>(std::move(spec)); }
StructurePtr make_randers(RandersSpec spec) { return std::make_shared<RandersStructure>(std::move(spec)); }
StructurePtr make_scalar_perturbation(StructurePtr base, double epsilon, TorusFunction profile) {
  return std::make_shared<ScalarPerturbation>(std::move(base), epsilon, std::move(profile));
}
StructurePtr make_pulled_back(StructurePtr base, AnalyticDiffeo psi) {
  return std::make_shared<PulledBackStructure>(std::move(base), std::move(psi));
}

}  // namespace finsler
