#include "finsler/jet.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <stdexcept>

namespace finsler {

namespace {

void enumerate(int vars, int degree, int var, std::vector<int>& current, std::vector<std::vector<int>>& out) {
  if (var == vars - 1) {
    current[var] = degree;
    out.push_back(current);
    current[var] = 0;
    return;
  }
  for (int e = degree; e >= 0; --e) {
    current[var] = e;
    enumerate(vars, degree - e, var + 1, current, out);
  }
  current[var] = 0;
}

double factorial(int k) {
  double r = 1.0;
  for (int i = 2; i <= k; ++i) r *= i;
  return r;
}

}  // namespace

JetLayout::JetLayout(int vars, int max_order) : vars_(vars), max_order_(max_order) {
  if (vars < 1 || max_order < 0) throw std::invalid_argument("JetLayout: bad dimensions");
  std::vector<int> current(vars, 0);
  count_upto_.assign(max_order + 1, 0);
  for (int d = 0; d <= max_order; ++d) {
    enumerate(vars, d, 0, current, exponents_);
    count_upto_[d] = static_cast<int>(exponents_.size());
  }
  full_ = count_upto_[max_order];
  degree_.resize(full_);
  std::map<std::vector<int>, int> lookup;
  for (int m = 0; m < full_; ++m) {
    int d = 0;
    for (int e : exponents_[m]) d += e;
    degree_[m] = d;
    lookup[exponents_[m]] = m;
  }
  product_.assign(static_cast<std::size_t>(full_) * full_, -1);
  std::vector<int> sum(vars);
  for (int a = 0; a < full_; ++a) {
    for (int b = 0; b < full_; ++b) {
      if (degree_[a] + degree_[b] > max_order) continue;
      for (int v = 0; v < vars; ++v) sum[v] = exponents_[a][v] + exponents_[b][v];
      product_[static_cast<std::size_t>(a) * full_ + b] = lookup.at(sum);
    }
  }
  derivative_terms_.resize(vars);
  for (int v = 0; v < vars; ++v) {
    for (int m = 0; m < full_; ++m) {
      int e = exponents_[m][v];
      if (e == 0) continue;
      std::vector<int> lowered = exponents_[m];
      --lowered[v];
      derivative_terms_[v].push_back({m, lookup.at(lowered), static_cast<double>(e)});
    }
  }
}

int JetLayout::index_of(std::span<const int> exponents) const {
  for (int m = 0; m < full_; ++m) {
    if (std::equal(exponents.begin(), exponents.end(), exponents_[m].begin())) return m;
  }
  return -1;
}

const JetLayout& JetLayout::get(int vars, int max_order) {
  static std::mutex mutex;
  static std::map<std::pair<int, int>, std::unique_ptr<JetLayout>> cache;
  std::lock_guard<std::mutex> lock(mutex);
  auto& slot = cache[{vars, max_order}];
  if (!slot) slot.reset(new JetLayout(vars, max_order));
  return *slot;
}

Jet Jet::constant(const JetLayout& layout, double value, int order) {
  if (order > layout.max_order()) throw std::invalid_argument("Jet: order exceeds layout");
  Jet j;
  j.layout_ = &layout;
  j.order_ = order;
  j.coeffs_.assign(layout.size(order), 0.0);
  j.coeffs_[0] = value;
  return j;
}

Jet Jet::variable(const JetLayout& layout, int var, double value, int order) {
  Jet j = constant(layout, value, order);
  if (order >= 1) j.coeffs_[1 + var] = 1.0;
  return j;
}

double Jet::derivative(std::span<const int> multi_index) const {
  int total = 0;
  double scale = 1.0;
  for (int e : multi_index) {
    total += e;
    scale *= factorial(e);
  }
  if (total == 0) return coeffs_[0];
  if (!layout_) return 0.0;
  if (total > order_) throw std::logic_error("Jet: derivative beyond carried order");
  int m = layout_->index_of(multi_index);
  return scale * coeffs_[m];
}

Jet& Jet::operator+=(const Jet& o) {
  if (!o.layout_) {
    coeffs_[0] += o.coeffs_[0];
    return *this;
  }
  if (!layout_) {
    double v = coeffs_[0];
    *this = o;
    coeffs_[0] += v;
    return *this;
  }
  if (o.order_ < order_) {
    order_ = o.order_;
    coeffs_.resize(layout_->size(order_));
  }
  for (std::size_t m = 0; m < coeffs_.size(); ++m) coeffs_[m] += o.coeffs_[m];
  return *this;
}

Jet& Jet::operator-=(const Jet& o) { return *this += -o; }

Jet& Jet::operator*=(double s) {
  for (double& c : coeffs_) c *= s;
  return *this;
}

Jet& Jet::operator*=(const Jet& o) { return *this = *this * o; }
Jet& Jet::operator/=(const Jet& o) { return *this = *this / o; }

Jet operator-(const Jet& a) {
  Jet r = a;
  for (double& c : r.coeffs_) c = -c;
  return r;
}

Jet operator*(const Jet& a, const Jet& b) {
  if (!a.layout_) return b * a.coeffs_[0];
  if (!b.layout_) return a * b.coeffs_[0];
  const JetLayout& L = *a.layout_;
  int order = std::min(a.order_, b.order_);
  Jet r = Jet::constant(L, 0.0, order);
  const double* ca = a.coeffs_.data();
  const double* cb = b.coeffs_.data();
  double* cr = r.coeffs_.data();
  for (int m = 0; m < L.size(order); ++m) {
    double x = ca[m];
    if (x == 0.0) continue;
    int lim = L.size(order - L.degree(m));
    for (int k = 0; k < lim; ++k) cr[L.product(m, k)] += x * cb[k];
  }
  return r;
}

Jet operator/(const Jet& a, const Jet& b) {
  if (!b.layout_) return a * (1.0 / b.coeffs_[0]);
  return a * reciprocal(b);
}

Jet partial(const Jet& a, int var) {
  if (!a.layout_) return Jet(0.0);
  if (a.order_ == 0) throw std::logic_error("Jet: differentiating an order-0 jet");
  const JetLayout& L = *a.layout_;
  Jet r = Jet::constant(L, 0.0, a.order_ - 1);
  int src_limit = L.size(a.order_);
  for (const auto& t : L.derivative_terms(var)) {
    if (t.src >= src_limit) break;
    r.coeffs_[t.dst] += t.factor * a.coeffs_[t.src];
  }
  return r;
}

Jet compose(const Jet& a, std::span<const double> taylor) {
  if (!a.layout_ || a.order_ == 0) {
    Jet r = a;
    r.coeffs_.assign(r.coeffs_.size(), 0.0);
    r.coeffs_[0] = taylor[0];
    return r;
  }
  Jet h = a;
  h.coeffs_[0] = 0.0;
  int K = a.order_;
  Jet r = Jet::constant(*a.layout_, taylor[K], K);
  for (int k = K - 1; k >= 0; --k) {
    r = r * h;
    r.coeffs_[0] += taylor[k];
  }
  return r;
}

namespace {

int taylor_order(const Jet& a) { return a.layout() ? a.order() : 0; }

}  // namespace

Jet reciprocal(const Jet& a) {
  double x = a.value();
  int K = taylor_order(a);
  std::vector<double> t(K + 1);
  double inv = 1.0 / x;
  double p = inv;
  for (int k = 0; k <= K; ++k) {
    t[k] = (k % 2 == 0 ? 1.0 : -1.0) * p;
    p *= inv;
  }
  return compose(a, t);
}

Jet exp(const Jet& a) {
  int K = taylor_order(a);
  std::vector<double> t(K + 1);
  double e = std::exp(a.value());
  for (int k = 0; k <= K; ++k) t[k] = e / factorial(k);
  return compose(a, t);
}

Jet log(const Jet& a) {
  double x = a.value();
  int K = taylor_order(a);
  std::vector<double> t(K + 1);
  t[0] = std::log(x);
  double p = 1.0;
  for (int k = 1; k <= K; ++k) {
    p /= x;
    t[k] = (k % 2 == 1 ? 1.0 : -1.0) * p / k;
  }
  return compose(a, t);
}

Jet pow(const Jet& a, double q) {
  double x = a.value();
  int K = taylor_order(a);
  std::vector<double> t(K + 1);
  double coef = 1.0;
  for (int k = 0; k <= K; ++k) {
    t[k] = coef * std::pow(x, q - k);
    coef *= (q - k) / (k + 1);
  }
  return compose(a, t);
}

Jet sqrt(const Jet& a) { return pow(a, 0.5); }

Jet sin(const Jet& a) {
  int K = taylor_order(a);
  std::vector<double> t(K + 1);
  double s = std::sin(a.value()), c = std::cos(a.value());
  const double cyc[4] = {s, c, -s, -c};
  for (int k = 0; k <= K; ++k) t[k] = cyc[k % 4] / factorial(k);
  return compose(a, t);
}

Jet cos(const Jet& a) {
  int K = taylor_order(a);
  std::vector<double> t(K + 1);
  double s = std::sin(a.value()), c = std::cos(a.value());
  const double cyc[4] = {c, -s, -c, s};
  for (int k = 0; k <= K; ++k) t[k] = cyc[k % 4] / factorial(k);
  return compose(a, t);
}

}  // namespace finsler
