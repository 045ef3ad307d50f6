#pragma once

#include <climits>
#include <span>
#include <vector>

namespace finsler {

/// Monomial table for truncated Taylor polynomials in `vars` variables up to
/// total degree `max_order`. Monomials are graded by degree so that a jet of
/// order k occupies a prefix of the coefficient array.
class JetLayout {
 public:
  struct DerivativeTerm {
    int src;
    int dst;
    double factor;
  };

  /// Shared, immutable layout for (vars, max_order); safe to call concurrently.
  static const JetLayout& get(int vars, int max_order);

  int vars() const { return vars_; }
  int max_order() const { return max_order_; }
  int size(int order) const { return count_upto_[order]; }
  int degree(int m) const { return degree_[m]; }
  const std::vector<int>& exponents(int m) const { return exponents_[m]; }
  int index_of(std::span<const int> exponents) const;
  int product(int a, int b) const { return product_[static_cast<std::size_t>(a) * full_ + b]; }
  const std::vector<DerivativeTerm>& derivative_terms(int var) const { return derivative_terms_[var]; }

 private:
  JetLayout(int vars, int max_order);

  int vars_;
  int max_order_;
  int full_;
  std::vector<int> count_upto_;
  std::vector<int> degree_;
  std::vector<std::vector<int>> exponents_;
  std::vector<int> product_;
  std::vector<std::vector<DerivativeTerm>> derivative_terms_;
};

/// Truncated multivariate Taylor expansion about a point. Tracks its own valid
/// order: differentiation lowers it by one, binary operations take the minimum.
/// A jet built from a plain double has no layout and infinite order.
class Jet {
 public:
  static constexpr int kExact = INT_MAX;

  Jet() : coeffs_(1, 0.0) {}
  Jet(double v) : coeffs_(1, v) {}  // NOLINT(google-explicit-constructor)

  static Jet variable(const JetLayout& layout, int var, double value, int order);
  static Jet constant(const JetLayout& layout, double value, int order);

  double value() const { return coeffs_[0]; }
  int order() const { return layout_ ? order_ : kExact; }
  const JetLayout* layout() const { return layout_; }
  const std::vector<double>& coefficients() const { return coeffs_; }

  /// d^{|a|} f / dz^a at the expansion point.
  double derivative(std::span<const int> multi_index) const;

  Jet& operator+=(const Jet& o);
  Jet& operator-=(const Jet& o);
  Jet& operator*=(const Jet& o);
  Jet& operator/=(const Jet& o);
  Jet& operator*=(double s);

  friend Jet operator-(const Jet& a);
  friend Jet operator+(Jet a, const Jet& b) { return a += b; }
  friend Jet operator-(Jet a, const Jet& b) { return a -= b; }
  friend Jet operator*(const Jet& a, const Jet& b);
  friend Jet operator/(const Jet& a, const Jet& b);
  friend Jet operator+(Jet a, double b) { return a += Jet(b); }
  friend Jet operator+(double a, Jet b) { return b += Jet(a); }
  friend Jet operator-(Jet a, double b) { return a -= Jet(b); }
  friend Jet operator-(double a, const Jet& b) { return Jet(a) - b; }
  friend Jet operator*(Jet a, double s) { return a *= s; }
  friend Jet operator*(double s, Jet a) { return a *= s; }
  friend Jet operator/(Jet a, double s) { return a *= 1.0 / s; }
  friend Jet operator/(double a, const Jet& b) { return Jet(a) / b; }

  /// Partial derivative with respect to variable `var`; the order drops by one.
  friend Jet partial(const Jet& a, int var);

  /// f(a) given the Taylor coefficients f^{(k)}(a0)/k!, k = 0..order(a).
  friend Jet compose(const Jet& a, std::span<const double> taylor);

 private:
  const JetLayout* layout_ = nullptr;
  int order_ = kExact;
  std::vector<double> coeffs_;
};

Jet reciprocal(const Jet& a);
Jet exp(const Jet& a);
Jet log(const Jet& a);
Jet sqrt(const Jet& a);
Jet sin(const Jet& a);
Jet cos(const Jet& a);
Jet pow(const Jet& a, double p);

inline double value_of(double v) { return v; }
inline double value_of(const Jet& v) { return v.value(); }

}  // namespace finsler
