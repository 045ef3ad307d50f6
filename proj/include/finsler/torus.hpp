#pragma once

#include <cmath>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include "finsler/jet.hpp"
#include "finsler/linalg.hpp"

namespace finsler {

/// Flat torus chart: x^i is periodic with period periods[i].
struct BaseDomain {
  int dimension = 2;
  std::vector<double> periods{2 * std::numbers::pi, 2 * std::numbers::pi};

  static BaseDomain standard(int n) { return {n, std::vector<double>(n, 2 * std::numbers::pi)}; }
  void validate() const;
};

struct CosineMode {
  double amplitude = 0.0;
  std::vector<int> wave;
  double phase = 0.0;
};

/// c + sum_m a_m cos(k_m . x + p_m), optionally exponentiated. All wave
/// vectors are integral so the function is 2pi-periodic in every coordinate.
class TorusFunction {
 public:
  TorusFunction() = default;
  static TorusFunction constant(double c);
  static TorusFunction cosine(double constant, std::vector<CosineMode> modes, bool exponential = false);
  /// exp(kappa * sum_i (cos(x^i - c^i) - 1)); equals 1 at the center.
  static TorusFunction bump(double kappa, std::vector<double> center);

  /// Text form: terms separated by ';'. A term is a number, `cos A k1..kn P`,
  /// `sin A k1..kn` or `bump KAPPA c1..cn`. A leading `exp:` exponentiates the sum.
  static TorusFunction parse(const std::string& text, int dim);
  std::string describe() const;

  double constant_term() const { return constant_; }
  const std::vector<CosineMode>& modes() const { return modes_; }
  bool exponential() const { return exponential_; }

  template <class T>
  T operator()(std::span<const T> x) const {
    T s = T(constant_);
    for (const auto& m : modes_) {
      T arg = T(m.phase);
      for (std::size_t i = 0; i < m.wave.size(); ++i)
        if (m.wave[i] != 0) arg += static_cast<double>(m.wave[i]) * x[i];
      using std::cos;
      s += m.amplitude * cos(arg);
    }
    if (exponential_) {
      using std::exp;
      return exp(s);
    }
    return s;
  }

 private:
  double constant_ = 0.0;
  std::vector<CosineMode> modes_;
  bool exponential_ = false;
};

struct DiffeoMode {
  std::vector<double> displacement;
  std::vector<int> wave;
  double phase = 0.0;
};

/// Torus diffeomorphism x -> x + sum_m d_m sin(k_m . x + p_m). Invertibility is
/// guaranteed by requiring sum_m |d_m| |k_m| < 1.
class AnalyticDiffeo {
 public:
  AnalyticDiffeo(int dim, std::vector<DiffeoMode> modes);
  static AnalyticDiffeo identity(int dim) { return AnalyticDiffeo(dim, {}); }
  static AnalyticDiffeo parse(const std::string& text, int dim);

  int dimension() const { return dim_; }
  const std::vector<DiffeoMode>& modes() const { return modes_; }

  template <class T>
  std::vector<T> operator()(std::span<const T> x) const {
    std::vector<T> out(x.begin(), x.end());
    for (const auto& m : modes_) {
      T s = sin(phase_arg(m, x));
      for (int i = 0; i < dim_; ++i)
        if (m.displacement[i] != 0.0) out[i] += m.displacement[i] * s;
    }
    return out;
  }

  template <class T>
  SquareMatrix<T> jacobian(std::span<const T> x) const {
    SquareMatrix<T> J = SquareMatrix<T>::identity(dim_);
    for (const auto& m : modes_) {
      T c = cos(phase_arg(m, x));
      for (int i = 0; i < dim_; ++i)
        for (int j = 0; j < dim_; ++j)
          if (m.displacement[i] != 0.0 && m.wave[j] != 0) J(i, j) += (m.displacement[i] * m.wave[j]) * c;
    }
    return J;
  }

 private:
  template <class T>
  static T phase_arg(const DiffeoMode& m, std::span<const T> x) {
    T arg = T(m.phase);
    for (std::size_t i = 0; i < m.wave.size(); ++i)
      if (m.wave[i] != 0) arg += static_cast<double>(m.wave[i]) * x[i];
    return arg;
  }
  static double sin(double v) { return std::sin(v); }
  static double cos(double v) { return std::cos(v); }
  static Jet sin(const Jet& v) { return finsler::sin(v); }
  static Jet cos(const Jet& v) { return finsler::cos(v); }

  int dim_;
  std::vector<DiffeoMode> modes_;
};

}  // namespace finsler
