#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <vector>

#include "finsler/errors.hpp"
#include "finsler/jet.hpp"

namespace finsler {

template <class T>
class SquareMatrix {
 public:
  SquareMatrix() = default;
  explicit SquareMatrix(int n, const T& fill = T(0.0)) : n_(n), a_(static_cast<std::size_t>(n) * n, fill) {}

  static SquareMatrix identity(int n) {
    SquareMatrix m(n);
    for (int i = 0; i < n; ++i) m(i, i) = T(1.0);
    return m;
  }

  int size() const { return n_; }
  T& operator()(int i, int j) { return a_[static_cast<std::size_t>(i) * n_ + j]; }
  const T& operator()(int i, int j) const { return a_[static_cast<std::size_t>(i) * n_ + j]; }

 private:
  int n_ = 0;
  std::vector<T> a_;
};

template <class T>
class Tensor3 {
 public:
  Tensor3() = default;
  explicit Tensor3(int n, const T& fill = T(0.0)) : n_(n), a_(static_cast<std::size_t>(n) * n * n, fill) {}
  int size() const { return n_; }
  T& operator()(int i, int j, int k) { return a_[(static_cast<std::size_t>(i) * n_ + j) * n_ + k]; }
  const T& operator()(int i, int j, int k) const { return a_[(static_cast<std::size_t>(i) * n_ + j) * n_ + k]; }

 private:
  int n_ = 0;
  std::vector<T> a_;
};

template <class T>
class Tensor4 {
 public:
  Tensor4() = default;
  explicit Tensor4(int n, const T& fill = T(0.0)) : n_(n), a_(static_cast<std::size_t>(n) * n * n * n, fill) {}
  int size() const { return n_; }
  T& operator()(int i, int j, int k, int m) { return a_[((static_cast<std::size_t>(i) * n_ + j) * n_ + k) * n_ + m]; }
  const T& operator()(int i, int j, int k, int m) const {
    return a_[((static_cast<std::size_t>(i) * n_ + j) * n_ + k) * n_ + m];
  }

 private:
  int n_ = 0;
  std::vector<T> a_;
};

/// Smallest eigenvalue of a symmetric matrix (Eigen self-adjoint solver).
double min_eigenvalue(const SquareMatrix<double>& m);
/// All eigenvalues of a symmetric matrix in ascending order.
std::vector<double> eigenvalues(const SquareMatrix<double>& m);

inline SquareMatrix<double> values_of(const SquareMatrix<Jet>& m) {
  SquareMatrix<double> r(m.size());
  for (int i = 0; i < m.size(); ++i)
    for (int j = 0; j < m.size(); ++j) r(i, j) = m(i, j).value();
  return r;
}
inline SquareMatrix<double> values_of(const SquareMatrix<double>& m) { return m; }

/// Inverse of a symmetric positive-definite matrix by LDL^T with symmetric
/// (diagonal) pivoting. Throws NotPositiveDefinite if a pivot is not positive.
template <class T>
SquareMatrix<T> spd_inverse(const SquareMatrix<T>& m, const char* context = "metric") {
  const int n = m.size();
  std::vector<int> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  SquareMatrix<T> a = m;
  double scale = 0.0;
  for (int i = 0; i < n; ++i) scale = std::max(scale, std::abs(value_of(m(i, i))));
  for (int k = 0; k < n; ++k) {
    int p = k;
    for (int i = k + 1; i < n; ++i)
      if (value_of(a(i, i)) > value_of(a(p, p))) p = i;
    if (p != k) {
      std::swap(perm[k], perm[p]);
      for (int j = 0; j < n; ++j) std::swap(a(k, j), a(p, j));
      for (int i = 0; i < n; ++i) std::swap(a(i, k), a(i, p));
    }
    double d = value_of(a(k, k));
    if (!(d > 1e-14 * std::max(scale, 1e-300)) || !std::isfinite(d)) {
      throw NotPositiveDefinite(context, min_eigenvalue(values_of(m)));
    }
    std::vector<T> col(n);
    for (int i = k + 1; i < n; ++i) col[i] = a(i, k);
    for (int i = k + 1; i < n; ++i) {
      T l = col[i] / a(k, k);
      for (int j = k + 1; j <= i; ++j) a(i, j) -= l * col[j];
      a(i, k) = l;
    }
    for (int i = k + 1; i < n; ++i)
      for (int j = k + 1; j < i; ++j) a(j, i) = a(i, j);
  }
  // a now holds unit-lower L below the diagonal and D on the diagonal (permuted).
  SquareMatrix<T> inv(n);
  for (int c = 0; c < n; ++c) {
    std::vector<T> z(n, T(0.0));
    z[c] = T(1.0);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < i; ++j) z[i] -= a(i, j) * z[j];
    for (int i = 0; i < n; ++i) z[i] = z[i] / a(i, i);
    for (int i = n - 1; i >= 0; --i)
      for (int j = i + 1; j < n; ++j) z[i] -= a(j, i) * z[j];
    for (int i = 0; i < n; ++i) inv(perm[i], perm[c]) = z[i];
  }
  return inv;
}

}  // namespace finsler
