#pragma once

#include <memory>
#include <span>
#include <string>
#include <vector>

#include "finsler/jet.hpp"
#include "finsler/linalg.hpp"
#include "finsler/torus.hpp"

namespace finsler {

/// Closed-form Finsler structure on the flat torus, evaluable on doubles and
/// on jets so that every x/y derivative is exact.
class AnalyticFinslerStructure {
 public:
  virtual ~AnalyticFinslerStructure() = default;

  int dimension() const { return dim_; }
  virtual double f_squared(std::span<const double> x, std::span<const double> y) const = 0;
  virtual Jet f_squared(std::span<const Jet> x, std::span<const Jet> y) const = 0;
  virtual bool is_riemannian() const { return false; }
  virtual std::string describe() const = 0;

 protected:
  explicit AnalyticFinslerStructure(int dim) : dim_(dim) {}

 private:
  int dim_;
};

using StructurePtr = std::shared_ptr<const AnalyticFinslerStructure>;

/// a_ij(x) = exp(2u(x)) m_ij(x). `entries` holds the upper triangle of m row by
/// row (m11, m12, ..., m22, ...); empty means the identity.
struct RiemannianSpec {
  int dim = 2;
  TorusFunction conformal;
  std::vector<TorusFunction> entries;
};

class RiemannianStructure final : public AnalyticFinslerStructure {
 public:
  explicit RiemannianStructure(RiemannianSpec spec);

  double f_squared(std::span<const double> x, std::span<const double> y) const override;
  Jet f_squared(std::span<const Jet> x, std::span<const Jet> y) const override;
  bool is_riemannian() const override { return true; }
  std::string describe() const override;

  const RiemannianSpec& spec() const { return spec_; }
  template <class T>
  SquareMatrix<T> metric(std::span<const T> x) const;

 private:
  template <class T>
  T eval(std::span<const T> x, std::span<const T> y) const;
  RiemannianSpec spec_;
};

/// F = sqrt(a(y,y)) + b(x).y with b_i(x) = components_i(x) * profile(x).
struct RandersSpec {
  RiemannianSpec alpha;
  std::vector<TorusFunction> b_components;
  TorusFunction b_profile = TorusFunction::constant(1.0);
};

class RandersStructure final : public AnalyticFinslerStructure {
 public:
  /// Throws ConvexityViolated unless sup_x |b|_a < 1 on a sampling grid.
  explicit RandersStructure(RandersSpec spec);

  double f_squared(std::span<const double> x, std::span<const double> y) const override;
  Jet f_squared(std::span<const Jet> x, std::span<const Jet> y) const override;
  std::string describe() const override;

  SquareMatrix<double> alpha_metric(std::span<const double> x) const { return alpha_.metric<double>(x); }
  std::vector<double> one_form(std::span<const double> x) const;
  double sup_b_norm() const { return sup_b_norm_; }

 private:
  template <class T>
  std::vector<T> b(std::span<const T> x) const;
  template <class T>
  T eval(std::span<const T> x, std::span<const T> y) const;
  RandersSpec spec_;
  RiemannianStructure alpha_;
  double sup_b_norm_ = 0.0;
};

/// F^2 = F_base^2 (1 + eps rho(x) sum_i (y^i)^4 / |y|^4).
class ScalarPerturbation final : public AnalyticFinslerStructure {
 public:
  ScalarPerturbation(StructurePtr base, double epsilon, TorusFunction profile);

  double f_squared(std::span<const double> x, std::span<const double> y) const override;
  Jet f_squared(std::span<const Jet> x, std::span<const Jet> y) const override;
  std::string describe() const override;

 private:
  template <class T>
  T eval(std::span<const T> x, std::span<const T> y) const;
  StructurePtr base_;
  double epsilon_;
  TorusFunction profile_;
};

/// Pullback by a torus diffeomorphism psi: F^2(x,y) = F_base^2(psi(x), dpsi(x) y).
class PulledBackStructure final : public AnalyticFinslerStructure {
 public:
  PulledBackStructure(StructurePtr base, AnalyticDiffeo psi);

  double f_squared(std::span<const double> x, std::span<const double> y) const override;
  Jet f_squared(std::span<const Jet> x, std::span<const Jet> y) const override;
  bool is_riemannian() const override { return base_->is_riemannian(); }
  std::string describe() const override;

  const AnalyticDiffeo& diffeo() const { return psi_; }
  const StructurePtr& base() const { return base_; }

 private:
  template <class T>
  T eval(std::span<const T> x, std::span<const T> y) const;
  StructurePtr base_;
  AnalyticDiffeo psi_;
};

StructurePtr make_euclidean(int dim = 2);
StructurePtr make_conformal(double epsilon, int dim = 2);  // u = eps cos x^1
StructurePtr make_riemannian(RiemannianSpec spec);
StructurePtr make_randers(RandersSpec spec);
StructurePtr make_scalar_perturbation(StructurePtr base, double epsilon, TorusFunction profile);
StructurePtr make_pulled_back(StructurePtr base, AnalyticDiffeo psi);

}  // namespace finsler
