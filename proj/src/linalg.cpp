#include "finsler/linalg.hpp"

#include <Eigen/Eigenvalues>

namespace finsler {

std::vector<double> eigenvalues(const SquareMatrix<double>& m) {
  const int n = m.size();
  Eigen::MatrixXd a(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) a(i, j) = 0.5 * (m(i, j) + m(j, i));
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(a, Eigen::EigenvaluesOnly);
  std::vector<double> out(n);
  for (int i = 0; i < n; ++i) out[i] = solver.eigenvalues()(i);
  return out;
}

double min_eigenvalue(const SquareMatrix<double>& m) {
  for (int i = 0; i < m.size(); ++i)
    for (int j = 0; j < m.size(); ++j)
      if (!std::isfinite(m(i, j))) return std::nan("");
  return eigenvalues(m).front();
}

}  // namespace finsler
