#ifndef IBL_LINALG_HPP
#define IBL_LINALG_HPP

#include <Eigen/Dense>
#include <cmath>
#include <stdexcept>
#include <tuple>

namespace ibl {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

inline Matrix symmetrize(const Matrix& m) { return 0.5 * (m + m.transpose()); }

inline double sym_defect(const Matrix& m) {
  return (m - m.transpose()).norm() / (1.0 + m.norm());
}

/// Eigenvalues of a symmetric matrix, ascending.
inline Vector sym_eigenvalues(const Matrix& m) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(symmetrize(m), Eigen::EigenvaluesOnly);
  return es.eigenvalues();
}

inline double min_eig(const Matrix& m) {
  if (m.rows() == 0) return 0.0;
  return sym_eigenvalues(m).minCoeff();
}

inline double max_eig(const Matrix& m) {
  if (m.rows() == 0) return 0.0;
  return sym_eigenvalues(m).maxCoeff();
}

inline bool is_spd(const Matrix& m, double tol = 0.0) {
  if (m.rows() == 0) return true;
  return min_eig(m) > tol;
}

/// log det of a symmetric positive-definite matrix; second element false if not PD.
inline std::pair<double, bool> logdet_spd(const Matrix& m) {
  if (m.rows() == 0) return {0.0, true};
  Eigen::SelfAdjointEigenSolver<Matrix> es(symmetrize(m), Eigen::EigenvaluesOnly);
  const Vector& w = es.eigenvalues();
  if (w.minCoeff() <= 0.0) return {0.0, false};
  double s = 0.0;
  for (int i = 0; i < w.size(); ++i) s += std::log(w[i]);
  return {s, true};
}

/// Symmetric square root of an SPD matrix.
inline Matrix spd_sqrt(const Matrix& m) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(symmetrize(m));
  const Vector& w = es.eigenvalues();
  if (w.minCoeff() <= 0.0) throw std::invalid_argument("spd_sqrt: matrix is not positive definite");
  return es.eigenvectors() * w.cwiseSqrt().asDiagonal() * es.eigenvectors().transpose();
}

inline Matrix spd_inverse(const Matrix& m) {
  if (m.rows() == 0) return m;
  Eigen::SelfAdjointEigenSolver<Matrix> es(symmetrize(m));
  const Vector& w = es.eigenvalues();
  if (w.minCoeff() <= 0.0) throw std::invalid_argument("spd_inverse: matrix is not positive definite");
  return es.eigenvectors() * w.cwiseInverse().asDiagonal() * es.eigenvectors().transpose();
}

/// Orthonormal basis of the null space of a (possibly empty) matrix, as columns.
inline Matrix null_space(const Matrix& b, int cols, double tol = 1e-10) {
  if (b.rows() == 0) return Matrix::Identity(cols, cols);
  Eigen::JacobiSVD<Matrix> svd(b, Eigen::ComputeFullV);
  const Vector& sv = svd.singularValues();
  double cutoff = tol * (sv.size() ? sv[0] : 0.0);
  int rank = 0;
  for (int i = 0; i < sv.size(); ++i)
    if (sv[i] > cutoff) ++rank;
  return svd.matrixV().rightCols(cols - rank);
}

inline int row_rank(const Matrix& b, double tol = 1e-10) {
  if (b.rows() == 0) return 0;
  Eigen::JacobiSVD<Matrix> svd(b);
  const Vector& sv = svd.singularValues();
  double cutoff = tol * sv[0];
  int rank = 0;
  for (int i = 0; i < sv.size(); ++i)
    if (sv[i] > cutoff) ++rank;
  return rank;
}

/// Smallest/largest singular value of a nonempty matrix.
inline std::pair<double, double> singular_value_range(const Matrix& b) {
  Eigen::JacobiSVD<Matrix> svd(b);
  const Vector& sv = svd.singularValues();
  return {sv[sv.size() - 1], sv[0]};
}

}  // namespace ibl

#endif
