#ifndef IBL_GAUSSIAN_HPP
#define IBL_GAUSSIAN_HPP

#include <limits>
#include <optional>
#include <vector>

#include "ibl/datum.hpp"

namespace ibl {

/// One symmetric positive-definite matrix per factor; the gaussian input g_{A_j}.
using GaussianTuple = std::vector<Matrix>;

inline void require_shapes(const Datum& d, const GaussianTuple& a) {
  if (static_cast<int>(a.size()) != d.m())
    throw std::invalid_argument("gaussian tuple size does not match datum");
  for (int j = 0; j < d.m(); ++j)
    if (a[j].rows() != d.nj(j) || a[j].cols() != d.nj(j))
      throw std::invalid_argument("gaussian tuple block shape mismatch");
}

/// M(A) = sum_j c_j B_j^T A_j B_j, optionally plus Q.
inline Matrix m_matrix(const Datum& d, const GaussianTuple& a, bool include_q) {
  require_shapes(d, a);
  Matrix m = include_q ? Matrix(d.Q) : Matrix(Matrix::Zero(d.n, d.n));
  for (int j = 0; j < d.m(); ++j)
    m += d.exponents[j] * d.maps[j].transpose() * a[j] * d.maps[j];
  return symmetrize(m);
}

/// Extended-real value of the gaussian Brascamp-Lieb functional.
struct BlValue {
  bool finite = false;
  double log_value = std::numeric_limits<double>::infinity();
  double value = std::numeric_limits<double>::infinity();
};

/// BL(B,c,Q;A) = (prod det(A_j)^{c_j} / det(Q + sum c_j B_j^T A_j B_j))^{1/2},
/// infinite unless the denominator matrix is positive definite.
inline BlValue bl_gaussian(const Datum& d, const GaussianTuple& a) {
  Matrix mt = m_matrix(d, a, true);
  auto [ldm, pd] = logdet_spd(mt);
  if (!pd) return {};
  double s = 0.0;
  for (int j = 0; j < d.m(); ++j) {
    auto [lda, apd] = logdet_spd(a[j]);
    if (!apd) throw std::invalid_argument("bl_gaussian: A_j is not positive definite");
    s += d.exponents[j] * lda;
  }
  BlValue out;
  out.finite = true;
  out.log_value = 0.5 * (s - ldm);
  out.value = std::exp(out.log_value);
  return out;
}

struct PhiResult {
  double value = 0.0;                 // sum c_j logdet A_j - logdet Mtilde (= 2 log BL)
  std::vector<Matrix> gradient;       // c_j (A_j^{-1} - B_j Mtilde^{-1} B_j^T)
};

/// Log-determinant objective and its exact gradient; the directional derivative
/// in direction D is sum_j tr(gradient_j D_j).
inline PhiResult phi_and_gradient(const Datum& d, const GaussianTuple& a) {
  Matrix mt = m_matrix(d, a, true);
  auto [ldm, pd] = logdet_spd(mt);
  if (!pd) throw std::invalid_argument("phi_and_gradient: Mtilde is not positive definite");
  Matrix mti = spd_inverse(mt);
  PhiResult out;
  out.value = -ldm;
  out.gradient.reserve(d.m());
  for (int j = 0; j < d.m(); ++j) {
    auto [lda, apd] = logdet_spd(a[j]);
    if (!apd) throw std::invalid_argument("phi_and_gradient: A_j is not positive definite");
    out.value += d.exponents[j] * lda;
    Matrix br = spd_inverse(a[j]) - d.maps[j] * mti * d.maps[j].transpose();
    out.gradient.push_back(d.exponents[j] * symmetrize(br));
  }
  return out;
}

struct Key2Result {
  double lhs = 0.0;           // <w, M^-1 w> - sum c_j <v_j, A_j^-1 v_j>
  double rhs_identity = 0.0;  // <w', M w'> + sum_{j>m_+} |c_j| <v_j', A_j v_j'>
  double gap = 0.0;           // lhs - rhs_identity
  Vector x_star;
};

/// Evaluates both sides of the quadratic identity behind the flow monotonicity:
/// with w = sum c_j B_j^T v_j and x_* solving B_+ x_* = (A_j^{-1} v_j)_{j<=m_+},
/// the defect <w,M^{-1}w> - sum c_j <v_j,A_j^{-1}v_j> equals
/// <x_*-M^{-1}w, M(x_*-M^{-1}w)> + sum_{j>m_+} |c_j| <B_j x_*-A_j^{-1}v_j, A_j (...)>.
inline Key2Result key2_evaluate(const Datum& d, const GaussianTuple& a,
                                const std::vector<Vector>& v,
                                std::optional<Vector> x_star = std::nullopt) {
  require_shapes(d, a);
  if (static_cast<int>(v.size()) != d.m())
    throw std::invalid_argument("key2_evaluate: vector count mismatch");
  Matrix bp = d.b_plus();
  if (bp.rows() != d.n)
    throw std::invalid_argument("key2_evaluate: B_+ is not square");
  Eigen::FullPivLU<Matrix> lu(bp);
  if (!lu.isInvertible())
    throw std::invalid_argument("key2_evaluate: B_+ is not invertible");
  Matrix m = m_matrix(d, a, false);
  if (!is_spd(m)) throw std::invalid_argument("key2_evaluate: M(A) is not positive definite");

  std::vector<Matrix> ainv(d.m());
  for (int j = 0; j < d.m(); ++j) ainv[j] = spd_inverse(a[j]);

  Key2Result out;
  if (x_star) {
    out.x_star = *x_star;
  } else {
    Vector rhs(d.n);
    int r = 0;
    for (int j = 0; j < d.m_plus; ++j) {
      rhs.segment(r, d.nj(j)) = ainv[j] * v[j];
      r += d.nj(j);
    }
    out.x_star = lu.solve(rhs);
  }

  Vector w = Vector::Zero(d.n);
  for (int j = 0; j < d.m(); ++j) w += d.exponents[j] * d.maps[j].transpose() * v[j];
  Matrix minv = spd_inverse(m);
  double quad = w.dot(minv * w);
  double sum = 0.0;
  for (int j = 0; j < d.m(); ++j) sum += d.exponents[j] * v[j].dot(ainv[j] * v[j]);
  out.lhs = quad - sum;

  Vector wp = out.x_star - minv * w;
  out.rhs_identity = wp.dot(m * wp);
  for (int j = d.m_plus; j < d.m(); ++j) {
    Vector vp = d.maps[j] * out.x_star - ainv[j] * v[j];
    out.rhs_identity += std::abs(d.exponents[j]) * vp.dot(a[j] * vp);
  }
  out.gap = out.lhs - out.rhs_identity;
  return out;
}

/// Stationarity/complementarity diagnostics for a candidate extremizer:
/// condition 1: c_j (A_j^{-1} - B_j Mtilde^{-1} B_j^T) <= 0 for every j,
/// condition 2: (A_j^{-1} - B_j Mtilde^{-1} B_j^T)(G_j - A_j) = 0 for every j.
struct ExtremizerReport {
  std::vector<double> cond1_min_eig;   // of c_j * bracket_j
  std::vector<double> cond1_max_eig;
  std::vector<double> cond2_residual;  // ||bracket_j (G_j - A_j)|| / scale_j
  double tol = 0.0;
  bool condition1 = false;
  bool condition2 = false;

  bool pass() const { return condition1 && condition2; }
  /// Sign-flipped first-order condition for supremum-direction data.
  bool condition1_forward() const {
    for (double lo : cond1_min_eig)
      if (lo < -tol) return false;
    return true;
  }
};

inline ExtremizerReport extremizer_report(const Datum& d, const GaussianTuple& a,
                                          std::optional<double> tol_opt = std::nullopt) {
  require_shapes(d, a);
  if (!d.all_regularized())
    throw std::invalid_argument("extremizer_report: all regularizers must be finite");
  Matrix mt = m_matrix(d, a, true);
  if (!is_spd(mt))
    throw std::invalid_argument("extremizer_report: Mtilde is not positive definite");
  Matrix mti = spd_inverse(mt);
  double tol = tol_opt ? *tol_opt : 1e-8 * (1.0 + max_eig(mti));

  ExtremizerReport rep;
  rep.tol = tol;
  rep.condition1 = true;
  rep.condition2 = true;
  for (int j = 0; j < d.m(); ++j) {
    Matrix br = symmetrize(spd_inverse(a[j]) - d.maps[j] * mti * d.maps[j].transpose());
    Vector w = sym_eigenvalues(d.exponents[j] * br);
    rep.cond1_min_eig.push_back(w.minCoeff());
    rep.cond1_max_eig.push_back(w.maxCoeff());
    rep.condition1 = rep.condition1 && w.maxCoeff() <= tol;

    Matrix gap = *d.regularizers[j] - a[j];
    double scale = (1.0 + max_eig(spd_inverse(a[j]))) * (1.0 + gap.norm());
    double res = (br * gap).norm() / scale;
    rep.cond2_residual.push_back(res);
    rep.condition2 = rep.condition2 && res <= tol;
  }
  return rep;
}

}  // namespace ibl

#endif
