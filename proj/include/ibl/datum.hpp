#ifndef IBL_DATUM_HPP
#define IBL_DATUM_HPP

#include <optional>
#include <string>
#include <tuple>
#include <vector>

#include "ibl/linalg.hpp"

namespace ibl {

/// A generalized Brascamp-Lieb datum: maps B_j : R^n -> R^{n_j}, exponents c_j
/// ordered positives-first, a symmetric quadratic form Q on R^n, and optional
/// per-factor regularizers G_j (absent entry = unregularized factor).
struct Datum {
  int n = 0;
  std::vector<Matrix> maps;
  std::vector<double> exponents;
  int m_plus = 0;
  Matrix Q;
  std::vector<std::optional<Matrix>> regularizers;

  int m() const { return static_cast<int>(maps.size()); }
  int nj(int j) const { return static_cast<int>(maps[j].rows()); }

  bool all_regularized() const {
    if (static_cast<int>(regularizers.size()) != m()) return false;
    for (const auto& g : regularizers)
      if (!g.has_value()) return false;
    return true;
  }

  /// The stacked map B_+ of the positive-exponent factors (0 x n if m_plus == 0).
  Matrix b_plus() const {
    int rows = 0;
    for (int j = 0; j < m_plus; ++j) rows += nj(j);
    Matrix bp(rows, n);
    int r = 0;
    for (int j = 0; j < m_plus; ++j) {
      bp.middleRows(r, nj(j)) = maps[j];
      r += nj(j);
    }
    return bp;
  }

  int sum_nj_plus() const {
    int s = 0;
    for (int j = 0; j < m_plus; ++j) s += nj(j);
    return s;
  }
};

inline Datum make_datum(int n, std::vector<Matrix> maps, std::vector<double> exponents,
                        Matrix Q = Matrix(),
                        std::vector<std::optional<Matrix>> regularizers = {}) {
  Datum d;
  d.n = n;
  d.maps = std::move(maps);
  d.exponents = std::move(exponents);
  d.m_plus = 0;
  for (double c : d.exponents)
    if (c > 0.0) ++d.m_plus;
  d.Q = Q.size() ? symmetrize(Q) : Matrix::Zero(n, n);
  if (regularizers.empty()) regularizers.assign(d.maps.size(), std::nullopt);
  d.regularizers = std::move(regularizers);
  return d;
}

struct CheckResult {
  std::string name;
  bool pass = false;
  double residual = 0.0;  // signed margin; meaning depends on the check
};

struct ValidationReport {
  std::vector<CheckResult> checks;
  bool verdict = true;

  void add(std::string name, bool pass, double residual) {
    checks.push_back({std::move(name), pass, residual});
    verdict = verdict && pass;
  }
  const CheckResult* find(const std::string& name) const {
    for (const auto& c : checks)
      if (c.name == name) return &c;
    return nullptr;
  }
};

/// Structural and spectral validation; reports every violation instead of throwing.
inline ValidationReport validate_datum(const Datum& d) {
  ValidationReport rep;
  bool shapes = d.n > 0 && !d.maps.empty() &&
                d.maps.size() == d.exponents.size() &&
                d.regularizers.size() == d.maps.size() &&
                d.Q.rows() == d.n && d.Q.cols() == d.n;
  for (const auto& b : d.maps)
    shapes = shapes && b.cols() == d.n && b.rows() >= 1 && b.rows() <= d.n;
  if (shapes)
    for (int j = 0; j < d.m(); ++j)
      if (d.regularizers[j])
        shapes = shapes && d.regularizers[j]->rows() == d.nj(j) &&
                 d.regularizers[j]->cols() == d.nj(j);
  rep.add("shapes", shapes, 0.0);
  if (!shapes) return rep;

  double worst_rank = 1.0;
  bool rank_ok = true;
  for (int j = 0; j < d.m(); ++j) {
    auto [smin, smax] = singular_value_range(d.maps[j]);
    double margin = smax > 0 ? smin / smax : 0.0;
    worst_rank = std::min(worst_rank, margin);
    rank_ok = rank_ok && margin > 1e-10;
  }
  rep.add("row_rank", rank_ok, worst_rank);

  bool nonzero = true, ordered = true;
  for (int j = 0; j < d.m(); ++j) {
    nonzero = nonzero && d.exponents[j] != 0.0;
    if (j < d.m_plus)
      ordered = ordered && d.exponents[j] > 0.0;
    else
      ordered = ordered && d.exponents[j] < 0.0;
  }
  int npos = 0;
  for (double c : d.exponents)
    if (c > 0.0) ++npos;
  ordered = ordered && npos == d.m_plus;
  rep.add("exponents_nonzero", nonzero, 0.0);
  rep.add("exponents_ordered", ordered, 0.0);

  double qdef = sym_defect(d.Q);
  rep.add("Q_symmetric", qdef <= 1e-12, qdef);

  bool greg = true;
  double gmin = std::numeric_limits<double>::infinity();
  for (int j = 0; j < d.m(); ++j) {
    if (!d.regularizers[j]) continue;
    const Matrix& g = *d.regularizers[j];
    double defect = sym_defect(g);
    double lo = min_eig(g);
    gmin = std::min(gmin, lo);
    greg = greg && defect <= 1e-12 && lo > 0.0;
  }
  rep.add("regularizers_spd", greg, std::isfinite(gmin) ? gmin : 0.0);
  return rep;
}

/// Eigenvalue counts (above, below, inside) a zero band of half-width tol*||Qm||.
inline std::tuple<int, int, int> signature(const Matrix& qm, double tol = 1e-10) {
  if (sym_defect(qm) > 1e-8)
    throw std::invalid_argument("signature: matrix is not symmetric");
  if (qm.rows() == 0) return {0, 0, 0};
  Vector w = sym_eigenvalues(qm);
  double band = tol * std::max(std::abs(w.minCoeff()), std::abs(w.maxCoeff()));
  int np = 0, nm = 0, nz = 0;
  for (int i = 0; i < w.size(); ++i) {
    if (w[i] > band)
      ++np;
    else if (w[i] < -band)
      ++nm;
    else
      ++nz;
  }
  return {np, nm, nz};
}

/// Non-degeneracy checks:
///  (i)  Q restricted to ker B_+ is positive definite,
///  (ii) n >= s+(Q) + sum of positive-factor dimensions,
///  (iii) Q + sum_{j<=m_+} c_j B_j^T G_j B_j is positive definite (all G present).
inline ValidationReport check_nondegenerate(const Datum& d) {
  ValidationReport rep;
  Matrix bp = d.b_plus();
  Matrix kernel = null_space(bp, d.n);
  if (kernel.cols() == 0) {
    rep.add("Q_positive_on_kernel", true, 0.0);
  } else {
    double lo = min_eig(kernel.transpose() * d.Q * kernel);
    rep.add("Q_positive_on_kernel", lo > 0.0, lo);
  }
  auto [np, nm, nz] = signature(d.Q);
  (void)nm;
  (void)nz;
  int slack = d.n - np - d.sum_nj_plus();
  rep.add("dimension_count", slack >= 0, static_cast<double>(slack));
  if (d.all_regularized()) {
    Matrix m = d.Q;
    for (int j = 0; j < d.m_plus; ++j)
      m += d.exponents[j] * d.maps[j].transpose() * (*d.regularizers[j]) * d.maps[j];
    double lo = min_eig(m);
    rep.add("regularized_positivity", lo > 0.0, lo);
  }
  return rep;
}

/// Q = B0^T Qplus B0 - Bm1^T Qminus Bm1 with (B0, B_+) bijective and
/// ker B_+ contained in ker Bm1. Either block may be empty.
struct QDecomposition {
  Matrix B0;      // n_0 x n
  Matrix Qplus;   // n_0 x n_0, SPD
  Matrix Bm1;     // n_{m+1} x n
  Matrix Qminus;  // n_{m+1} x n_{m+1}, SPD

  Matrix reconstruct(int n) const {
    Matrix q = Matrix::Zero(n, n);
    if (B0.rows()) q += B0.transpose() * Qplus * B0;
    if (Bm1.rows()) q -= Bm1.transpose() * Qminus * Bm1;
    return q;
  }
};

/// Splits Q into a positive part carried by ker B_+ and a negative part vanishing
/// on it. Construction: P = orthonormal basis of K = ker B_+; the oblique
/// projection onto K along W = ker(P^T Q) is pi = P (P^T Q P)^{-1} P^T Q;
/// then B0 = P^T pi, Qplus = P^T Q P, and the remainder pi^T Q pi - Q is PSD
/// under non-degeneracy and is rank-factorized into the negative block.
inline QDecomposition decompose_Q(const Datum& d) {
  ValidationReport nd = check_nondegenerate(d);
  const CheckResult* c1 = nd.find("Q_positive_on_kernel");
  const CheckResult* c2 = nd.find("dimension_count");
  if (!c1->pass || !c2->pass)
    throw std::invalid_argument("decompose_Q: datum is degenerate");

  QDecomposition out;
  Matrix bp = d.b_plus();
  Matrix P = null_space(bp, d.n);
  int k = static_cast<int>(P.cols());

  Matrix R;  // pi^T Q pi - Q, PSD
  if (k == 0) {
    out.B0 = Matrix(0, d.n);
    out.Qplus = Matrix(0, 0);
    R = -d.Q;
  } else {
    Matrix qpp = symmetrize(P.transpose() * d.Q * P);
    out.Qplus = qpp;
    out.B0 = spd_inverse(qpp) * P.transpose() * d.Q;  // = P^T pi
    Matrix pitqpi = d.Q * P * spd_inverse(qpp) * P.transpose() * d.Q;
    R = symmetrize(pitqpi - d.Q);
  }

  Eigen::SelfAdjointEigenSolver<Matrix> es(symmetrize(R));
  const Vector& w = es.eigenvalues();
  // band relative to the scale of Q itself: when the negative part is absent,
  // R is pure roundoff and must not produce a spurious block
  double band = 1e-10 * std::max(1e-300, std::max(w.cwiseAbs().maxCoeff(), d.Q.norm()));
  std::vector<int> keep;
  for (int i = 0; i < w.size(); ++i) {
    if (w[i] > band) keep.push_back(i);
  }
  int r = static_cast<int>(keep.size());
  out.Bm1 = Matrix(r, d.n);
  out.Qminus = Matrix::Zero(r, r);
  for (int i = 0; i < r; ++i) {
    out.Bm1.row(i) = es.eigenvectors().col(keep[i]).transpose();
    out.Qminus(i, i) = w[keep[i]];
  }
  return out;
}

}  // namespace ibl

#endif
