#ifndef IBL_TEST_UTIL_HPP
#define IBL_TEST_UTIL_HPP

#include <random>

#include "ibl/datum.hpp"
#include "ibl/gaussian.hpp"

namespace ibl::testing {

inline Matrix random_matrix(std::mt19937_64& rng, int rows, int cols, double scale = 1.0) {
  std::normal_distribution<double> g(0.0, scale);
  Matrix m(rows, cols);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) m(i, j) = g(rng);
  return m;
}

inline Matrix random_spd(std::mt19937_64& rng, int d, double ridge = 0.3) {
  Matrix m = random_matrix(rng, d, d);
  return symmetrize(m * m.transpose() + ridge * Matrix::Identity(d, d));
}

inline Vector random_vector(std::mt19937_64& rng, int d, double scale = 1.0) {
  std::normal_distribution<double> g(0.0, scale);
  Vector v(d);
  for (int i = 0; i < d; ++i) v[i] = g(rng);
  return v;
}

/// Random partition of n into parts of size <= max_part.
inline std::vector<int> random_partition(std::mt19937_64& rng, int n, int max_part) {
  std::vector<int> parts;
  int left = n;
  while (left > 0) {
    std::uniform_int_distribution<int> u(1, std::min(left, max_part));
    int p = u(rng);
    parts.push_back(p);
    left -= p;
  }
  return parts;
}

/// Mixed-sign datum with B_+ a bijection of R^n (Q = 0), plus random negative
/// factors; exponents positives-first.
inline Datum random_bijective_datum(std::mt19937_64& rng, int n, int n_negative) {
  std::uniform_real_distribution<double> upos(0.4, 2.0);
  std::vector<Matrix> maps;
  std::vector<double> exps;
  Matrix t = random_matrix(rng, n, n);
  while (std::abs(Eigen::FullPivLU<Matrix>(t).determinant()) < 0.1)
    t = random_matrix(rng, n, n);
  int row = 0;
  for (int p : random_partition(rng, n, 2)) {
    maps.push_back(t.middleRows(row, p));
    exps.push_back(upos(rng));
    row += p;
  }
  std::uniform_int_distribution<int> udim(1, std::min(2, n));
  for (int j = 0; j < n_negative; ++j) {
    // small negative maps keep O(1) tuples inside the feasible cone
    maps.push_back(0.35 * random_matrix(rng, udim(rng), n));
    exps.push_back(-upos(rng));
  }
  return make_datum(n, std::move(maps), std::move(exps));
}

/// A gaussian tuple making M(A) (and Mtilde) positive definite: positives get
/// random SPD blocks, negatives are scaled down until positivity holds.
inline GaussianTuple feasible_tuple(std::mt19937_64& rng, const Datum& d) {
  GaussianTuple a;
  for (int j = 0; j < d.m(); ++j) a.push_back(random_spd(rng, d.nj(j)));
  GaussianTuple first_feasible;
  for (int tries = 0; tries < 100; ++tries) {
    Matrix mt = m_matrix(d, a, true);
    // prefer points well inside the feasible cone, not just barely inside
    if (min_eig(mt) > 0.05 * max_eig(mt)) return a;
    if (first_feasible.empty() && is_spd(mt)) first_feasible = a;
    for (int j = d.m_plus; j < d.m(); ++j) a[j] *= 0.5;
  }
  if (!first_feasible.empty()) return first_feasible;
  throw std::runtime_error("feasible_tuple: could not reach the feasible cone");
}

/// Non-degenerate datum with a nonzero Q built as a kernel-supported positive
/// part minus a negative part vanishing on ker B_+ (so conditions (i)-(ii) hold
/// by construction, generically).
inline Datum random_nondegenerate_datum(std::mt19937_64& rng, int n) {
  std::uniform_real_distribution<double> upos(0.4, 2.0);
  std::uniform_int_distribution<int> usum(1, n);
  int sum_plus = usum(rng);
  std::vector<Matrix> maps;
  std::vector<double> exps;
  Matrix t = random_matrix(rng, sum_plus, n);
  while (row_rank(t) < sum_plus) t = random_matrix(rng, sum_plus, n);
  int row = 0;
  for (int p : random_partition(rng, sum_plus, 2)) {
    maps.push_back(t.middleRows(row, p));
    exps.push_back(upos(rng));
    row += p;
  }
  int m_plus = static_cast<int>(maps.size());
  std::uniform_int_distribution<int> uneg(1, 2);
  int n_negative = uneg(rng);
  std::uniform_int_distribution<int> udim(1, std::min(2, n));
  for (int j = 0; j < n_negative; ++j) {
    maps.push_back(random_matrix(rng, udim(rng), n));
    exps.push_back(-upos(rng));
  }

  int k = n - sum_plus;  // dim ker B_+
  Matrix q = Matrix::Zero(n, n);
  if (k > 0) {
    Matrix b0 = random_matrix(rng, k, n);
    q += b0.transpose() * random_spd(rng, k) * b0;
  }
  std::uniform_int_distribution<int> urank(0, n - 1);
  int rneg = urank(rng);
  if (rneg > 0) {
    Matrix c = random_matrix(rng, rneg, sum_plus);
    Matrix bneg = c * t;  // rows in the row space of B_+, so ker B_+ is annihilated
    q -= bneg.transpose() * random_spd(rng, rneg) * bneg;
  }
  (void)m_plus;
  return make_datum(n, std::move(maps), std::move(exps), q);
}

}  // namespace ibl::testing

#endif
