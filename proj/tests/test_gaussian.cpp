#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "ibl/closed_forms.hpp"
#include "ibl/gaussian.hpp"
#include "test_util.hpp"

using namespace ibl;

namespace {

Datum geometric_2d(bool with_g = false) {
  Matrix b1(1, 2), b2(1, 2);
  b1 << 1, 0;
  b2 << 0, 1;
  std::vector<std::optional<Matrix>> regs;
  if (with_g) regs = {Matrix::Identity(1, 1), Matrix::Identity(1, 1)};
  return make_datum(2, {b1, b2}, {1.0, 1.0}, Matrix::Zero(2, 2), regs);
}

GaussianTuple identity_tuple(const Datum& d) {
  GaussianTuple a;
  for (int j = 0; j < d.m(); ++j) a.push_back(Matrix::Identity(d.nj(j), d.nj(j)));
  return a;
}

}  // namespace

TEST_CASE("m_matrix: geometric datum at the identity gives the identity") {
  Datum d = geometric_2d();
  CHECK((m_matrix(d, identity_tuple(d), true) - Matrix::Identity(2, 2)).norm() < 1e-14);
}

TEST_CASE("m_matrix: single identity factor returns A") {
  std::mt19937_64 rng(3);
  Matrix a = testing::random_spd(rng, 3);
  Datum d = make_datum(3, {Matrix::Identity(3, 3)}, {1.0});
  CHECK((m_matrix(d, {a}, false) - a).norm() < 1e-14);
}

TEST_CASE("m_matrix matches per-entry summation on random data") {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 25; ++trial) {
    Datum d = testing::random_bijective_datum(rng, 3, 2);
    GaussianTuple a = testing::feasible_tuple(rng, d);
    Matrix m = m_matrix(d, a, false);
    Matrix oracle = Matrix::Zero(3, 3);
    for (int j = 0; j < d.m(); ++j)
      for (int p = 0; p < 3; ++p)
        for (int q = 0; q < 3; ++q)
          for (int r = 0; r < d.nj(j); ++r)
            for (int s = 0; s < d.nj(j); ++s)
              oracle(p, q) += d.exponents[j] * d.maps[j](r, p) * a[j](r, s) * d.maps[j](s, q);
    CHECK((m - oracle).norm() < 1e-12 * (1.0 + oracle.norm()));
  }
}

TEST_CASE("m_matrix is linear in each block") {
  std::mt19937_64 rng(6);
  Datum d = testing::random_bijective_datum(rng, 3, 1);
  GaussianTuple a = testing::feasible_tuple(rng, d);
  GaussianTuple b = a;
  Matrix delta = testing::random_spd(rng, d.nj(0));
  b[0] += 2.0 * delta;
  Matrix lhs = m_matrix(d, b, false) - m_matrix(d, a, false);
  Datum single = make_datum(d.n, {d.maps[0]}, {d.exponents[0]});
  Matrix rhs = 2.0 * m_matrix(single, {delta}, false);
  CHECK((lhs - rhs).norm() < 1e-12 * (1.0 + rhs.norm()));
}

TEST_CASE("bl_gaussian: single identity factor cancels to 1") {
  std::mt19937_64 rng(8);
  Datum d = make_datum(2, {Matrix::Identity(2, 2)}, {1.0});
  BlValue v = bl_gaussian(d, {testing::random_spd(rng, 2)});
  CHECK(v.finite);
  CHECK(v.value == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("bl_gaussian: geometric datum at the identity equals 1") {
  Datum d = geometric_2d();
  BlValue v = bl_gaussian(d, identity_tuple(d));
  CHECK(v.finite);
  CHECK(v.value == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("bl_gaussian matches the hand 2x2 determinant on the convolution datum") {
  auto [b0, b1, b2] = young_maps();
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(0.2, 3.0);
  for (int trial = 0; trial < 50; ++trial) {
    double a0 = u(rng), a1 = u(rng), a2 = u(rng);
    double c0 = 1.4, c1 = 1.1, c2 = -0.5;
    Datum d = make_datum(2, {b0, b1, b2}, {c0, c1, c2});
    GaussianTuple a{Matrix::Constant(1, 1, a0), Matrix::Constant(1, 1, a1),
                    Matrix::Constant(1, 1, a2)};
    // M = [[c0 a0 + c2 a2, -c2 a2], [-c2 a2, c1 a1 + c2 a2]]
    double det = (c0 * a0 + c2 * a2) * (c1 * a1 + c2 * a2) - c2 * c2 * a2 * a2;
    BlValue v = bl_gaussian(d, a);
    if (det <= 0 || c0 * a0 + c2 * a2 <= 0) {
      CHECK_FALSE(v.finite);
    } else {
      double oracle =
          std::sqrt(std::pow(a0, c0) * std::pow(a1, c1) * std::pow(a2, c2) / det);
      REQUIRE(v.finite);
      CHECK(v.value == doctest::Approx(oracle).epsilon(1e-12));
    }
  }
}

TEST_CASE("bl_gaussian returns the infinite sentinel outside the feasible cone") {
  auto [b0, b1, b2] = young_maps();
  Datum d = make_datum(2, {b0, b1, b2}, {1.0, 1.0, -5.0});
  GaussianTuple a{Matrix::Identity(1, 1), Matrix::Identity(1, 1), Matrix::Identity(1, 1)};
  BlValue v = bl_gaussian(d, a);
  CHECK_FALSE(v.finite);
  CHECK(std::isinf(v.value));
}

TEST_CASE("bl_gaussian scaling invariance when Q = 0 and sum c_j n_j = n") {
  std::mt19937_64 rng(13);
  for (int trial = 0; trial < 30; ++trial) {
    Datum d = testing::random_bijective_datum(rng, 3, 1);
    // rescale the negative exponent so that sum c_j n_j = n
    double s = 0.0;
    for (int j = 0; j < d.m_plus; ++j) s += d.exponents[j] * d.nj(j);
    int nneg = d.nj(d.m_plus);
    d.exponents[d.m_plus] = (3.0 - s) / nneg;
    if (d.exponents[d.m_plus] >= 0.0) continue;
    GaussianTuple a = testing::feasible_tuple(rng, d);
    BlValue v1 = bl_gaussian(d, a);
    GaussianTuple b = a;
    for (auto& m : b) m *= 1.7;
    BlValue v2 = bl_gaussian(d, b);
    REQUIRE(v1.finite);
    REQUIRE(v2.finite);
    CHECK(v1.log_value == doctest::Approx(v2.log_value).epsilon(1e-10));
  }
}

TEST_CASE("phi is identically zero for a single identity factor") {
  std::mt19937_64 rng(17);
  Datum d = make_datum(2, {Matrix::Identity(2, 2)}, {1.0});
  PhiResult p = phi_and_gradient(d, {testing::random_spd(rng, 2)});
  CHECK(std::abs(p.value) < 1e-12);
  CHECK(p.gradient[0].norm() < 1e-12);
}

TEST_CASE("phi gradient vanishes at the geometric extremizer") {
  Datum d = geometric_2d();
  PhiResult p = phi_and_gradient(d, identity_tuple(d));
  for (const auto& g : p.gradient) CHECK(g.norm() < 1e-13);
}

TEST_CASE("phi gradient matches central finite differences") {
  std::mt19937_64 rng(19);
  int done = 0;
  while (done < 100) {
    std::uniform_int_distribution<int> un(2, 4);
    Datum d = testing::random_bijective_datum(rng, un(rng), 1);
    for (auto& b : d.maps) b *= 0.6 / std::sqrt(static_cast<double>(d.n));
    GaussianTuple a;
    try {
      a = testing::feasible_tuple(rng, d);
    } catch (const std::exception&) {
      continue;
    }
    Matrix mt = m_matrix(d, a, true);
    if (min_eig(mt) < 0.02 * max_eig(mt)) continue;  // keep finite differences accurate
    bool tame = true;
    for (const auto& aj : a) tame = tame && min_eig(aj) > 0.05;
    if (!tame) continue;
    PhiResult p = phi_and_gradient(d, a);
    std::vector<Matrix> dirs;
    double dirderiv = 0.0;
    for (int j = 0; j < d.m(); ++j) {
      Matrix dj = symmetrize(testing::random_matrix(rng, d.nj(j), d.nj(j)));
      dj /= dj.norm();
      dirderiv += (p.gradient[j].transpose() * dj).trace();
      dirs.push_back(std::move(dj));
    }
    const double h = 1e-5;
    GaussianTuple ap = a, am = a;
    for (int j = 0; j < d.m(); ++j) {
      ap[j] += h * dirs[j];
      am[j] -= h * dirs[j];
    }
    if (!is_spd(m_matrix(d, ap, true)) || !is_spd(m_matrix(d, am, true))) continue;
    bool ok = true;
    for (int j = 0; j < d.m(); ++j) ok = ok && is_spd(ap[j]) && is_spd(am[j]);
    if (!ok) continue;
    ++done;
    double fd = (phi_and_gradient(d, ap).value - phi_and_gradient(d, am).value) / (2.0 * h);
    CHECK(std::abs(dirderiv - fd) <= 1e-6 * std::max(1.0, std::abs(fd)));
  }
}

TEST_CASE("key2: geometric datum with identity tuple has zero defect") {
  Datum d = geometric_2d();
  std::mt19937_64 rng(23);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<Vector> v{testing::random_vector(rng, 1), testing::random_vector(rng, 1)};
    Key2Result r = key2_evaluate(d, identity_tuple(d), v);
    CHECK(std::abs(r.lhs) < 1e-12);
    CHECK(std::abs(r.rhs_identity) < 1e-12);
  }
}

TEST_CASE("key2 identity and nonnegativity on random mixed-sign data") {
  std::mt19937_64 rng(29);
  int done = 0;
  while (done < 1000) {
    std::uniform_int_distribution<int> un(1, 4);
    std::uniform_int_distribution<int> uneg(1, 2);
    Datum d = testing::random_bijective_datum(rng, un(rng), uneg(rng));
    GaussianTuple a;
    try {
      a = testing::feasible_tuple(rng, d);
    } catch (const std::exception&) {
      continue;
    }
    if (!is_spd(m_matrix(d, a, false))) continue;
    ++done;
    std::vector<Vector> v;
    for (int j = 0; j < d.m(); ++j) v.push_back(testing::random_vector(rng, d.nj(j)));
    Key2Result r = key2_evaluate(d, a, v);
    double scale = 1.0 + std::abs(r.lhs) + std::abs(r.rhs_identity);
    CHECK(std::abs(r.gap) <= 1e-10 * scale);
    CHECK(r.lhs >= -1e-10 * scale);
  }
}

TEST_CASE("key2 rejects a non-square positive block") {
  Matrix b1(1, 2);
  b1 << 1, 0;
  Datum d = make_datum(2, {b1}, {1.0});
  GaussianTuple a{Matrix::Identity(1, 1)};
  CHECK_THROWS_AS(key2_evaluate(d, a, {Vector::Ones(1)}), std::invalid_argument);
}

TEST_CASE("extremizer_report: geometric datum with G = A = id passes exactly") {
  Datum d = geometric_2d(true);
  ExtremizerReport rep = extremizer_report(d, identity_tuple(d));
  CHECK(rep.pass());
  for (double x : rep.cond1_max_eig) CHECK(std::abs(x) < 1e-13);
}

TEST_CASE("extremizer_report condition-1 brackets equal the closed-form gammas at A = G") {
  // inverse convolution datum at the boundary tuple: the first-order brackets
  // reduce to the rational functions Gamma_j of the regularizer entries
  YoungSpec spec{-1.0, 1.5, 1.5, 4.0, 1.5, 1.5};
  SUBCASE("equality spec") {}
  SUBCASE("strict spec") { spec = YoungSpec{-2.0, 1.5, 1.2, 5.5, 1.5, 1.0}; }
  Datum d = young_datum(spec, YoungRegime::inverse);
  GaussianTuple g;
  for (int j = 0; j < d.m(); ++j) g.push_back(*d.regularizers[j]);
  ExtremizerReport rep = extremizer_report(d, g);
  std::array<double, 3> gam = young_gammas(spec);
  // datum order is (c1, c2, c0): brackets divided by c_j recover gamma_{1,2,0}
  std::array<int, 3> spec_of_datum{1, 2, 0};
  for (int j = 0; j < 3; ++j) {
    double cj = d.exponents[j];
    double bracket = rep.cond1_max_eig[j] / cj;  // 1x1 blocks
    CHECK(bracket == doctest::Approx(gam[spec_of_datum[j]]).epsilon(1e-9));
  }
}

TEST_CASE("extremizer_report requires finite regularizers") {
  Datum d = geometric_2d(false);
  CHECK_THROWS_AS(extremizer_report(d, identity_tuple(d)), std::invalid_argument);
}
