#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "ibl/closed_forms.hpp"
#include "ibl/optimize.hpp"
#include "test_util.hpp"

using namespace ibl;

namespace {

Datum geometric_2d() {
  Matrix b1(1, 2), b2(1, 2);
  b1 << 1, 0;
  b2 << 0, 1;
  return make_datum(2, {b1, b2}, {1.0, 1.0}, Matrix::Zero(2, 2),
                    {Matrix::Identity(1, 1), Matrix::Identity(1, 1)});
}

}  // namespace

TEST_CASE("optimize_gaussian: geometric datum attains 1 at the identity") {
  OptConfig cfg;
  OptResult r = optimize_gaussian(geometric_2d(), cfg);
  CHECK(r.converged);
  CHECK(r.value.value == doctest::Approx(1.0).epsilon(1e-8));
  for (int j = 0; j < 2; ++j)
    CHECK((r.argopt[j] - Matrix::Identity(1, 1)).norm() < 1e-6);
  CHECK(r.report.pass());
}

TEST_CASE("optimize_gaussian: inverse convolution equality spec matches the closed form") {
  YoungSpec spec{-1.0, 1.5, 1.5, 4.0, 1.5, 1.5};
  YoungResult y = young_regularized(spec, YoungRegime::inverse);
  REQUIRE(y.condition_holds);
  OptConfig cfg;
  OptResult r = optimize_gaussian(young_datum(spec, YoungRegime::inverse), cfg);
  CHECK(r.value.value == doctest::Approx(y.constant).epsilon(1e-7));
}

TEST_CASE("optimize_gaussian supremum on the transformed PL datum matches the oracle") {
  PLSpec spec{0.5, 0.4, 1.0, 3.0};
  Datum d = pl_datum(spec);
  OptConfig cfg;
  cfg.direction = Direction::supremum;
  OptResult r = optimize_gaussian(d, cfg);
  PLResult pl = pl_regularized(spec);
  CHECK_FALSE(pl.condition_holds);
  CHECK(r.value.value == doctest::Approx(pl.constant).epsilon(1e-7));

  GridSpec grid;
  grid.points_per_axis = 400;
  grid.lo_factor = 1e-4;
  OracleResult oracle = brute_force_oracle(d, grid);
  CHECK(r.value.value >= oracle.max_value - 1e-12);
  CHECK(r.value.value == doctest::Approx(oracle.max_value).epsilon(1e-4));
}

TEST_CASE("optimizer value is a lower bound over random feasible tuples") {
  YoungSpec spec{-1.0, 1.5, 1.5, 4.0, 1.5, 1.5};
  Datum d = young_datum(spec, YoungRegime::inverse);
  OptConfig cfg;
  OptResult r = optimize_gaussian(d, cfg);
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> u(1e-3, 1.0);
  int done = 0;
  while (done < 1000) {
    GaussianTuple a;
    for (int j = 0; j < d.m(); ++j)
      a.push_back(u(rng) * *d.regularizers[j]);
    BlValue v = bl_gaussian(d, a);
    if (!v.finite) continue;
    ++done;
    CHECK(r.value.value <= v.value * (1.0 + 1e-9));
  }
}

TEST_CASE("optimizer feasibility: 0 < A_j <= G_j at the reported tuple") {
  YoungSpec spec{-2.0, 1.5, 1.2, 5.5, 1.5, 1.0};
  Datum d = young_datum(spec, YoungRegime::inverse);
  OptResult r = optimize_gaussian(d, {});
  for (int j = 0; j < d.m(); ++j) {
    CHECK(min_eig(r.argopt[j]) > 0.0);
    CHECK(min_eig(*d.regularizers[j] - r.argopt[j]) >= -1e-10);
  }
}

TEST_CASE("infimum value is monotone in the regularizer box") {
  // G^1 <= G^2 implies feasible sets nest, so the infimum can only drop with G
  YoungSpec spec{-1.0, 1.5, 1.5, 4.0, 1.5, 1.5};
  Datum d1 = young_datum(spec, YoungRegime::inverse);
  Datum d2 = d1;
  for (auto& g : d2.regularizers) *g *= 1.5;
  OptResult r1 = optimize_gaussian(d1, {});
  OptResult r2 = optimize_gaussian(d2, {});
  CHECK(r1.value.value >= r2.value.value * (1.0 - 1e-8));
}

TEST_CASE("restart stability of the reported value") {
  YoungSpec spec{-1.0, 1.5, 1.5, 4.0, 1.5, 1.5};
  Datum d = young_datum(spec, YoungRegime::inverse);
  OptConfig c1, c2;
  c1.seed = 0;
  c2.seed = 12345;
  OptResult r1 = optimize_gaussian(d, c1);
  OptResult r2 = optimize_gaussian(d, c2);
  CHECK(r1.value.value == doctest::Approx(r2.value.value).epsilon(1e-6));
}

TEST_CASE("brute_force_oracle: single identity factor is 1 on every grid point") {
  Datum d = make_datum(1, {Matrix::Identity(1, 1)}, {1.0}, Matrix::Zero(1, 1),
                       {Matrix::Identity(1, 1)});
  GridSpec grid;
  grid.points_per_axis = 25;
  OracleResult r = brute_force_oracle(d, grid);
  CHECK(r.min_value == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(r.max_value == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("brute_force_oracle agrees with the optimizer on the inverse convolution datum") {
  YoungSpec spec{-1.0, 1.5, 1.5, 4.0, 1.5, 1.5};
  Datum d = young_datum(spec, YoungRegime::inverse);
  GridSpec grid;
  grid.points_per_axis = 60;
  grid.lo_factor = 1e-2;
  OracleResult oracle = brute_force_oracle(d, grid);
  OptResult r = optimize_gaussian(d, {});
  CHECK(r.value.value <= oracle.min_value + 1e-12);
  CHECK(oracle.min_value == doctest::Approx(r.value.value).epsilon(2e-2));
}

TEST_CASE("brute_force_oracle PL infimum of the reciprocal functional sits on the boundary") {
  // on the transformed datum the functional maximum corresponds to the
  // face infimum of the two-variable product function
  PLSpec spec{0.5, 0.4, 1.0, 3.0};
  Datum d = pl_datum(spec);
  GridSpec grid;
  grid.points_per_axis = 150;
  grid.lo_factor = 1e-3;
  OracleResult oracle = brute_force_oracle(d, grid);
  double a2_at_max = oracle.argmax[1](0, 0);
  CHECK(a2_at_max == doctest::Approx(1.0 / spec.sigma2).epsilon(1e-9));
}

TEST_CASE("brute_force_oracle rejects large blocks") {
  Datum d = make_datum(3, {Matrix::Identity(3, 3)}, {1.0}, Matrix::Zero(3, 3),
                       {Matrix::Identity(3, 3)});
  CHECK_THROWS_AS(brute_force_oracle(d, {}), std::invalid_argument);
}

TEST_CASE("amplify appends the identity factor and preserves non-degeneracy") {
  Datum d = geometric_2d();
  Datum ad = amplify(d, 1.0, 1.0);
  CHECK(ad.m() == 3);
  CHECK(ad.exponents.back() == doctest::Approx(-1.0));
  CHECK((ad.maps.back() - Matrix::Identity(2, 2)).norm() == 0.0);
  CHECK(validate_datum(ad).verdict);
  CHECK(check_nondegenerate(ad).verdict);

  // amplifying inequality |c_amp| > max positive - 1 holds by construction
  double maxp = 0.0;
  for (int j = 0; j < ad.m_plus; ++j) maxp = std::max(maxp, ad.exponents[j]);
  CHECK(std::abs(ad.exponents.back()) > maxp - 1.0);
}

TEST_CASE("amplify rejects an exponent that is not amplifying") {
  Datum d = geometric_2d();
  d.exponents[0] = 2.5;  // max positive now 2.5: need c_plus > 1.5
  CHECK_THROWS_AS(amplify(d, 1.2, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(amplify(d, -1.0, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(amplify(d, 1.0, 0.0), std::invalid_argument);
}

TEST_CASE("wolff_forward: single identity factor gives C(t) = 1") {
  Datum d = make_datum(1, {Matrix::Identity(1, 1)}, {1.0}, Matrix::Zero(1, 1),
                       {Matrix::Identity(1, 1)});
  for (double t : {1.0, 10.0}) {
    WolffResult w = wolff_forward(d, t);
    CHECK(w.c_t == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(w.c_t * w.c_t <= w.bound_rhs * (1.0 + 1e-9));
  }
}

TEST_CASE("wolff_forward: geometric forward datum has C(t) near 1 and obeys the bound") {
  Datum d = geometric_2d();
  for (double t : {1.0, 10.0, 100.0}) {
    WolffResult w = wolff_forward(d, t);
    CHECK(w.c_t == doctest::Approx(1.0).epsilon(1e-5));
    CHECK(w.c_t * w.c_t <= w.bound_rhs * (1.0 + 1e-9));
    CHECK(w.lambda_inf_sensitivity < 1e-5);
  }
}
