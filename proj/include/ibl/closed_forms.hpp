#ifndef IBL_CLOSED_FORMS_HPP
#define IBL_CLOSED_FORMS_HPP

#include <array>
#include <cmath>

#include "ibl/datum.hpp"

namespace ibl {

/// A_c = (|1-c|^{1-c} / |c|^c)^{1/2} with the convention 0^0 = 1.
inline double young_factor(double c) {
  auto pw = [](double base, double expo) {
    if (base == 0.0 && expo == 0.0) return 1.0;
    return std::pow(std::abs(base), expo);
  };
  return std::sqrt(pw(1.0 - c, 1.0 - c) / pw(c, c));
}

/// Sharp constant of the forward/inverse convolution inequality on the line,
/// A_{c0} A_{c1} A_{c2}, for exponents summing to 2.
inline double young_constant(double c0, double c1, double c2) {
  if (std::abs(c0 + c1 + c2 - 2.0) > 1e-12)
    throw std::invalid_argument("young_constant: exponents must sum to 2");
  std::array<double, 3> c{c0, c1, c2};
  bool forward = true, inverse = false;
  for (double x : c) forward = forward && x > 0.0 && x <= 1.0;
  for (int j = 0; j < 3; ++j) {
    bool ok = c[j] < 0.0;
    for (int k = 0; k < 3; ++k)
      if (k != j) ok = ok && c[k] >= 1.0;
    inverse = inverse || ok;
  }
  if (!forward && !inverse)
    throw std::invalid_argument("young_constant: exponent pattern outside both regimes");
  return young_factor(c0) * young_factor(c1) * young_factor(c2);
}

/// The three maps of the convolution datum on R^2: x, y, x - y.
inline std::array<Matrix, 3> young_maps() {
  Matrix b0(1, 2), b1(1, 2), b2(1, 2);
  b0 << 1.0, 0.0;
  b1 << 0.0, 1.0;
  b2 << 1.0, -1.0;
  return {b0, b1, b2};
}

struct YoungSpec {
  double c0 = 0.0, c1 = 0.0, c2 = 0.0;
  double sigma0 = 0.0, sigma1 = 0.0, sigma2 = 0.0;
};

/// sigma0/(1-c0) = sigma1/c1 + sigma2/c2, the admissibility constraint.
inline bool young_spec_admissible(const YoungSpec& s) {
  double lhs = s.sigma0 / (1.0 - s.c0);
  double rhs = s.sigma1 / s.c1 + s.sigma2 / s.c2;
  return std::abs(lhs - rhs) <= 1e-12 * (std::abs(lhs) + std::abs(rhs));
}

/// Gamma_j(a) = a_j^{-1} - sum_{k != j} c_k a_k / (c0 c1 a0 a1 + c0 c2 a0 a2 + c1 c2 a1 a2).
inline std::array<double, 3> young_gammas(const YoungSpec& s) {
  std::array<double, 3> c{s.c0, s.c1, s.c2};
  std::array<double, 3> a{1.0 / s.sigma0, 1.0 / s.sigma1, 1.0 / s.sigma2};
  double den = c[0] * c[1] * a[0] * a[1] + c[0] * c[2] * a[0] * a[2] + c[1] * c[2] * a[1] * a[2];
  std::array<double, 3> g{};
  for (int j = 0; j < 3; ++j) {
    double num = 0.0;
    for (int k = 0; k < 3; ++k)
      if (k != j) num += c[k] * a[k];
    g[j] = 1.0 / a[j] - num / den;
  }
  return g;
}

enum class YoungRegime { forward, inverse };

struct YoungResult {
  double constant = 0.0;
  bool condition_holds = false;
  std::array<double, 3> gammas{};
};

/// Boundary value of the regularized convolution constant together with the
/// attainment condition; the boundary value is the true constant iff the
/// condition holds.
inline YoungResult young_regularized(const YoungSpec& s, YoungRegime regime) {
  if (!young_spec_admissible(s))
    throw std::invalid_argument("young_regularized: sigma constraint violated");
  if (regime == YoungRegime::forward) {
    for (double c : {s.c0, s.c1, s.c2})
      if (!(c > 0.0 && c < 1.0))
        throw std::invalid_argument("young_regularized: forward regime needs c_j in (0,1)");
  } else {
    if (!(s.c0 < 0.0 && s.c1 >= 1.0 && s.c2 >= 1.0))
      throw std::invalid_argument("young_regularized: inverse regime needs c0 < 0 <= 1 <= c1, c2");
  }
  auto atil = [](double c, double sig) { return std::sqrt(std::pow(sig, 1.0 - c) / c); };
  YoungResult out;
  out.constant = atil(s.c1, s.sigma1) * atil(s.c2, s.sigma2) / atil(1.0 - s.c0, s.sigma0);
  double q0 = s.c0 * (1.0 - s.c0) / s.sigma0;
  double q1 = s.c1 * (1.0 - s.c1) / s.sigma1;
  double q2 = s.c2 * (1.0 - s.c2) / s.sigma2;
  if (regime == YoungRegime::forward)
    out.condition_holds = q0 >= std::max(q1, q2) - 1e-14;
  else
    out.condition_holds = q0 <= std::min(q1, q2) + 1e-14;
  out.gammas = young_gammas(s);
  return out;
}

/// The convolution datum with factors ordered positives-first (inverse regime
/// reorders to (c1, c2, c0)).
inline Datum young_datum(const YoungSpec& s, YoungRegime regime) {
  auto [b0, b1, b2] = young_maps();
  auto g = [](double sig) {
    return std::optional<Matrix>(Matrix::Constant(1, 1, 1.0 / sig));
  };
  if (regime == YoungRegime::forward)
    return make_datum(2, {b0, b1, b2}, {s.c0, s.c1, s.c2}, Matrix::Zero(2, 2),
                      {g(s.sigma0), g(s.sigma1), g(s.sigma2)});
  return make_datum(2, {b1, b2, b0}, {s.c1, s.c2, s.c0}, Matrix::Zero(2, 2),
                    {g(s.sigma1), g(s.sigma2), g(s.sigma0)});
}

struct PLSpec {
  double c1 = 0.0, c2 = 0.0;
  double sigma1 = 0.0, sigma2 = 0.0;
};

/// Phi_c(a1, a2) = a1^{c1} a2^{c2} (c1/a1 + c2/a2); the regularized constant is
/// its box infimum to the power -1/2.
inline double pl_phi(const PLSpec& s, double a1, double a2) {
  return std::pow(a1, s.c1) * std::pow(a2, s.c2) * (s.c1 / a1 + s.c2 / a2);
}

struct PLResult {
  double constant = 0.0;
  bool condition_holds = false;
};

/// Regularized Prekopa-Leindler constant on the line. When
/// c1 sigma1 + c2 sigma2 <= min(sigma1, sigma2) the infimum sits at the corner
/// and the constant is (sigma1^{c1} sigma2^{c2} / (c1 sigma1 + c2 sigma2))^{1/2};
/// otherwise there is no interior stationary point and the infimum is found on
/// the two faces, whose 1-D critical points are closed-form and clipped to the box.
inline PLResult pl_regularized(const PLSpec& s) {
  if (!(s.c1 > 0.0 && s.c1 < 1.0 && s.c2 > 0.0 && s.c2 < 1.0 && s.c1 + s.c2 < 1.0))
    throw std::invalid_argument("pl_regularized: need c1, c2 in (0,1) with c1 + c2 < 1");
  if (!(s.sigma1 > 0.0 && s.sigma2 > 0.0))
    throw std::invalid_argument("pl_regularized: sigmas must be positive");
  PLResult out;
  double corner = s.c1 * s.sigma1 + s.c2 * s.sigma2;
  out.condition_holds = corner <= std::min(s.sigma1, s.sigma2) + 1e-14;
  if (out.condition_holds) {
    out.constant = std::sqrt(std::pow(s.sigma1, s.c1) * std::pow(s.sigma2, s.c2) / corner);
    return out;
  }
  double a1_star = std::min((1.0 - s.c1) / (s.c2 * s.sigma2), 1.0 / s.sigma1);
  double a2_star = std::min((1.0 - s.c2) / (s.c1 * s.sigma1), 1.0 / s.sigma2);
  double face1 = pl_phi(s, a1_star, 1.0 / s.sigma2);
  double face2 = pl_phi(s, 1.0 / s.sigma1, a2_star);
  out.constant = 1.0 / std::sqrt(std::min(face1, face2));
  return out;
}

/// 1-D two-factor datum whose gaussian supremum equals the regularized
/// Prekopa-Leindler constant: its functional satisfies BL(a1, a2)^2 = 1/Phi_c(a1, a2).
inline Datum pl_datum(const PLSpec& s) {
  double b1 = std::sqrt(s.c2 / (1.0 - s.c1));
  double b2 = std::sqrt(s.c1 / (1.0 - s.c2));
  return make_datum(1, {Matrix::Constant(1, 1, b1), Matrix::Constant(1, 1, b2)},
                    {1.0 - s.c1, 1.0 - s.c2}, Matrix::Zero(1, 1),
                    {Matrix::Constant(1, 1, 1.0 / s.sigma1),
                     Matrix::Constant(1, 1, 1.0 / s.sigma2)});
}

struct HCSpec {
  double p = 0.0, q = 0.0, s = 0.0;
};

inline HCSpec hc_spec_from_pq(double p, double q) {
  if (p == 0.0 || p == 1.0) throw std::invalid_argument("hc_spec: p must avoid 0 and 1");
  double ratio = (q - 1.0) / (p - 1.0);
  if (!(ratio > 1.0)) throw std::invalid_argument("hc_spec: (q-1)/(p-1) must exceed 1");
  return {p, q, 0.5 * std::log(ratio)};
}

inline HCSpec hc_spec_from_ps(double p, double s) {
  if (p == 0.0 || p == 1.0) throw std::invalid_argument("hc_spec: p must avoid 0 and 1");
  if (!(s > 0.0)) throw std::invalid_argument("hc_spec: s must be positive");
  return {p, 1.0 + std::exp(2.0 * s) * (p - 1.0), s};
}

struct HCResult {
  Datum datum;
  double c_ps = 0.0;
  double c1 = 0.0, c2 = 0.0;  // 1/p and 1/q'
};

/// Ornstein-Uhlenbeck hypercontractivity datum on R^2: coordinate projections,
/// exponents (1/p, 1/q'), the explicit gaussian-kernel Q, prefactor
/// C(p,s) = (2 pi)^{(1/p + 1/q')/2 - 1} (1 - e^{-2s})^{-1/2}, and regularizers
/// defaulting to the standard gaussian density precision 1/(2 pi).
inline HCResult hc_datum(const HCSpec& spec, double g_scale = 1.0 / (2.0 * M_PI)) {
  if (!(spec.s > 0.0)) throw std::invalid_argument("hc_datum: s must be positive");
  double ratio = (spec.q - 1.0) / (spec.p - 1.0);
  if (std::abs(std::exp(2.0 * spec.s) - ratio) > 1e-12 * (1.0 + std::abs(ratio)))
    throw std::invalid_argument("hc_datum: e^{2s} != (q-1)/(p-1)");
  double e2 = std::exp(-2.0 * spec.s);
  double es = std::exp(-spec.s);
  double qprime = spec.q / (spec.q - 1.0);
  HCResult out;
  out.c1 = 1.0 / spec.p;
  out.c2 = 1.0 / qprime;
  Matrix Q(2, 2);
  Q(0, 0) = 1.0 - (1.0 - e2) * out.c1;
  Q(1, 1) = 1.0 - (1.0 - e2) * out.c2;
  Q(0, 1) = Q(1, 0) = -es;
  Q *= 1.0 / (2.0 * M_PI * (1.0 - e2));
  out.c_ps = std::pow(2.0 * M_PI, 0.5 * (out.c1 + out.c2) - 1.0) / std::sqrt(1.0 - e2);

  Matrix b1(1, 2), b2(1, 2);
  b1 << 1.0, 0.0;
  b2 << 0.0, 1.0;
  std::optional<Matrix> g = Matrix::Constant(1, 1, g_scale);
  if (out.c1 >= out.c2)
    out.datum = make_datum(2, {b1, b2}, {out.c1, out.c2}, Q, {g, g});
  else
    out.datum = make_datum(2, {b2, b1}, {out.c2, out.c1}, Q, {g, g});
  return out;
}

}  // namespace ibl

#endif
