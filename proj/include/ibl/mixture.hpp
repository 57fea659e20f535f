#ifndef IBL_MIXTURE_HPP
#define IBL_MIXTURE_HPP

#include <random>
#include <vector>

#include "ibl/linalg.hpp"

namespace ibl {

/// f(x) = sum_k w_k g_P(x - y_k) with g_P the normalized gaussian of precision P.
/// Exact representation of a heat-regularized atomic measure; closed under the
/// anisotropic heat flow (only the precision changes).
struct GaussianMixture {
  Matrix precision;
  struct Atom {
    double weight = 0.0;
    Vector center;
  };
  std::vector<Atom> atoms;

  int dim() const { return static_cast<int>(precision.rows()); }
  double mass() const {
    double s = 0.0;
    for (const auto& a : atoms) s += a.weight;
    return s;
  }
  bool valid() const {
    if (atoms.empty() || !is_spd(precision) || sym_defect(precision) > 1e-12) return false;
    for (const auto& a : atoms)
      if (!(a.weight > 0.0) || a.center.size() != dim()) return false;
    return true;
  }
};

namespace detail {

/// Softmax responsibilities pi_k(x) plus log f(x); the building block for all
/// derivatives of log f.
struct MixtureEval {
  double log_f = 0.0;
  std::vector<double> pi;
};

inline MixtureEval mixture_eval(const GaussianMixture& f, const Vector& x) {
  const double half_logdet = 0.5 * logdet_spd(f.precision).first;
  MixtureEval out;
  out.pi.resize(f.atoms.size());
  std::vector<double> logs(f.atoms.size());
  double mx = -std::numeric_limits<double>::infinity();
  for (size_t k = 0; k < f.atoms.size(); ++k) {
    Vector diff = x - f.atoms[k].center;
    logs[k] = std::log(f.atoms[k].weight) + half_logdet -
              M_PI * diff.dot(f.precision * diff);
    mx = std::max(mx, logs[k]);
  }
  double s = 0.0;
  for (size_t k = 0; k < f.atoms.size(); ++k) s += std::exp(logs[k] - mx);
  out.log_f = mx + std::log(s);
  for (size_t k = 0; k < f.atoms.size(); ++k) out.pi[k] = std::exp(logs[k] - out.log_f);
  return out;
}

}  // namespace detail

inline double log_eval(const GaussianMixture& f, const Vector& x) {
  return detail::mixture_eval(f, x).log_f;
}

/// grad log f = -2 pi P (x - ybar(x)) with ybar the responsibility-weighted center.
inline Vector grad_log(const GaussianMixture& f, const Vector& x) {
  detail::MixtureEval ev = detail::mixture_eval(f, x);
  Vector ybar = Vector::Zero(f.dim());
  for (size_t k = 0; k < f.atoms.size(); ++k) ybar += ev.pi[k] * f.atoms[k].center;
  return -2.0 * M_PI * f.precision * (x - ybar);
}

/// D^2 log f = -2 pi P + 4 pi^2 P Cov_pi(y) P; the covariance term is PSD, which
/// is the log-convexity bound in matrix form.
inline Matrix hess_log(const GaussianMixture& f, const Vector& x) {
  detail::MixtureEval ev = detail::mixture_eval(f, x);
  Vector ybar = Vector::Zero(f.dim());
  for (size_t k = 0; k < f.atoms.size(); ++k) ybar += ev.pi[k] * f.atoms[k].center;
  Matrix cov = Matrix::Zero(f.dim(), f.dim());
  for (size_t k = 0; k < f.atoms.size(); ++k) {
    Vector c = f.atoms[k].center - ybar;
    cov += ev.pi[k] * c * c.transpose();
  }
  return -2.0 * M_PI * f.precision +
         4.0 * M_PI * M_PI * f.precision * cov * f.precision;
}

/// Time derivative of log u for the solution u(t) = g_{P(t)} * mu flowing with
/// matrix A, evaluated at the current precision P = P(t):
/// d/dt log u = -tr(A^{-1}P)/2 + pi sum_k pi_k <x - y_k, P A^{-1} P (x - y_k)>.
inline double dt_log(const GaussianMixture& f_at_t, const Matrix& flow, const Vector& x) {
  detail::MixtureEval ev = detail::mixture_eval(f_at_t, x);
  Matrix ainv = spd_inverse(flow);
  Matrix pap = f_at_t.precision * ainv * f_at_t.precision;
  double s = -0.5 * (ainv * f_at_t.precision).trace();
  for (size_t k = 0; k < f_at_t.atoms.size(); ++k) {
    Vector diff = x - f_at_t.atoms[k].center;
    s += M_PI * ev.pi[k] * diff.dot(pap * diff);
  }
  return s;
}

/// Heat evolution under d/dt u = div(A^{-1} grad u)/(4 pi): atoms are unchanged
/// and the precision becomes P(t) = (G^{-1} + (t-1) A^{-1})^{-1}.
inline GaussianMixture evolve_mixture(const GaussianMixture& f, const Matrix& flow, double t) {
  if (t < 1.0) throw std::invalid_argument("evolve_mixture: t must be >= 1");
  if (!is_spd(flow)) throw std::invalid_argument("evolve_mixture: flow matrix must be SPD");
  GaussianMixture out = f;
  out.precision = spd_inverse(spd_inverse(f.precision) + (t - 1.0) * spd_inverse(flow));
  return out;
}

struct LiYauReport {
  double min_margin = 0.0;  // min over points of lambda_min(D^2 log f + 2 pi P)
  bool pass = false;
};

/// D^2(log f) >= -2 pi P for every mixture; checked pointwise with the exact
/// Hessian. Single atoms realize equality.
inline LiYauReport li_yau_check(const GaussianMixture& f, const std::vector<Vector>& points,
                                double tol = 1e-9) {
  LiYauReport rep;
  rep.min_margin = std::numeric_limits<double>::infinity();
  for (const Vector& x : points) {
    Matrix h = hess_log(f, x) + 2.0 * M_PI * f.precision;
    rep.min_margin = std::min(rep.min_margin, min_eig(h));
  }
  rep.pass = rep.min_margin >= -tol;
  return rep;
}

/// Random test mixture: k atoms, weights in [0.1, 1], centers uniform in
/// [-box, box]^d. Deterministic given the generator state.
inline GaussianMixture sample_typeG(const Matrix& precision, int k, double box,
                                    std::mt19937_64& rng) {
  if (k < 1) throw std::invalid_argument("sample_typeG: need at least one atom");
  std::uniform_real_distribution<double> uw(0.1, 1.0);
  std::uniform_real_distribution<double> uc(-box, box);
  GaussianMixture f;
  f.precision = precision;
  int d = static_cast<int>(precision.rows());
  for (int i = 0; i < k; ++i) {
    GaussianMixture::Atom a;
    a.weight = uw(rng);
    a.center = Vector(d);
    for (int j = 0; j < d; ++j) a.center[j] = uc(rng);
    f.atoms.push_back(std::move(a));
  }
  return f;
}

}  // namespace ibl

#endif
