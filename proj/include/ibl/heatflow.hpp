#ifndef IBL_HEATFLOW_HPP
#define IBL_HEATFLOW_HPP

#include <sstream>

#include "ibl/gaussian.hpp"
#include "ibl/mixture.hpp"
#include "ibl/optimize.hpp"

namespace ibl {

enum class FlowDirection { inverse, forward };

/// One verification run: the datum, the certified flow matrices, the exact
/// gaussian slots for the Q weight, the type-G inputs, and integration config.
struct FlowRun {
  Datum d;
  GaussianTuple A;
  QDecomposition qd;
  std::vector<GaussianMixture> mixtures;
  std::vector<double> t_grid;
  int samples = 100000;
  std::uint64_t seed = 0;
  FlowDirection direction = FlowDirection::inverse;
  double alpha = 0.0;
};

namespace detail {

/// Augmented factor: the datum factors plus the exact gaussian slots j = 0 and
/// j = m+1 carrying the positive/negative parts of Q (exponents +1 / -1, masses
/// det(Q_+/-)^{-1/2} so that the slot equals e^{-pi <x, Q_+/- x>}).
struct FlowSlot {
  Matrix B;
  double c = 0.0;
  Matrix flow;
  GaussianMixture mix;  // state at t = 1
};

inline std::vector<FlowSlot> flow_slots(const FlowRun& run) {
  std::vector<FlowSlot> slots;
  auto gauss_slot = [&](const Matrix& b, double c, const Matrix& prec) {
    FlowSlot s;
    s.B = b;
    s.c = c;
    s.flow = prec;
    s.mix.precision = prec;
    GaussianMixture::Atom a;
    a.weight = std::exp(-0.5 * logdet_spd(prec).first);
    a.center = Vector::Zero(b.rows());
    s.mix.atoms.push_back(std::move(a));
    return s;
  };
  if (run.qd.B0.rows() > 0) slots.push_back(gauss_slot(run.qd.B0, 1.0, run.qd.Qplus));
  for (int j = 0; j < run.d.m(); ++j) {
    FlowSlot s;
    s.B = run.d.maps[j];
    s.c = run.d.exponents[j];
    s.flow = run.A[j];
    s.mix = run.mixtures[j];
    slots.push_back(std::move(s));
  }
  if (run.qd.Bm1.rows() > 0) slots.push_back(gauss_slot(run.qd.Bm1, -1.0, run.qd.Qminus));
  return slots;
}

}  // namespace detail

/// Assembles a run; the Q weight is folded through the decomposition so that
/// every factor of the product is an exact gaussian mixture.
inline FlowRun make_flow_run(const Datum& d, const GaussianTuple& a,
                             std::vector<GaussianMixture> mixtures,
                             std::vector<double> t_grid, int samples, std::uint64_t seed,
                             FlowDirection direction = FlowDirection::inverse) {
  require_shapes(d, a);
  if (d.n > 3) throw std::invalid_argument("make_flow_run: ambient dimension capped at 3");
  if (static_cast<int>(mixtures.size()) != d.m())
    throw std::invalid_argument("make_flow_run: one mixture per factor required");
  for (int j = 0; j < d.m(); ++j) {
    if (!mixtures[j].valid()) throw std::invalid_argument("make_flow_run: invalid mixture");
    if (!d.regularizers[j] ||
        (mixtures[j].precision - *d.regularizers[j]).norm() >
            1e-10 * (1.0 + d.regularizers[j]->norm()))
      throw std::invalid_argument("make_flow_run: mixture precision must equal G_j");
  }

  FlowRun run;
  run.d = d;
  run.A = a;
  run.mixtures = std::move(mixtures);
  run.t_grid = std::move(t_grid);
  run.samples = samples;
  run.seed = seed;
  run.direction = direction;

  if (direction == FlowDirection::inverse) {
    run.qd = decompose_Q(d);
  } else {
    // forward runs need Q >= 0; keep only the PSD factorization (no negative slot)
    Eigen::SelfAdjointEigenSolver<Matrix> es(symmetrize(d.Q));
    const Vector& w = es.eigenvalues();
    double band = 1e-10 * std::max(1.0, std::abs(w.cwiseAbs().maxCoeff()));
    if (w.minCoeff() < -band)
      throw std::invalid_argument("make_flow_run: forward direction needs Q >= 0");
    std::vector<int> keep;
    for (int i = 0; i < w.size(); ++i)
      if (w[i] > band) keep.push_back(i);
    run.qd.B0 = Matrix(keep.size(), d.n);
    run.qd.Qplus = Matrix::Zero(keep.size(), keep.size());
    for (size_t i = 0; i < keep.size(); ++i) {
      run.qd.B0.row(i) = es.eigenvectors().col(keep[i]).transpose();
      run.qd.Qplus(i, i) = w[keep[i]];
    }
    run.qd.Bm1 = Matrix(0, d.n);
    run.qd.Qminus = Matrix(0, 0);
  }

  double cn = 0.0;
  for (const auto& s : detail::flow_slots(run)) cn += s.c * s.B.rows();
  run.alpha = 0.5 * (d.n - cn);
  return run;
}

/// log U(t, x) = -alpha log t + sum_j c_j log u_j(t, B_j x) over all slots.
inline double log_U(const FlowRun& run, double t, const Vector& x) {
  double s = -run.alpha * std::log(t);
  for (const auto& slot : detail::flow_slots(run)) {
    GaussianMixture u = evolve_mixture(slot.mix, slot.flow, t);
    s += slot.c * log_eval(u, slot.B * x);
  }
  return s;
}

inline Matrix hess_log_U(const FlowRun& run, double t, const Vector& x) {
  Matrix h = Matrix::Zero(run.d.n, run.d.n);
  for (const auto& slot : detail::flow_slots(run)) {
    GaussianMixture u = evolve_mixture(slot.mix, slot.flow, t);
    h += slot.c * slot.B.transpose() * hess_log(u, slot.B * x) * slot.B;
  }
  return h;
}

struct QEstimate {
  double t = 0.0;
  double value = 0.0;
  double stderr_ = 0.0;
};

/// Q(t) = t^{-alpha} int prod_j u_j(t, B_j x)^{c_j} dx by importance sampling.
/// The proposal is the gaussian with precision S(t) = sum_j c_j B_j^T P_j(t) B_j
/// (the exact far-field exponent of the integrand, so the quadratic part of the
/// weights cancels) centered at the matched mean. Same seed for every t so the
/// estimates share randomness across the grid.
inline QEstimate functional_Q(const FlowRun& run, double t) {
  std::vector<detail::FlowSlot> slots = detail::flow_slots(run);
  std::vector<GaussianMixture> evolved;
  evolved.reserve(slots.size());
  for (const auto& s : slots) evolved.push_back(evolve_mixture(s.mix, s.flow, t));

  const int n = run.d.n;
  Matrix S = Matrix::Zero(n, n);
  Vector r = Vector::Zero(n);
  for (size_t j = 0; j < slots.size(); ++j) {
    S += slots[j].c * slots[j].B.transpose() * evolved[j].precision * slots[j].B;
    Vector ybar = Vector::Zero(slots[j].B.rows());
    double mass = evolved[j].mass();
    for (const auto& a : evolved[j].atoms) ybar += (a.weight / mass) * a.center;
    r += slots[j].c * slots[j].B.transpose() * (evolved[j].precision * ybar);
  }
  S = symmetrize(S);
  if (min_eig(S) <= 0.0) {
    std::ostringstream msg;
    msg << "functional_Q: integrand is not integrable at t = " << t
        << " (far-field exponent matrix has min eigenvalue " << min_eig(S) << ")";
    throw std::runtime_error(msg.str());
  }
  Vector mu = spd_inverse(S) * r;
  Matrix cov_chol = Eigen::LLT<Matrix>(spd_inverse(S) / (2.0 * M_PI)).matrixL();
  double half_logdet_s = 0.5 * logdet_spd(S).first;

  std::mt19937_64 rng(run.seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  double sum = 0.0, comp = 0.0, sum2 = 0.0, comp2 = 0.0;
  for (int i = 0; i < run.samples; ++i) {
    Vector z(n);
    for (int k = 0; k < n; ++k) z[k] = gauss(rng);
    Vector x = mu + cov_chol * z;
    double logq = half_logdet_s - M_PI * (x - mu).dot(S * (x - mu));
    double logh = -run.alpha * std::log(t);
    for (size_t j = 0; j < slots.size(); ++j)
      logh += slots[j].c * log_eval(evolved[j], slots[j].B * x);
    double w = std::exp(logh - logq);
    if (!std::isfinite(w)) {
      std::ostringstream msg;
      msg << "functional_Q: non-finite integrand weight at t = " << t << ", sample " << i;
      throw std::runtime_error(msg.str());
    }
    double y = w - comp, tv = sum + y;
    comp = (tv - sum) - y;
    sum = tv;
    double y2 = w * w - comp2, t2 = sum2 + y2;
    comp2 = (t2 - sum2) - y2;
    sum2 = t2;
  }
  QEstimate est;
  est.t = t;
  est.value = sum / run.samples;
  double var = std::max(0.0, sum2 / run.samples - est.value * est.value);
  est.stderr_ = std::sqrt(var / run.samples);
  return est;
}

struct MonotonicityReport {
  bool precondition_ok = false;
  std::vector<QEstimate> values;
  std::vector<bool> step_ok;
  bool monotone = true;
  double large_time_limit = 0.0;
  double large_time_reldiff = 0.0;
  bool large_time_ok = false;
  bool pass = false;
};

/// Flow monotonicity at Monte-Carlo precision: non-increasing for inverse
/// direction, non-decreasing for forward, each step within 3 combined standard
/// errors; plus the large-time limit against bl_gaussian * prod(mass_j^{c_j}).
inline MonotonicityReport check_monotonicity(const FlowRun& run, double large_time_tol = 0.01) {
  MonotonicityReport rep;
  ExtremizerReport cert = extremizer_report(run.d, run.A);
  rep.precondition_ok = run.direction == FlowDirection::inverse
                            ? cert.pass()
                            : (cert.condition1_forward() && cert.condition2);

  for (double t : run.t_grid) rep.values.push_back(functional_Q(run, t));
  for (size_t k = 0; k + 1 < rep.values.size(); ++k) {
    const QEstimate& a = rep.values[k];
    const QEstimate& b = rep.values[k + 1];
    double tol = 3.0 * std::hypot(a.stderr_, b.stderr_);
    bool ok = run.direction == FlowDirection::inverse ? b.value <= a.value + tol
                                                      : b.value >= a.value - tol;
    rep.step_ok.push_back(ok);
    rep.monotone = rep.monotone && ok;
  }

  double mass_prod = 1.0;
  for (int j = 0; j < run.d.m(); ++j)
    mass_prod *= std::pow(run.mixtures[j].mass(), run.d.exponents[j]);
  rep.large_time_limit = bl_gaussian(run.d, run.A).value * mass_prod;
  if (!rep.values.empty()) {
    rep.large_time_reldiff =
        std::abs(rep.values.back().value / rep.large_time_limit - 1.0);
    rep.large_time_ok = rep.large_time_reldiff <= large_time_tol;
  }
  rep.pass = rep.precondition_ok && rep.monotone && rep.large_time_ok;
  return rep;
}

struct ClosureResidual {
  double normalized = 0.0;  // (dt U - div(Mtilde^{-1} grad U)/(4 pi)) / U
  double term_I = 0.0;
  double term_II = 0.0;
  double scale = 0.0;  // magnitude of the assembled terms, for tolerances
};

/// Pointwise subsolution defect of U against the Mtilde heat operator, assembled
/// from the exact mixture derivatives:
///   I  = sum c_j <v_j, A_j^{-1} v_j> - <w, Mtilde^{-1} w>,  w = sum c_j B_j^T v_j
///   II = -4 pi alpha / t + sum c_j tr((A_j^{-1} - B_j Mtilde^{-1} B_j^T) D^2 log u_j)
/// and residual / U = (I + II) / (4 pi). Nonpositive (to roundoff) whenever the
/// extremizer conditions hold.
inline ClosureResidual closure_residual(const FlowRun& run, double t, const Vector& x) {
  std::vector<detail::FlowSlot> slots = detail::flow_slots(run);
  Matrix mt = m_matrix(run.d, run.A, true);
  Matrix mti = spd_inverse(mt);

  Vector w = Vector::Zero(run.d.n);
  double sum_quad = 0.0, sum_tr = 0.0, mag = 0.0;
  for (const auto& slot : slots) {
    GaussianMixture u = evolve_mixture(slot.mix, slot.flow, t);
    Vector bx = slot.B * x;
    Vector v = grad_log(u, bx);
    Matrix h = hess_log(u, bx);
    Matrix ainv = spd_inverse(slot.flow);
    w += slot.c * slot.B.transpose() * v;
    double q = slot.c * v.dot(ainv * v);
    double tr = slot.c * ((ainv - slot.B * mti * slot.B.transpose()) * h).trace();
    sum_quad += q;
    sum_tr += tr;
    mag += std::abs(q) + std::abs(tr);
  }
  double wquad = w.dot(mti * w);
  ClosureResidual out;
  out.term_I = sum_quad - wquad;
  out.term_II = -4.0 * M_PI * run.alpha / t + sum_tr;
  out.normalized = (out.term_I + out.term_II) / (4.0 * M_PI);
  out.scale = 1.0 + mag + std::abs(wquad) + std::abs(4.0 * M_PI * run.alpha / t);
  return out;
}

}  // namespace ibl

#endif
