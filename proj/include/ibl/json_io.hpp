#ifndef IBL_JSON_IO_HPP
#define IBL_JSON_IO_HPP

#include <json.hpp>

#include "ibl/closed_forms.hpp"
#include "ibl/heatflow.hpp"

namespace ibl {

using json = nlohmann::json;

/// Thrown on schema violations; the message names the offending field.
struct SchemaError : std::runtime_error {
  explicit SchemaError(const std::string& msg) : std::runtime_error(msg) {}
};

inline json matrix_to_json(const Matrix& m) {
  json rows = json::array();
  for (int i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (int j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

inline Matrix matrix_from_json(const json& j, const std::string& field) {
  if (!j.is_array() || j.empty() || !j[0].is_array())
    throw SchemaError(field + ": expected an array of row arrays");
  int rows = static_cast<int>(j.size());
  int cols = static_cast<int>(j[0].size());
  Matrix m(rows, cols);
  for (int r = 0; r < rows; ++r) {
    if (!j[r].is_array() || static_cast<int>(j[r].size()) != cols)
      throw SchemaError(field + ": ragged rows (row " + std::to_string(r) + ")");
    for (int c = 0; c < cols; ++c) {
      if (!j[r][c].is_number())
        throw SchemaError(field + ": non-numeric entry at (" + std::to_string(r) + "," +
                          std::to_string(c) + ")");
      m(r, c) = j[r][c].get<double>();
    }
  }
  return m;
}

inline Vector vector_from_json(const json& j, const std::string& field) {
  if (!j.is_array()) throw SchemaError(field + ": expected an array");
  Vector v(j.size());
  for (size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_number()) throw SchemaError(field + ": non-numeric entry");
    v[static_cast<int>(i)] = j[i].get<double>();
  }
  return v;
}

inline json datum_to_json(const Datum& d) {
  json out;
  out["n"] = d.n;
  json maps = json::array();
  for (const auto& b : d.maps) maps.push_back(matrix_to_json(b));
  out["maps"] = std::move(maps);
  out["exponents"] = d.exponents;
  out["Q"] = d.Q.norm() == 0.0 ? json(nullptr) : matrix_to_json(d.Q);
  json regs = json::array();
  for (const auto& g : d.regularizers)
    regs.push_back(g ? matrix_to_json(*g) : json(nullptr));
  out["regularizers"] = std::move(regs);
  return out;
}

/// Parses the datum schema {"n", "maps", "exponents", "Q": matrix|null,
/// "regularizers": [matrix|null, ...]|absent}; dimensions are cross-checked.
inline Datum datum_from_json(const json& j) {
  if (!j.is_object()) throw SchemaError("datum: expected an object");
  if (!j.contains("n") || !j["n"].is_number_integer())
    throw SchemaError("datum.n: expected an integer");
  int n = j["n"].get<int>();
  if (n <= 0) throw SchemaError("datum.n: must be positive");
  if (!j.contains("maps") || !j["maps"].is_array() || j["maps"].empty())
    throw SchemaError("datum.maps: expected a nonempty array of matrices");
  std::vector<Matrix> maps;
  for (size_t k = 0; k < j["maps"].size(); ++k) {
    Matrix b = matrix_from_json(j["maps"][k], "datum.maps[" + std::to_string(k) + "]");
    if (b.cols() != n)
      throw SchemaError("datum.maps[" + std::to_string(k) + "]: expected " +
                        std::to_string(n) + " columns");
    maps.push_back(std::move(b));
  }
  if (!j.contains("exponents") || !j["exponents"].is_array() ||
      j["exponents"].size() != maps.size())
    throw SchemaError("datum.exponents: expected one number per map");
  std::vector<double> exponents;
  for (const auto& e : j["exponents"]) {
    if (!e.is_number()) throw SchemaError("datum.exponents: non-numeric entry");
    exponents.push_back(e.get<double>());
  }
  Matrix Q;
  if (j.contains("Q") && !j["Q"].is_null()) {
    Q = matrix_from_json(j["Q"], "datum.Q");
    if (Q.rows() != n || Q.cols() != n) throw SchemaError("datum.Q: expected n x n");
  }
  std::vector<std::optional<Matrix>> regs;
  if (j.contains("regularizers") && !j["regularizers"].is_null()) {
    if (!j["regularizers"].is_array() || j["regularizers"].size() != maps.size())
      throw SchemaError("datum.regularizers: expected one entry per map");
    for (size_t k = 0; k < maps.size(); ++k) {
      const json& g = j["regularizers"][k];
      if (g.is_null()) {
        regs.emplace_back(std::nullopt);
      } else {
        Matrix gm = matrix_from_json(g, "datum.regularizers[" + std::to_string(k) + "]");
        if (gm.rows() != maps[k].rows() || gm.cols() != maps[k].rows())
          throw SchemaError("datum.regularizers[" + std::to_string(k) +
                            "]: expected n_j x n_j");
        regs.emplace_back(std::move(gm));
      }
    }
  }
  return make_datum(n, std::move(maps), std::move(exponents), std::move(Q), std::move(regs));
}

inline json report_to_json(const ValidationReport& rep) {
  json out;
  out["verdict"] = rep.verdict;
  json checks = json::array();
  for (const auto& c : rep.checks)
    checks.push_back({{"name", c.name}, {"pass", c.pass}, {"residual", c.residual}});
  out["checks"] = std::move(checks);
  return out;
}

inline json bl_value_to_json(const BlValue& v) {
  json out;
  out["finite"] = v.finite;
  out["log"] = v.finite ? json(v.log_value) : json(nullptr);
  out["linear"] = v.finite ? json(v.value) : json(nullptr);
  return out;
}

inline json extremizer_report_to_json(const ExtremizerReport& rep) {
  json out;
  out["condition1"] = rep.condition1;
  out["condition2"] = rep.condition2;
  out["condition1_forward"] = rep.condition1_forward();
  out["pass"] = rep.pass();
  out["tol"] = rep.tol;
  out["cond1_min_eig"] = rep.cond1_min_eig;
  out["cond1_max_eig"] = rep.cond1_max_eig;
  out["cond2_residual"] = rep.cond2_residual;
  return out;
}

inline json tuple_to_json(const GaussianTuple& a) {
  json out = json::array();
  for (const auto& m : a) out.push_back(matrix_to_json(m));
  return out;
}

inline GaussianTuple tuple_from_json(const json& j, const std::string& field) {
  if (!j.is_array()) throw SchemaError(field + ": expected an array of matrices");
  GaussianTuple a;
  for (size_t k = 0; k < j.size(); ++k)
    a.push_back(matrix_from_json(j[k], field + "[" + std::to_string(k) + "]"));
  return a;
}

inline json opt_result_to_json(const OptResult& r) {
  json out;
  out["value"] = bl_value_to_json(r.value);
  out["argopt"] = tuple_to_json(r.argopt);
  out["iterations"] = r.iterations;
  out["grad_norm"] = r.grad_norm;
  out["converged"] = r.converged;
  out["seed"] = r.seed;
  out["extremizer_report"] = extremizer_report_to_json(r.report);
  json bc = json::array();
  for (bool b : r.boundary_contact) bc.push_back(b);
  out["boundary_contact"] = std::move(bc);
  return out;
}

inline json mixture_to_json(const GaussianMixture& f) {
  json out;
  out["precision"] = matrix_to_json(f.precision);
  json atoms = json::array();
  for (const auto& a : f.atoms) {
    json c = json::array();
    for (int i = 0; i < a.center.size(); ++i) c.push_back(a.center[i]);
    atoms.push_back({{"weight", a.weight}, {"center", std::move(c)}});
  }
  out["atoms"] = std::move(atoms);
  return out;
}

inline GaussianMixture mixture_from_json(const json& j, const std::string& field) {
  if (!j.is_object() || !j.contains("precision") || !j.contains("atoms"))
    throw SchemaError(field + ": expected {precision, atoms}");
  GaussianMixture f;
  f.precision = matrix_from_json(j["precision"], field + ".precision");
  if (!j["atoms"].is_array() || j["atoms"].empty())
    throw SchemaError(field + ".atoms: expected a nonempty array");
  for (size_t k = 0; k < j["atoms"].size(); ++k) {
    const json& a = j["atoms"][k];
    std::string af = field + ".atoms[" + std::to_string(k) + "]";
    if (!a.is_object() || !a.contains("weight") || !a.contains("center"))
      throw SchemaError(af + ": expected {weight, center}");
    GaussianMixture::Atom atom;
    atom.weight = a["weight"].get<double>();
    atom.center = vector_from_json(a["center"], af + ".center");
    f.atoms.push_back(std::move(atom));
  }
  return f;
}

inline json flow_run_to_json(const FlowRun& run) {
  json out;
  out["datum"] = datum_to_json(run.d);
  out["A"] = tuple_to_json(run.A);
  json mixes = json::array();
  for (const auto& m : run.mixtures) mixes.push_back(mixture_to_json(m));
  out["mixtures"] = std::move(mixes);
  out["t_grid"] = run.t_grid;
  out["samples"] = run.samples;
  out["seed"] = run.seed;
  out["direction"] = run.direction == FlowDirection::inverse ? "inverse" : "forward";
  out["alpha"] = run.alpha;
  return out;
}

inline FlowRun flow_run_from_json(const json& j) {
  if (!j.is_object()) throw SchemaError("flow run: expected an object");
  for (const char* key : {"datum", "A", "mixtures", "t_grid"})
    if (!j.contains(key)) throw SchemaError(std::string("flow run: missing field ") + key);
  Datum d = datum_from_json(j["datum"]);
  GaussianTuple a = tuple_from_json(j["A"], "A");
  std::vector<GaussianMixture> mixes;
  for (size_t k = 0; k < j["mixtures"].size(); ++k)
    mixes.push_back(mixture_from_json(j["mixtures"][k], "mixtures[" + std::to_string(k) + "]"));
  std::vector<double> ts;
  for (const auto& t : j["t_grid"]) ts.push_back(t.get<double>());
  int samples = j.value("samples", 100000);
  std::uint64_t seed = j.value("seed", std::uint64_t{0});
  FlowDirection dir = j.value("direction", std::string("inverse")) == "forward"
                          ? FlowDirection::forward
                          : FlowDirection::inverse;
  return make_flow_run(d, a, std::move(mixes), std::move(ts), samples, seed, dir);
}

inline json monotonicity_report_to_json(const MonotonicityReport& rep) {
  json out;
  out["precondition_ok"] = rep.precondition_ok;
  json records = json::array();
  for (const auto& q : rep.values)
    records.push_back({{"t", q.t}, {"Q", q.value}, {"stderr", q.stderr_}});
  out["records"] = std::move(records);
  json steps = json::array();
  for (bool b : rep.step_ok) steps.push_back(b);
  out["step_ok"] = std::move(steps);
  out["monotone"] = rep.monotone;
  out["large_time_limit"] = rep.large_time_limit;
  out["large_time_reldiff"] = rep.large_time_reldiff;
  out["large_time_ok"] = rep.large_time_ok;
  out["pass"] = rep.pass;
  return out;
}

}  // namespace ibl

#endif
