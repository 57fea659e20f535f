#ifndef IBL_CLI_HPP
#define IBL_CLI_HPP

#include <CLI11.hpp>
#include <fstream>
#include <iostream>
#include <sstream>

#include "ibl/json_io.hpp"

namespace ibl::cli {

inline constexpr int exit_ok = 0;
inline constexpr int exit_validation = 1;
inline constexpr int exit_computation = 2;
inline constexpr int exit_usage = 3;

namespace detail {

inline json read_json_input(const std::string& path) {
  std::string text;
  if (path == "-") {
    std::ostringstream ss;
    ss << std::cin.rdbuf();
    text = ss.str();
  } else {
    std::ifstream in(path);
    if (!in) throw SchemaError("cannot open input file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    text = ss.str();
  }
  return json::parse(text);
}

inline void write_output(const json& out, const std::string& path, std::ostream& stdout_stream) {
  std::string text = out.dump(2);
  if (path.empty()) {
    stdout_stream << text << "\n";
  } else {
    std::ofstream f(path);
    f << text << "\n";
  }
}

inline std::vector<double> parse_list(const std::string& csv) {
  std::vector<double> out;
  std::stringstream ss(csv);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    if (!tok.empty()) out.push_back(std::stod(tok));
  }
  return out;
}

}  // namespace detail

/// Runs one subcommand; returns the process exit code and writes a JSON report.
/// 0 = success, 1 = validation failure, 2 = computational error, 3 = usage error.
inline int run(std::vector<std::string> args, std::ostream& out_stream = std::cout,
               std::ostream& err_stream = std::cerr) {
  CLI::App app{"gaussian Brascamp-Lieb constants: optimization, certification, heat-flow verification"};
  app.require_subcommand(1);

  std::string input, output;
  std::uint64_t seed = 0;
  int samples = 100000;
  double tol = 1e-6;
  std::string direction = "infimum";
  std::string t_grid = "1,2,5,10,50,100";
  std::string lambdas;

  auto add_io = [&](CLI::App* sub, bool needs_input) {
    if (needs_input) sub->add_option("--input", input, "input JSON file (- for stdin)")->required();
    sub->add_option("--output", output, "output JSON file (default stdout)");
  };

  CLI::App* c_check = app.add_subcommand("check", "validate a datum and run the non-degeneracy checks");
  add_io(c_check, true);

  CLI::App* c_compute = app.add_subcommand("compute", "optimize the gaussian functional over 0 < A <= G");
  add_io(c_compute, true);
  c_compute->add_option("--seed", seed, "random seed");
  c_compute->add_option("--tol", tol, "stationarity tolerance");
  c_compute->add_option("--direction", direction, "infimum | supremum");
  int restarts = 8;
  c_compute->add_option("--restarts", restarts, "number of restarts");
  double amplify_cp = 0.0;
  c_compute->add_option("--amplify", amplify_cp, "append an amplifying factor with this exponent");
  c_compute->add_option("--lambda", lambdas, "comma list of amplifier regularizer scales");

  CLI::App* c_certify = app.add_subcommand("certify", "extremizer conditions for a provided tuple");
  add_io(c_certify, true);
  double certify_tol = -1.0;
  c_certify->add_option("--tol", certify_tol, "certification tolerance (default conditioning-aware)");

  CLI::App* c_flow = app.add_subcommand("flow", "heat-flow monotonicity verification for a flow-run file");
  add_io(c_flow, true);
  bool flow_has_seed = false, flow_has_samples = false, flow_has_grid = false;
  c_flow->add_option("--seed", seed)->each([&](const std::string&) { flow_has_seed = true; });
  c_flow->add_option("--samples", samples)->each([&](const std::string&) { flow_has_samples = true; });
  c_flow->add_option("--t-grid", t_grid)->each([&](const std::string&) { flow_has_grid = true; });
  double large_time_tol = 0.01;
  c_flow->add_option("--large-time-tol", large_time_tol);

  CLI::App* c_young = app.add_subcommand("young", "sharp convolution constants on the line");
  add_io(c_young, false);
  double yc0 = 0, yc1 = 0, yc2 = 0, ys0 = 0, ys1 = 0, ys2 = 0;
  std::string regime = "inverse";
  c_young->add_option("--c0", yc0)->required();
  c_young->add_option("--c1", yc1)->required();
  c_young->add_option("--c2", yc2)->required();
  CLI::Option* o_s0 = c_young->add_option("--sigma0", ys0);
  c_young->add_option("--sigma1", ys1)->needs(o_s0);
  c_young->add_option("--sigma2", ys2)->needs(o_s0);
  c_young->add_option("--regime", regime, "forward | inverse");

  CLI::App* c_pl = app.add_subcommand("pl", "regularized Prekopa-Leindler constant on the line");
  add_io(c_pl, false);
  PLSpec pls;
  c_pl->add_option("--c1", pls.c1)->required();
  c_pl->add_option("--c2", pls.c2)->required();
  c_pl->add_option("--sigma1", pls.sigma1)->required();
  c_pl->add_option("--sigma2", pls.sigma2)->required();

  CLI::App* c_hc = app.add_subcommand("hc", "hypercontractivity datum and prefactor");
  add_io(c_hc, false);
  double hp = 0.0, hq = 0.0, hs = 0.0, hg = 1.0 / (2.0 * M_PI);
  c_hc->add_option("--p", hp)->required();
  CLI::Option* o_q = c_hc->add_option("--q", hq);
  c_hc->add_option("--s", hs)->excludes(o_q);
  c_hc->add_option("--gscale", hg, "regularizer scale (default standard-gaussian precision)");

  CLI::App* c_oracle = app.add_subcommand("oracle", "grid brute force over diagonal tuples");
  add_io(c_oracle, true);
  GridSpec grid;
  c_oracle->add_option("--grid-points", grid.points_per_axis);
  c_oracle->add_option("--grid-lo", grid.lo_factor);
  c_oracle->add_option("--direction", direction, "infimum | supremum");

  try {
    std::vector<std::string> rev(args.rbegin(), args.rend());
    app.parse(rev);
  } catch (const CLI::ParseError& e) {
    err_stream << e.what() << "\n";
    return exit_usage;
  }

  try {
    if (*c_check) {
      Datum d = datum_from_json(detail::read_json_input(input));
      ValidationReport val = validate_datum(d);
      json out;
      out["validation"] = report_to_json(val);
      bool ok = val.verdict;
      if (val.verdict) {
        ValidationReport nd = check_nondegenerate(d);
        out["nondegeneracy"] = report_to_json(nd);
        ok = nd.verdict;
      }
      detail::write_output(out, output, out_stream);
      return ok ? exit_ok : exit_validation;
    }

    if (*c_compute) {
      Datum d = datum_from_json(detail::read_json_input(input));
      ValidationReport val = validate_datum(d);
      if (!val.verdict) {
        detail::write_output({{"validation", report_to_json(val)}}, output, out_stream);
        return exit_validation;
      }
      OptConfig cfg;
      cfg.direction = direction.starts_with("sup") ? Direction::supremum : Direction::infimum;
      cfg.seed = seed;
      cfg.kkt_tol = tol;
      cfg.restarts = restarts;
      json out;
      if (amplify_cp > 0.0) {
        OptResult base = optimize_gaussian(d, cfg);
        out["base"] = opt_result_to_json(base);
        json sweep = json::array();
        for (double lam : detail::parse_list(lambdas.empty() ? "1e-1,1e-2,1e-3,1e-4" : lambdas)) {
          OptResult r = optimize_gaussian(amplify(d, amplify_cp, lam), cfg);
          double scaled = std::pow(lam, d.n * amplify_cp / 2.0) * r.value.value;
          sweep.push_back({{"lambda", lam},
                           {"value", bl_value_to_json(r.value)},
                           {"scaled_value", scaled},
                           {"converged", r.converged}});
        }
        out["amplification_sweep"] = std::move(sweep);
      } else {
        out = opt_result_to_json(optimize_gaussian(d, cfg));
      }
      detail::write_output(out, output, out_stream);
      return exit_ok;
    }

    if (*c_certify) {
      json in = detail::read_json_input(input);
      if (!in.contains("datum") || !in.contains("A"))
        throw SchemaError("certify input: expected {datum, A}");
      Datum d = datum_from_json(in["datum"]);
      GaussianTuple a = tuple_from_json(in["A"], "A");
      std::optional<double> ct;
      if (certify_tol > 0.0) ct = certify_tol;
      ExtremizerReport rep = extremizer_report(d, a, ct);
      detail::write_output(extremizer_report_to_json(rep), output, out_stream);
      return rep.pass() ? exit_ok : exit_validation;
    }

    if (*c_flow) {
      json in = detail::read_json_input(input);
      if (flow_has_seed) in["seed"] = seed;
      if (flow_has_samples) in["samples"] = samples;
      if (flow_has_grid) in["t_grid"] = detail::parse_list(t_grid);
      FlowRun run = flow_run_from_json(in);
      MonotonicityReport rep = check_monotonicity(run, large_time_tol);
      detail::write_output(monotonicity_report_to_json(rep), output, out_stream);
      return rep.pass ? exit_ok : exit_validation;
    }

    if (*c_young) {
      json out;
      if (c_young->count("--sigma0")) {
        YoungSpec spec{yc0, yc1, yc2, ys0, ys1, ys2};
        YoungRegime reg = regime == "forward" ? YoungRegime::forward : YoungRegime::inverse;
        YoungResult r = young_regularized(spec, reg);
        out["constant"] = r.constant;
        out["condition_holds"] = r.condition_holds;
        out["gammas"] = r.gammas;
        out["datum"] = datum_to_json(young_datum(spec, reg));
      } else {
        out["constant"] = young_constant(yc0, yc1, yc2);
      }
      detail::write_output(out, output, out_stream);
      return exit_ok;
    }

    if (*c_pl) {
      PLResult r = pl_regularized(pls);
      json out;
      out["constant"] = r.constant;
      out["condition_holds"] = r.condition_holds;
      out["datum"] = datum_to_json(pl_datum(pls));
      detail::write_output(out, output, out_stream);
      return exit_ok;
    }

    if (*c_hc) {
      HCSpec spec = c_hc->count("--q") ? hc_spec_from_pq(hp, hq) : hc_spec_from_ps(hp, hs);
      HCResult r = hc_datum(spec, hg);
      json out;
      out["p"] = spec.p;
      out["q"] = spec.q;
      out["s"] = spec.s;
      out["C_ps"] = r.c_ps;
      out["exponents"] = {r.c1, r.c2};
      out["datum"] = datum_to_json(r.datum);
      out["validation"] = report_to_json(validate_datum(r.datum));
      out["nondegeneracy"] = report_to_json(check_nondegenerate(r.datum));
      detail::write_output(out, output, out_stream);
      return exit_ok;
    }

    if (*c_oracle) {
      Datum d = datum_from_json(detail::read_json_input(input));
      OracleResult r = brute_force_oracle(d, grid);
      json out;
      out["min"] = r.min_value;
      out["max"] = r.max_value;
      out["value"] = direction.starts_with("sup") ? r.max_value : r.min_value;
      out["argmin"] = tuple_to_json(r.argmin);
      out["argmax"] = tuple_to_json(r.argmax);
      detail::write_output(out, output, out_stream);
      return exit_ok;
    }
  } catch (const json::parse_error& e) {
    err_stream << "JSON parse error: " << e.what() << "\n";
    return exit_usage;
  } catch (const SchemaError& e) {
    err_stream << "schema error: " << e.what() << "\n";
    return exit_usage;
  } catch (const std::invalid_argument& e) {
    err_stream << "invalid input: " << e.what() << "\n";
    return exit_validation;
  } catch (const std::exception& e) {
    err_stream << "error: " << e.what() << "\n";
    return exit_computation;
  }
  return exit_usage;
}

}  // namespace ibl::cli

#endif
