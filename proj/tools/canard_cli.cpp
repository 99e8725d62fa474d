#include <cstdio>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "canard/model_file.hpp"
#include "json.hpp"

using namespace canard;
using nlohmann::json;

namespace {

std::string d15(double v) {
  char buf[48];
  std::snprintf(buf, sizeof(buf), "%.15g", v);
  return buf;
}

int exit_code_for(const error& e) {
  switch (e.code()) {
    case errc::syntax_error:
    case errc::unknown_identifier:
    case errc::bad_model_file:
      return 2;
    case errc::no_cancellation:
    case errc::no_solution:
    case errc::indeterminate:
    case errc::no_collision:
    case errc::same_class_at_endpoints:
    case errc::multiple_roots_ambiguous:
      return 4;
    default:
      return 3;
  }
}

enum class Format { table, csv, json_ };

Format parse_format(const std::string& s) {
  if (s == "table") return Format::table;
  if (s == "csv") return Format::csv;
  if (s == "json") return Format::json_;
  fail(errc::bad_model_file, "unknown format '" + s + "'");
}

const char* kCrlf = "\r\n";

// integer-coefficient serialization of a rational function: both polynomials
// scaled by the common denominator of all coefficients
json ratfunc_json(const RatFuncQ& f) {
  mpz_class scale = 1;
  for (const Rational& c : f.num().coeffs()) mpz_lcm(scale.get_mpz_t(), scale.get_mpz_t(), c.den().get_mpz_t());
  for (const Rational& c : f.den().coeffs()) mpz_lcm(scale.get_mpz_t(), scale.get_mpz_t(), c.den().get_mpz_t());
  Rational s{scale, mpz_class(1)};
  json num = json::array(), den = json::array();
  for (const Rational& c : f.num().coeffs()) num.push_back((c * s).num().get_str());
  for (const Rational& c : f.den().coeffs()) den.push_back((c * s).num().get_str());
  return json{{"numerator", num}, {"denominator", den}};
}

json iterate_json(const CanardIterate& it, const std::string& var) {
  json j;
  j["k"] = it.k;
  j["resolved"] = it.resolved;
  j["x_star"] = it.root;
  if (it.root_is_exact) j["x_star_exact"] = it.root_exact.to_string();
  j["c"] = it.c_value;
  if (it.c_is_exact) j["c_exact"] = it.c_exact.to_string();
  j["c_error_bound"] = it.c_error_bound;
  j["certificate_residual"] = it.certificate_residual;
  j["expression_size"] = it.expression_size;
  j["iterate"] = it.render(var);
  j["diagnostics"] = it.diagnostics;
  return j;
}

std::string join_notes(const std::vector<std::string>& notes) {
  std::string out;
  for (const std::string& n : notes) {
    if (!out.empty()) out += "; ";
    out += n;
  }
  return out;
}

int cmd_iterate(const std::string& model_path, int k_opt, const std::string& mode_s,
                Format fmt, std::size_t budget, int panels) {
  ModelFile model = ModelFile::parse_file(model_path);
  int k_max = k_opt > 0 ? k_opt : model.k_max;
  StepOptions opts;
  opts.mode = mode_s == "numeric" ? IterationMode::numeric : IterationMode::exact;
  opts.node_budget = budget;
  opts.scan_panels = panels;

  IterationMap map = model.iteration_map(false);
  RunResult run = run_iteration(map, k_max, opts);

  if (fmt == Format::json_) {
    json j;
    j["model"] = model.name;
    j["command"] = "iterate";
    j["k_max"] = k_max;
    j["mode"] = mode_s;
    json steps = json::array();
    for (const auto& cands : run.steps) {
      json row = json::array();
      for (const auto& c : cands) row.push_back(iterate_json(c, model.independent));
      steps.push_back(row);
    }
    j["steps"] = steps;
    if (!run.stop_reason.empty()) j["stop_reason"] = run.stop_reason;
    std::cout << j.dump(2) << "\n";
  } else if (fmt == Format::csv) {
    std::cout << "k,x_star,c,c_exact,c_error_bound,certificate_residual,expression_size,"
                 "resolved,notes" << kCrlf;
    for (const auto& cands : run.steps)
      for (const auto& it : cands)
        std::cout << it.k << "," << d15(it.root) << "," << d15(it.c_value) << ","
                  << (it.c_is_exact ? it.c_exact.to_string() : "") << ","
                  << d15(it.c_error_bound) << "," << d15(it.certificate_residual) << ","
                  << it.expression_size << "," << (it.resolved ? 1 : 0) << ","
                  << join_notes(it.diagnostics) << kCrlf;
  } else {
    std::printf("model %s: canard-point iteration, k_max = %d, mode = %s\n",
                model.name.c_str(), k_max, mode_s.c_str());
    std::printf("%3s  %-22s  %-22s  %-28s  %-10s  %s\n", "k", "x*", model.parameter.c_str(),
                "exact", "residual", "size");
    for (const auto& cands : run.steps)
      for (const auto& it : cands) {
        std::string exact = it.c_is_exact ? it.c_exact.to_string() : "";
        std::printf("%3d  %-22s  %-22s  %-28s  %-10.2e  %zu\n", it.k,
                    it.resolved || it.root != 0.0 ? d15(it.root).c_str() : "-",
                    it.resolved ? d15(it.c_value).c_str() : "-", exact.c_str(),
                    it.certificate_residual, it.expression_size);
        for (const std::string& d : it.diagnostics) std::printf("     note: %s\n", d.c_str());
      }
    if (!run.stop_reason.empty()) std::printf("stopped: %s\n", run.stop_reason.c_str());
  }

  for (const auto& cands : run.steps)
    for (const auto& it : cands)
      if (it.resolved) return 0;
  return 4;  // nothing resolved: no result
}

int cmd_expand(const std::string& model_path, int order_opt, const std::string& method,
               int k_opt, Format fmt) {
  ModelFile model = ModelFile::parse_file(model_path);
  int order = order_opt >= 0 ? order_opt : model.series_order;

  if (method == "classical") {
    SystemVars vars{model.independent, model.dependent, model.parameter, model.epsilon};
    if (model.epsilon.empty())
      fail(errc::bad_model_file, "epsilon not declared in model '" + model.name + "'");
    CanardExpansion ex = classical_canard_expansion(
        model.slow_fast_f(), model.slow_fast_g(), vars, model.fold_abscissa(), order,
        model.branch);
    if (fmt == Format::json_) {
      json j;
      j["model"] = model.name;
      j["command"] = "expand";
      j["method"] = "classical";
      j["order"] = order;
      j["fold_x"] = ex.fold_x.to_string();
      json cs = json::array();
      for (size_t i = 0; i < ex.c.size(); ++i)
        cs.push_back({{"power", i},
                      {"exact", ex.c[i].to_string()},
                      {"decimal", ex.c[i].to_double()}});
      j["c_series"] = cs;
      json ys = json::array();
      for (size_t k = 0; k < ex.y.size(); ++k) {
        json e = ratfunc_json(ex.y[k]);
        e["power"] = k;
        ys.push_back(e);
      }
      j["y_series"] = ys;
      std::cout << j.dump(2) << "\n";
    } else if (fmt == Format::csv) {
      std::cout << "power,c_exact,c_decimal" << kCrlf;
      for (size_t i = 0; i < ex.c.size(); ++i)
        std::cout << i << "," << ex.c[i].to_string() << "," << d15(ex.c[i].to_double())
                  << kCrlf;
    } else {
      std::printf("model %s: classical canard-point expansion, order %d, fold at %s = %s\n",
                  model.name.c_str(), order, model.independent.c_str(),
                  ex.fold_x.to_string().c_str());
      for (size_t i = 0; i < ex.c.size(); ++i)
        std::printf("  c_%zu = %-16s = %s\n", i, ex.c[i].to_string().c_str(),
                    d15(ex.c[i].to_double()).c_str());
    }
    return 0;
  }

  if (method != "iterative") fail(errc::bad_model_file, "unknown method '" + method + "'");
  int k_max = k_opt > 0 ? k_opt : model.k_max;
  IterationMap map = model.iteration_map(true);
  auto res = iterative_asymptotics(map, k_max, order);
  if (fmt == Format::json_) {
    json j;
    j["model"] = model.name;
    j["command"] = "expand";
    j["method"] = "iterative";
    j["order"] = order;
    j["k_max"] = k_max;
    json rows = json::array();
    for (const auto& r : res) {
      json cs = json::array();
      for (size_t i = 0; i < r.c.size(); ++i)
        cs.push_back({{"power", i},
                      {"exact", r.c[i].to_string()},
                      {"decimal", r.c[i].to_double()}});
      rows.push_back({{"iterate", r.iterate}, {"route", r.route}, {"c_series", cs}});
    }
    j["iterates"] = rows;
    std::cout << j.dump(2) << "\n";
  } else if (fmt == Format::csv) {
    std::cout << "iterate,route,power,c_exact,c_decimal" << kCrlf;
    for (const auto& r : res)
      for (size_t i = 0; i < r.c.size(); ++i)
        std::cout << r.iterate << "," << r.route << "," << i << "," << r.c[i].to_string()
                  << "," << d15(r.c[i].to_double()) << kCrlf;
  } else {
    std::printf("model %s: iterative asymptotics, order %d, k_max = %d\n", model.name.c_str(),
                order, k_max);
    for (const auto& r : res) {
      std::printf("iterate %d (%s):\n", r.iterate, r.route.c_str());
      for (size_t i = 0; i < r.c.size(); ++i)
        std::printf("  c_%zu = %-16s = %s\n", i, r.c[i].to_string().c_str(),
                    d15(r.c[i].to_double()).c_str());
    }
  }
  return 0;
}

json stats_json(const CycleStats& s) {
  json j;
  switch (s.status) {
    case CycleStats::Status::converged: j["status"] = "converged"; break;
    case CycleStats::Status::fixed_point: j["status"] = "fixed_point"; break;
    case CycleStats::Status::not_converged: j["status"] = "not_converged"; break;
  }
  j["amplitude"] = {s.amplitude[0], s.amplitude[1]};
  j["period"] = s.period;
  j["returns"] = s.returns_used;
  if (s.status == CycleStats::Status::fixed_point)
    j["fixed_point"] = {s.fixed_point[0], s.fixed_point[1]};
  return j;
}

const char* status_name(const CycleStats& s) {
  switch (s.status) {
    case CycleStats::Status::converged: return "converged";
    case CycleStats::Status::fixed_point: return "fixed_point";
    case CycleStats::Status::not_converged: return "not_converged";
  }
  return "?";
}

int cmd_explode(const std::string& model_path, std::vector<double> interval, double tol_opt,
                int sweep, double threshold_opt, Format fmt) {
  ModelFile model = ModelFile::parse_file(model_path);
  ModelSpec spec = model.ode_model();
  CycleOptions copt = model.cycle_options();
  double lo = model.explode_lo, hi = model.explode_hi;
  if (interval.size() == 2) {
    lo = interval[0];
    hi = interval[1];
  }
  double tol = tol_opt > 0 ? tol_opt : model.explode_tol;
  std::optional<double> threshold;
  if (threshold_opt > 0)
    threshold = threshold_opt;
  else if (model.explode_threshold)
    threshold = model.explode_threshold;

  if (sweep > 0) {
    auto rows = amplitude_sweep(spec, lo, hi, sweep, model.seed_state, copt);
    if (fmt == Format::json_) {
      json j;
      j["model"] = model.name;
      j["command"] = "explode.sweep";
      json rws = json::array();
      for (const auto& r : rows) {
        json e = stats_json(r.stats);
        e["parameter"] = r.parameter;
        rws.push_back(e);
      }
      j["rows"] = rws;
      std::cout << j.dump(2) << "\n";
    } else {
      std::cout << "parameter,amplitude_" << spec.var0 << ",amplitude_" << spec.var1
                << ",period,status" << kCrlf;
      for (const auto& r : rows)
        std::cout << d15(r.parameter) << "," << d15(r.stats.amplitude[0]) << ","
                  << d15(r.stats.amplitude[1]) << "," << d15(r.stats.period) << ","
                  << status_name(r.stats) << kCrlf;
    }
    return 0;
  }

  ExplosionResult res = explosion_bisect(spec, lo, hi, tol, model.seed_state, copt, threshold);
  if (fmt == Format::json_) {
    json j;
    j["model"] = model.name;
    j["command"] = "explode";
    j["parameter"] = res.parameter;
    j["bracket"] = {res.lo, res.hi};
    j["threshold"] = res.threshold;
    j["evaluations"] = res.evaluations;
    j["endpoint_lo"] = stats_json(res.stat_lo);
    j["endpoint_hi"] = stats_json(res.stat_hi);
    std::cout << j.dump(2) << "\n";
  } else if (fmt == Format::csv) {
    std::cout << "parameter,bracket_lo,bracket_hi,threshold,evaluations" << kCrlf;
    std::cout << d15(res.parameter) << "," << d15(res.lo) << "," << d15(res.hi) << ","
              << d15(res.threshold) << "," << res.evaluations << kCrlf;
  } else {
    std::printf("model %s: canard explosion of %s in [%s, %s]\n", model.name.c_str(),
                spec.param.c_str(), d15(lo).c_str(), d15(hi).c_str());
    std::printf("  %s = %s   (bracket [%s, %s], threshold %s, %d cycle evaluations)\n",
                spec.param.c_str(), d15(res.parameter).c_str(), d15(res.lo).c_str(),
                d15(res.hi).c_str(), d15(res.threshold).c_str(), res.evaluations);
    std::printf("  at %s: %s, amplitude (%s, %s), period %s\n", d15(lo).c_str(),
                status_name(res.stat_lo), d15(res.stat_lo.amplitude[0]).c_str(),
                d15(res.stat_lo.amplitude[1]).c_str(), d15(res.stat_lo.period).c_str());
    std::printf("  at %s: %s, amplitude (%s, %s), period %s\n", d15(hi).c_str(),
                status_name(res.stat_hi), d15(res.stat_hi.amplitude[0]).c_str(),
                d15(res.stat_hi.amplitude[1]).c_str(), d15(res.stat_hi.period).c_str());
  }
  return 0;
}

int cmd_cycle(const std::string& model_path, double param, double sample_dt, Format fmt) {
  ModelFile model = ModelFile::parse_file(model_path);
  ModelSpec spec = model.ode_model();
  CycleOptions copt = model.cycle_options();
  CycleStats s = find_limit_cycle(spec, param, model.seed_state, copt);

  if (fmt == Format::csv) {
    // trajectory export over one measured loop
    if (s.status == CycleStats::Status::fixed_point)
      fail(errc::no_cancellation, "trajectory export: the orbit ends at a fixed point");
    PlanarField f = compile_field(spec, param);
    double dt = sample_dt > 0 ? sample_dt : s.period / 1000;
    Trajectory tr = integrate_path(f, s.loop_start, 0.0, s.period, dt, IntegrateOptions{});
    std::cout << "t," << spec.var0 << "," << spec.var1 << kCrlf;
    for (size_t i = 0; i < tr.t.size(); ++i)
      std::cout << d15(tr.t[i]) << "," << d15(tr.y[i][0]) << "," << d15(tr.y[i][1]) << kCrlf;
    return 0;
  }
  if (fmt == Format::json_) {
    json j = stats_json(s);
    j["model"] = model.name;
    j["command"] = "cycle";
    j["parameter"] = param;
    std::cout << j.dump(2) << "\n";
  } else {
    std::printf("model %s at %s = %s: %s\n", model.name.c_str(), spec.param.c_str(),
                d15(param).c_str(), status_name(s));
    if (s.status == CycleStats::Status::fixed_point) {
      std::printf("  fixed point (%s, %s)\n", d15(s.fixed_point[0]).c_str(),
                  d15(s.fixed_point[1]).c_str());
    } else {
      std::printf("  amplitude (%s, %s), period %s, returns %d\n",
                  d15(s.amplitude[0]).c_str(), d15(s.amplitude[1]).c_str(),
                  d15(s.period).c_str(), s.returns_used);
    }
  }
  return s.status == CycleStats::Status::not_converged ? 4 : 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"canard: locate canard points of planar systems by singularity-canceling "
               "iteration, series expansion, and numeric continuation"};
  app.require_subcommand(1);

  std::string model_path, format = "table";

  auto* it = app.add_subcommand("iterate", "run the canard-point iteration");
  int it_k = 0, it_panels = 4096;
  std::string it_mode = "exact";
  std::size_t it_budget = 100000;
  it->add_option("model", model_path, "model file")->required();
  it->add_option("--k", it_k, "number of iterations (default: model k_max)");
  it->add_option("--mode", it_mode, "exact|numeric")->check(CLI::IsMember({"exact", "numeric"}));
  it->add_option("--format", format, "table|csv|json")
      ->check(CLI::IsMember({"table", "csv", "json"}));
  it->add_option("--budget", it_budget, "expression-size budget");
  it->add_option("--panels", it_panels, "sign-scan panels for numeric root search");

  auto* ex = app.add_subcommand("expand", "canard-point series expansion");
  int ex_order = -1, ex_k = 0;
  std::string ex_method = "classical";
  ex->add_option("model", model_path, "model file")->required();
  ex->add_option("--order", ex_order, "series order (default: model series_order)");
  ex->add_option("--method", ex_method, "classical|iterative")
      ->check(CLI::IsMember({"classical", "iterative"}));
  ex->add_option("--k", ex_k, "iterate count for --method iterative");
  ex->add_option("--format", format, "table|csv|json")
      ->check(CLI::IsMember({"table", "csv", "json"}));

  auto* xp = app.add_subcommand("explode", "locate the canard explosion numerically");
  std::vector<double> xp_interval;
  double xp_tol = 0, xp_threshold = 0;
  int xp_sweep = 0;
  xp->add_option("model", model_path, "model file")->required();
  xp->add_option("--interval", xp_interval, "parameter interval lo hi")->expected(2);
  xp->add_option("--tol", xp_tol, "parameter tolerance");
  xp->add_option("--threshold", xp_threshold, "amplitude classifier threshold");
  xp->add_option("--sweep", xp_sweep, "emit an n-point amplitude sweep instead of bisecting");
  xp->add_option("--format", format, "table|csv|json")
      ->check(CLI::IsMember({"table", "csv", "json"}));

  auto* cy = app.add_subcommand("cycle", "measure one limit cycle (csv: trajectory export)");
  double cy_param = 0, cy_dt = 0;
  cy->add_option("model", model_path, "model file")->required();
  cy->add_option("--param", cy_param, "parameter value")->required();
  cy->add_option("--sample-dt", cy_dt, "trajectory sample spacing (csv format)");
  cy->add_option("--format", format, "table|csv|json")
      ->check(CLI::IsMember({"table", "csv", "json"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    Format fmt = parse_format(format);
    if (it->parsed()) return cmd_iterate(model_path, it_k, it_mode, fmt, it_budget, it_panels);
    if (ex->parsed()) return cmd_expand(model_path, ex_order, ex_method, ex_k, fmt);
    if (xp->parsed()) return cmd_explode(model_path, xp_interval, xp_tol, xp_sweep,
                                         xp_threshold, fmt);
    if (cy->parsed()) return cmd_cycle(model_path, cy_param, cy_dt, fmt);
  } catch (const error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_code_for(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
  return 0;
}
