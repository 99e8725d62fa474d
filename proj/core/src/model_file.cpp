#include "canard/model_file.hpp"

#include <fstream>
#include <sstream>

#include "canard/parse.hpp"

namespace canard {

namespace {

std::string trim(const std::string& s) {
  size_t a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  size_t b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

std::string unquote(const std::string& s, const std::string& where) {
  if (s.size() >= 2 && s.front() == '"' && s.back() == '"') return s.substr(1, s.size() - 2);
  fail(errc::bad_model_file, where + ": expression values must be double-quoted");
}

double parse_double(const std::string& s, const std::string& where) {
  try {
    size_t used = 0;
    double v = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    fail(errc::bad_model_file, where + ": bad numeric value '" + s + "'");
  }
}

std::pair<double, double> parse_pair(const std::string& s, const std::string& where) {
  std::istringstream is(s);
  std::string a, b, rest;
  is >> a >> b;
  if (a.empty() || b.empty() || (is >> rest))
    fail(errc::bad_model_file, where + ": expected two values");
  return {parse_double(a, where), parse_double(b, where)};
}

}  // namespace

ModelFile ModelFile::parse_text(const std::string& text, const std::string& origin) {
  ModelFile m;
  std::istringstream in(text);
  std::string line, section;
  int lineno = 0;
  bool saw_bracket = false;

  while (std::getline(in, line)) {
    ++lineno;
    std::string where = origin + ":" + std::to_string(lineno);
    auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') fail(errc::bad_model_file, where + ": malformed section header");
      section = line.substr(1, line.size() - 2);
      continue;
    }
    auto eq = line.find('=');
    if (eq == std::string::npos)
      fail(errc::bad_model_file, where + ": expected 'key = value'");
    std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    if (key.empty() || value.empty())
      fail(errc::bad_model_file, where + ": expected 'key = value'");

    if (section.empty()) {
      if (key == "name") {
        m.name = value;
      } else {
        fail(errc::bad_model_file, where + ": unknown top-level key '" + key + "'");
      }
    } else if (section == "variables") {
      if (key == "independent") m.independent = value;
      else if (key == "dependent") m.dependent = value;
      else if (key == "parameter") m.parameter = value;
      else if (key == "epsilon") m.epsilon = value;
      else if (key == "slope") m.slope = value;
      else fail(errc::bad_model_file, where + ": unknown variable role '" + key + "'");
    } else if (section == "constants") {
      try {
        m.constants[key] = Rational::from_string(value);
      } catch (const error& e) {
        fail(errc::bad_model_file, where + ": " + e.what());
      }
    } else if (section == "system") {
      if (key == "F") m.f_text = unquote(value, where);
      else if (key == "G") m.g_text = unquote(value, where);
      else if (key == "phi") m.phi_text = unquote(value, where);
      else if (key == "seed") m.seed_text = unquote(value, where);
      else if (key == "branch") m.branch = parse_branch(value);
      else fail(errc::bad_model_file, where + ": unknown system key '" + key + "'");
    } else if (section == "task") {
      if (key == "fold_bracket") {
        std::istringstream is(value);
        std::string a, b;
        is >> a >> b;
        if (a.empty() || b.empty())
          fail(errc::bad_model_file, where + ": fold_bracket needs two rationals");
        try {
          m.bracket_lo = Rational::from_string(a);
          m.bracket_hi = Rational::from_string(b);
        } catch (const error& e) {
          fail(errc::bad_model_file, where + ": " + e.what());
        }
        saw_bracket = true;
      } else if (key == "k_max") {
        m.k_max = static_cast<int>(parse_double(value, where));
      } else if (key == "series_order") {
        m.series_order = static_cast<int>(parse_double(value, where));
      } else if (key == "explode_interval") {
        std::tie(m.explode_lo, m.explode_hi) = parse_pair(value, where);
      } else if (key == "explode_tol") {
        m.explode_tol = parse_double(value, where);
      } else if (key == "explode_threshold") {
        m.explode_threshold = parse_double(value, where);
      } else if (key == "seed") {
        auto [a, b] = parse_pair(value, where);
        m.seed_state = {a, b};
      } else if (key == "transient") {
        m.transient = parse_double(value, where);
      } else if (key == "window") {
        m.window = parse_double(value, where);
      } else {
        fail(errc::bad_model_file, where + ": unknown task key '" + key + "'");
      }
    } else {
      fail(errc::bad_model_file, where + ": unknown section '" + section + "'");
    }
  }

  // validation
  if (m.independent.empty() || m.dependent.empty() || m.parameter.empty())
    fail(errc::bad_model_file, origin + ": independent, dependent and parameter are required");
  bool has_fg = m.f_text && m.g_text;
  bool has_phi = m.phi_text && m.seed_text;
  if (has_fg == has_phi)
    fail(errc::bad_model_file,
         origin + ": exactly one of {F and G, phi and seed} must be given");
  if (!saw_bracket) fail(errc::bad_model_file, origin + ": fold_bracket is required");
  if (m.bracket_hi < m.bracket_lo)
    fail(errc::bad_model_file, origin + ": fold_bracket is empty");

  // every expression must parse under the declared names
  std::vector<std::string> rhs_vars{m.independent, m.dependent, m.parameter};
  if (!m.epsilon.empty()) rhs_vars.push_back(m.epsilon);
  for (const auto& [k, v] : m.constants) rhs_vars.push_back(k);
  auto check = [&](const std::optional<std::string>& text, const std::vector<std::string>& vars,
                   const std::string& which) {
    if (!text) return;
    try {
      parse_expression(*text, vars);
    } catch (const error& e) {
      fail(errc::bad_model_file, origin + ": in " + which + ": " + e.what());
    }
  };
  check(m.f_text, rhs_vars, "F");
  check(m.g_text, rhs_vars, "G");
  std::vector<std::string> phi_vars = rhs_vars;
  phi_vars.push_back(m.slope);
  check(m.phi_text, phi_vars, "phi");
  check(m.seed_text, rhs_vars, "seed");
  return m;
}

ModelFile ModelFile::parse_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(errc::bad_model_file, "cannot open model file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_text(ss.str(), path);
}

std::string ModelFile::serialize() const {
  std::ostringstream os;
  os << "name = " << name << "\n\n[variables]\n";
  os << "independent = " << independent << "\n";
  os << "dependent = " << dependent << "\n";
  os << "parameter = " << parameter << "\n";
  if (!epsilon.empty()) os << "epsilon = " << epsilon << "\n";
  if (slope != "p") os << "slope = " << slope << "\n";
  os << "\n[constants]\n";
  for (const auto& [k, v] : constants) os << k << " = " << v.to_string() << "\n";
  os << "\n[system]\n";
  if (f_text) os << "F = \"" << *f_text << "\"\n";
  if (g_text) os << "G = \"" << *g_text << "\"\n";
  if (phi_text) os << "phi = \"" << *phi_text << "\"\n";
  if (seed_text) os << "seed = \"" << *seed_text << "\"\n";
  os << "branch = " << branch_name(branch) << "\n";
  os << "\n[task]\n";
  os << "fold_bracket = " << bracket_lo.to_string() << " " << bracket_hi.to_string() << "\n";
  os << "k_max = " << k_max << "\n";
  os << "series_order = " << series_order << "\n";
  char buf[128];
  std::snprintf(buf, sizeof(buf), "explode_interval = %.17g %.17g\n", explode_lo, explode_hi);
  os << buf;
  std::snprintf(buf, sizeof(buf), "explode_tol = %.17g\n", explode_tol);
  os << buf;
  if (explode_threshold) {
    std::snprintf(buf, sizeof(buf), "explode_threshold = %.17g\n", *explode_threshold);
    os << buf;
  }
  std::snprintf(buf, sizeof(buf), "seed = %.17g %.17g\n", seed_state[0], seed_state[1]);
  os << buf;
  std::snprintf(buf, sizeof(buf), "transient = %.17g\n", transient);
  os << buf;
  std::snprintf(buf, sizeof(buf), "window = %.17g\n", window);
  os << buf;
  return os.str();
}

bool ModelFile::operator==(const ModelFile& o) const {
  return name == o.name && independent == o.independent && dependent == o.dependent &&
         parameter == o.parameter && epsilon == o.epsilon && slope == o.slope &&
         constants == o.constants && f_text == o.f_text && g_text == o.g_text &&
         phi_text == o.phi_text && seed_text == o.seed_text && branch == o.branch &&
         bracket_lo == o.bracket_lo && bracket_hi == o.bracket_hi && k_max == o.k_max &&
         series_order == o.series_order && explode_lo == o.explode_lo &&
         explode_hi == o.explode_hi && explode_tol == o.explode_tol &&
         explode_threshold == o.explode_threshold && seed_state == o.seed_state &&
         transient == o.transient && window == o.window;
}

namespace {

std::map<std::string, Expr> constant_bindings(const ModelFile& m, bool include_eps) {
  std::map<std::string, Expr> bind;
  for (const auto& [k, v] : m.constants) bind.emplace(k, Expr::constant(v));
  if (include_eps && !m.epsilon.empty()) {
    auto it = m.constants.find(m.epsilon);
    if (it == m.constants.end())
      fail(errc::bad_model_file,
           "perturbation symbol '" + m.epsilon + "' has no value in [constants]");
  }
  return bind;
}

}  // namespace

IterationMap ModelFile::iteration_map(bool symbolic_eps) const {
  if (symbolic_eps && epsilon.empty())
    fail(errc::bad_model_file, "epsilon not declared in model '" + name + "'");
  std::map<std::string, Expr> bind = constant_bindings(*this, !symbolic_eps);
  if (symbolic_eps) bind.erase(epsilon);

  SystemNames names{independent, dependent, parameter, slope,
                    symbolic_eps ? epsilon : std::string{}};
  std::vector<std::string> all_vars{independent, dependent, parameter, slope};
  if (!epsilon.empty()) all_vars.push_back(epsilon);
  for (const auto& [k, v] : constants) all_vars.push_back(k);

  if (f_text) {
    Expr F = substitute(parse_expression(*f_text, all_vars), bind);
    Expr G = substitute(parse_expression(*g_text, all_vars), bind);
    return solve_for_dependent(F, G, names, branch, bracket_lo, bracket_hi);
  }
  IterationMap map;
  map.names = names;
  map.phi = substitute(parse_expression(*phi_text, all_vars), bind);
  map.seed = substitute(parse_expression(*seed_text, all_vars), bind);
  map.bracket_lo = bracket_lo;
  map.bracket_hi = bracket_hi;
  return map;
}

ModelSpec ModelFile::ode_model() const {
  if (!f_text || !g_text)
    fail(errc::bad_model_file,
         "model '" + name + "' has no (F, G) right-hand sides to integrate");
  std::map<std::string, Expr> bind = constant_bindings(*this, true);
  std::vector<std::string> all_vars{independent, dependent, parameter};
  if (!epsilon.empty()) all_vars.push_back(epsilon);
  for (const auto& [k, v] : constants) all_vars.push_back(k);
  ModelSpec spec;
  spec.var0 = independent;
  spec.var1 = dependent;
  spec.rhs0 = substitute(parse_expression(*f_text, all_vars), bind);
  spec.rhs1 = substitute(parse_expression(*g_text, all_vars), bind);
  spec.param = parameter;
  spec.param_value = 0.5 * (explode_lo + explode_hi);
  return spec;
}

CycleOptions ModelFile::cycle_options() const {
  CycleOptions co;
  co.transient = transient;
  co.window = window;
  return co;
}

Expr ModelFile::slow_fast_f() const {
  if (!f_text) fail(errc::bad_model_file, "model has no F right-hand side");
  std::map<std::string, Expr> bind = constant_bindings(*this, false);
  if (!epsilon.empty()) bind.erase(epsilon);  // the perturbation stays symbolic
  std::vector<std::string> all_vars{independent, dependent, parameter};
  if (!epsilon.empty()) all_vars.push_back(epsilon);
  for (const auto& [k, v] : constants) all_vars.push_back(k);
  return substitute(parse_expression(*f_text, all_vars), bind);
}

Expr ModelFile::slow_fast_g() const {
  if (epsilon.empty())
    fail(errc::bad_model_file, "epsilon not declared in model '" + name + "'");
  if (!g_text) fail(errc::bad_model_file, "model has no G right-hand side");
  std::map<std::string, Expr> bind = constant_bindings(*this, false);
  bind.erase(epsilon);  // the perturbation stays symbolic
  std::vector<std::string> all_vars{independent, dependent, parameter, epsilon};
  for (const auto& [k, v] : constants) all_vars.push_back(k);
  Expr G = substitute(parse_expression(*g_text, all_vars), bind);
  // g = G / eps; for slow-fast models G carries the eps factor explicitly,
  // so the division cancels structurally
  return G / Expr::variable(epsilon);
}

Rational ModelFile::fold_abscissa() const {
  IterationMap map = iteration_map(!epsilon.empty());
  Expr dseed = differentiate(map.seed, independent);
  QuotientForm qf = quotient_normal_form(dseed);
  RatFuncQ slope_rf = to_ratfunc(qf.numerator, independent);
  if (slope_rf.num().degree() < 1)
    fail(errc::no_cancellation, "the isocline has no fold (constant slope)");
  std::vector<Rational> folds;
  for (const RealRoot& r : real_roots(slope_rf.num(), bracket_lo, bracket_hi))
    if (r.exact) folds.push_back(r.value);
  if (folds.size() != 1)
    fail(errc::no_cancellation,
         "expected exactly one exact rational fold abscissa inside the bracket, found " +
             std::to_string(folds.size()));
  return folds[0];
}

}  // namespace canard
