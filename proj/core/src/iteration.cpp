#include "canard/iteration.hpp"

#include <algorithm>
#include <cmath>

#include "canard/real_roots.hpp"

namespace canard {

namespace {

bool has_sqrt(const Expr& e) {
  if (e.kind() == ExprKind::sqrt_) return true;
  for (const Expr& k : e.children())
    if (has_sqrt(k)) return true;
  return false;
}

std::size_t rep_size(const CanardIterate& it) {
  if (it.rep_exact)
    return it.rep_exact->num().coeffs().size() + it.rep_exact->den().coeffs().size();
  if (it.rep_numeric)
    return it.rep_numeric->num().coeffs().size() + it.rep_numeric->den().coeffs().size();
  if (it.rep_symbolic) return it.rep_symbolic->node_count();
  return 0;
}

double coeff_scale(const PolyD& p) {
  double s = 0.0;
  for (double c : p.coeffs()) s = std::max(s, std::fabs(c));
  return std::max(s, 1e-300);
}

}  // namespace

Expr isocline_seed(const Expr& F, const SystemNames& names, SolveBranch branch) {
  Expr y0 = solve_branch_for(F, names.dep, branch);
  std::set<std::string> fv = free_variables(y0);
  fv.erase(names.indep);
  if (fv.count(names.param))
    fail(errc::seed_depends_on_parameter,
         "isocline seed depends on the bifurcation parameter '" + names.param + "'");
  if (!fv.empty())
    fail(errc::seed_depends_on_parameter,
         "isocline seed depends on '" + *fv.begin() + "'");
  return y0;
}

IterationMap solve_for_dependent(const Expr& F, const Expr& G, const SystemNames& names,
                                 SolveBranch branch, const Rational& bracket_lo,
                                 const Rational& bracket_hi) {
  SystemNames n = names;
  if (n.slope.empty()) n.slope = "p";
  std::set<std::string> used = free_variables(F);
  for (const std::string& v : free_variables(G)) used.insert(v);
  used.insert(n.indep);
  used.insert(n.dep);
  used.insert(n.param);
  if (!n.eps.empty()) used.insert(n.eps);
  while (used.count(n.slope)) n.slope += "_";

  Expr E = F * Expr::variable(n.slope) - G;
  Expr phi = solve_branch_for(E, n.dep, branch);
  std::set<std::string> allowed{n.indep, n.slope, n.param};
  if (!n.eps.empty()) allowed.insert(n.eps);
  for (const std::string& v : free_variables(phi))
    if (!allowed.count(v))
      fail(errc::internal, "iteration map references unexpected symbol '" + v + "'");

  IterationMap map;
  map.names = n;
  map.phi = phi;
  map.seed = isocline_seed(F, n, branch);
  map.bracket_lo = bracket_lo;
  map.bracket_hi = bracket_hi;
  return map;
}

CanardIterate seed_iterate(const IterationMap& map, IterationMode mode) {
  CanardIterate it;
  it.k = 0;
  it.resolved = true;
  if (has_sqrt(map.seed) || has_sqrt(map.phi)) {
    it.rep_symbolic = map.seed;
  } else if (mode == IterationMode::exact) {
    it.rep_exact = to_ratfunc(map.seed, map.names.indep);
  } else {
    it.rep_numeric = to_double(to_ratfunc(map.seed, map.names.indep));
  }
  it.expression_size = rep_size(it);
  return it;
}

namespace {

struct StepContext {
  const IterationMap& map;
  const StepOptions& opts;
};

std::vector<CanardIterate> step_symbolic(const StepContext& ctx, const CanardIterate& prev);

CanardIterate unresolved_candidate(int k, std::string reason) {
  CanardIterate it;
  it.k = k;
  it.resolved = false;
  it.diagnostics.push_back(std::move(reason));
  return it;
}

// ---------------------------------------------------------------- exact path

std::vector<CanardIterate> step_exact(const StepContext& ctx, const CanardIterate& prev) {
  const IterationMap& map = ctx.map;
  const RatFuncQ& prevf = *prev.rep_exact;
  RatFuncQ dp = prevf.derivative();

  RatFuncQ yt[3];
  try {
    for (long t = 0; t < 3; ++t) {
      std::map<std::string, RatFuncQ> bind{
          {map.names.indep, RatFuncQ::x()},
          {map.names.slope, dp},
          {map.names.param, RatFuncQ::from_rational(Rational(t))}};
      yt[t] = eval_ratfunc(map.phi, bind);
    }
  } catch (const error& err) {
    if (err.code() == errc::not_rational) {
      CanardIterate sym = prev;
      sym.rep_exact.reset();
      sym.rep_symbolic = to_expr(prevf, map.names.indep);
      return step_symbolic(ctx, sym);
    }
    throw;
  }
  if (yt[2] != yt[1] + yt[1] - yt[0]) {
    // nonlinear in the parameter: fall back to the symbolic path and its
    // secant solve
    CanardIterate sym = prev;
    sym.rep_exact.reset();
    sym.rep_symbolic = to_expr(prevf, map.names.indep);
    auto out = step_symbolic(ctx, sym);
    for (auto& c : out) c.diagnostics.push_back("nonlinear parameter dependence");
    return out;
  }

  PolyQ D = lcm(lcm(yt[0].den(), yt[1].den()), yt[2].den());
  PolyQ N0 = yt[0].num() * exact_divide(D, yt[0].den());
  PolyQ N1 = yt[1].num() * exact_divide(D, yt[1].den());
  PolyQ dN = N1 - N0;

  auto roots = real_roots(D, map.bracket_lo, map.bracket_hi);
  std::vector<CanardIterate> out;
  if (roots.empty()) {
    CanardIterate it = unresolved_candidate(prev.k + 1, "NoSingularityInBracket");
    it.rep_exact = yt[0];  // parameter-free when dN == 0; informational otherwise
    it.den_exact = D;
    it.expression_size = rep_size(it);
    out.push_back(std::move(it));
    return out;
  }

  PolyD n0d = to_double(N0), dnd = to_double(dN), Dd = to_double(D);
  for (const RealRoot& rr : roots) {
    CanardIterate it;
    it.k = prev.k + 1;
    it.den_exact = D;
    it.root = rr.mid;
    it.root_halfwidth = rr.exact ? 0.0 : (rr.hi - rr.lo).to_double() / 2;
    it.root_is_exact = rr.exact;
    if (rr.exact) it.root_exact = rr.value;
    if (rr.multiplicity > 1)
      it.diagnostics.push_back("denominator root of multiplicity " +
                               std::to_string(rr.multiplicity));

    if (rr.exact) {
      Rational A = N0(rr.value), B = dN(rr.value);
      if (B.is_zero()) {
        it.diagnostics.push_back(A.is_zero()
                                     ? "numerator vanishes for every parameter value"
                                     : "no parameter value cancels this root");
        out.push_back(std::move(it));
        continue;
      }
      Rational cstar = -A / B;
      PolyQ N = N0 + cstar * dN;
      RatFuncQ next(N, D);
      if (next.den()(rr.value).is_zero()) {
        it.diagnostics.push_back("pole at the root survives the cancellation");
        out.push_back(std::move(it));
        continue;
      }
      it.resolved = true;
      it.c_is_exact = true;
      it.c_exact = cstar;
      it.c_value = cstar.to_double();
      it.rep_exact = next;
    } else {
      double mid = rr.mid;
      double A = n0d(mid), B = dnd(mid);
      if (std::fabs(B) <= 1e-12 * coeff_scale(dnd)) {
        it.diagnostics.push_back(std::fabs(A) <= 1e-12 * coeff_scale(n0d)
                                     ? "numerator vanishes for every parameter value"
                                     : "no parameter value cancels this root");
        out.push_back(std::move(it));
        continue;
      }
      double cstar = -A / B;
      auto cfun = [&](double x) { return -n0d(x) / dnd(x); };
      double h = 1e-7 * std::max(1.0, std::fabs(mid));
      double slope = (cfun(mid + h) - cfun(mid - h)) / (2 * h);
      it.c_value = cstar;
      it.c_error_bound = std::fabs(slope) * it.root_halfwidth + 1e-13 * (1 + std::fabs(cstar));

      PolyD Nd = n0d + cstar * dnd;
      try {
        NumericDeflation dn_num = deflate_root(Nd, mid, 1e-6);
        NumericDeflation dn_den = deflate_root(Dd, mid, 1e-6);
        it.certificate_residual = std::max(dn_num.residual, dn_den.residual);
        it.rep_numeric = RatFuncD(dn_num.quotient, dn_den.quotient);
        it.resolved = true;
        it.diagnostics.push_back("continuation switches to numeric coefficients");
      } catch (const error& err) {
        it.diagnostics.push_back(std::string("deflation failed: ") + err.what());
      }
    }
    it.expression_size = rep_size(it);
    out.push_back(std::move(it));
  }
  return out;
}

// -------------------------------------------------------------- numeric path

std::vector<CanardIterate> step_numeric(const StepContext& ctx, const CanardIterate& prev) {
  const IterationMap& map = ctx.map;
  const RatFuncD& prevf = *prev.rep_numeric;
  RatFuncD dp = prevf.derivative();

  RatFuncD yt[3];
  for (long t = 0; t < 3; ++t) {
    std::map<std::string, RatFuncD> bind{
        {map.names.indep, RatFuncD::x()},
        {map.names.slope, dp},
        {map.names.param, RatFuncD(static_cast<double>(t))}};
    yt[t] = eval_ratfunc(map.phi, bind);
  }
  // identical denominators across probes (the parameter enters numerators)
  for (int t = 1; t < 3; ++t) {
    PolyD diff = yt[t].den() - yt[0].den();
    if (coeff_scale(diff) > 1e-9 * coeff_scale(yt[0].den()) && !diff.is_zero())
      fail(errc::nonlinear_unknown,
           "denominator depends on the parameter; cancellation scheme does not apply");
  }
  PolyD D = yt[0].den();
  PolyD N0 = yt[0].num();
  PolyD dN = yt[1].num() - N0;
  {
    PolyD aff = yt[2].num() - (N0 + dN + dN);
    double scale = std::max(coeff_scale(N0), coeff_scale(dN));
    if (coeff_scale(aff) > 1e-8 * scale && !aff.is_zero())
      fail(errc::nonlinear_unknown, "iterate is not affine in the parameter");
  }

  auto roots = scan_roots(D, map.bracket_lo.to_double(), map.bracket_hi.to_double(),
                          ctx.opts.scan_panels, ctx.opts.root_tol);
  std::vector<CanardIterate> out;
  if (roots.empty()) {
    CanardIterate it = unresolved_candidate(prev.k + 1, "NoSingularityInBracket");
    it.rep_numeric = yt[0];
    it.den_numeric = D;
    it.expression_size = rep_size(it);
    out.push_back(std::move(it));
    return out;
  }

  for (double rho : roots) {
    CanardIterate it;
    it.k = prev.k + 1;
    it.den_numeric = D;
    it.root = rho;
    it.root_halfwidth = ctx.opts.root_tol;

    double A = N0(rho), B = dN(rho);
    double sN = coeff_scale(N0), sD = coeff_scale(dN);
    if (std::fabs(A) <= 1e-9 * sN && std::fabs(B) <= 1e-9 * sD) {
      it.diagnostics.push_back("removable point (numerator vanishes with the denominator)");
      out.push_back(std::move(it));
      continue;
    }
    if (std::fabs(B) <= 1e-12 * sD) {
      it.diagnostics.push_back("no parameter value cancels this root");
      out.push_back(std::move(it));
      continue;
    }
    double cstar = -A / B;
    auto cfun = [&](double x) { return -N0(x) / dN(x); };
    double h = 1e-7 * std::max(1.0, std::fabs(rho));
    double slope = (cfun(rho + h) - cfun(rho - h)) / (2 * h);
    it.c_value = cstar;
    it.c_error_bound = std::fabs(slope) * ctx.opts.root_tol + 1e-13 * (1 + std::fabs(cstar));

    PolyD Nd = N0 + cstar * dN;
    try {
      NumericDeflation dn_num = deflate_root(Nd, rho, 1e-6);
      NumericDeflation dn_den = deflate_root(D, rho, 1e-6);
      it.certificate_residual = std::max(dn_num.residual, dn_den.residual);
      it.rep_numeric = RatFuncD(dn_num.quotient, dn_den.quotient);
      it.resolved = true;
    } catch (const error& err) {
      it.diagnostics.push_back(std::string("deflation failed: ") + err.what());
    }
    it.expression_size = rep_size(it);
    out.push_back(std::move(it));
  }
  return out;
}

// ------------------------------------------------------------- symbolic path

std::vector<CanardIterate> step_symbolic(const StepContext& ctx, const CanardIterate& prev) {
  const IterationMap& map = ctx.map;
  const Expr& prev_expr = *prev.rep_symbolic;
  Expr p_expr = differentiate(prev_expr, map.names.indep);
  Expr y_sym = substitute(map.phi, {{map.names.slope, p_expr}});

  // y = scale * sqrt(u): singularities and cancellation live in the radicand
  bool pure_sqrt = false;
  Expr analysis_target = y_sym;
  if (y_sym.kind() == ExprKind::sqrt_) {
    pure_sqrt = true;
    analysis_target = y_sym.children()[0];
  } else if (y_sym.kind() == ExprKind::product && y_sym.children().size() == 2 &&
             y_sym.children()[0].is_constant() &&
             y_sym.children()[1].kind() == ExprKind::sqrt_) {
    pure_sqrt = true;
    analysis_target = y_sym.children()[1].children()[0];
  }

  QuotientForm qf = quotient_normal_form(analysis_target);
  if (free_variables(qf.denominator).count(map.names.param))
    fail(errc::no_cancellation,
         "denominator depends on the parameter; per-root cancellation does not apply");

  const std::string& x = map.names.indep;
  const std::string& c = map.names.param;
  auto den_at = [&](double v) -> double {
    return eval_numeric(qf.denominator, {{x, v}});
  };

  // sign-change scan with bisection refinement; panels where evaluation
  // fails (e.g. negative radicand) are skipped
  std::vector<double> roots;
  {
    double lo = map.bracket_lo.to_double(), hi = map.bracket_hi.to_double();
    int n = ctx.opts.scan_panels;
    bool have_prev = false;
    double px = 0, pf = 0;
    for (int i = 0; i <= n; ++i) {
      double v = lo + (hi - lo) * i / n;
      double fv;
      try {
        fv = den_at(v);
      } catch (const error&) {
        have_prev = false;
        continue;
      }
      if (!std::isfinite(fv)) {
        have_prev = false;
        continue;
      }
      if (have_prev && fv != 0.0 && pf != 0.0 && std::signbit(fv) != std::signbit(pf)) {
        double a = px, b = v, fa = pf;
        for (int iter = 0; iter < 200 && (b - a) > ctx.opts.root_tol; ++iter) {
          double m = 0.5 * (a + b);
          double fm;
          try {
            fm = den_at(m);
          } catch (const error&) {
            break;
          }
          if (fm == 0.0) {
            a = b = m;
            break;
          }
          if (std::signbit(fm) == std::signbit(fa)) {
            a = m;
            fa = fm;
          } else {
            b = m;
          }
        }
        roots.push_back(0.5 * (a + b));
      } else if (have_prev && pf == 0.0) {
        roots.push_back(px);
      }
      px = v;
      pf = fv;
      have_prev = true;
    }
  }

  std::vector<CanardIterate> out;
  if (roots.empty()) {
    CanardIterate it = unresolved_candidate(prev.k + 1, "NoSingularityInBracket");
    it.rep_symbolic = y_sym;
    it.den_symbolic = qf.denominator;
    it.expression_size = rep_size(it);
    out.push_back(std::move(it));
    return out;
  }

  for (double rho : roots) {
    CanardIterate it;
    it.k = prev.k + 1;
    it.den_symbolic = qf.denominator;
    it.root = rho;
    it.root_halfwidth = ctx.opts.root_tol;

    auto nfun = [&](double cv) -> double {
      return eval_numeric(qf.numerator, {{x, rho}, {c, cv}});
    };
    double n0, n1, n2;
    try {
      n0 = nfun(0.0);
      n1 = nfun(1.0);
      n2 = nfun(2.0);
    } catch (const error& err) {
      it.diagnostics.push_back(std::string("numerator evaluation failed: ") + err.what());
      out.push_back(std::move(it));
      continue;
    }
    double scale = std::max({std::fabs(n0), std::fabs(n1), std::fabs(n2), 1e-300});
    double cstar = 0;
    bool solved = false;
    if (std::fabs(n2 - 2 * n1 + n0) <= 1e-6 * scale) {
      double B = n1 - n0;
      if (std::fabs(B) <= 1e-10 * scale) {
        it.diagnostics.push_back(std::fabs(n0) <= 1e-10 * scale
                                     ? "removable point (numerator vanishes with the denominator)"
                                     : "no parameter value cancels this root");
        out.push_back(std::move(it));
        continue;
      }
      cstar = -n0 / B;
      solved = true;
    } else {
      // secant fallback for nonlinear parameter dependence
      double ca = 0.0, cb = 1.0, fa = n0, fb = n1;
      for (int iter = 0; iter < 100; ++iter) {
        if (fb == fa) break;
        double cn = cb - fb * (cb - ca) / (fb - fa);
        if (!std::isfinite(cn)) break;
        double fn;
        try {
          fn = nfun(cn);
        } catch (const error&) {
          break;
        }
        ca = cb;
        fa = fb;
        cb = cn;
        fb = fn;
        if (std::fabs(fn) <= 1e-12 * scale) {
          cstar = cn;
          solved = true;
          it.diagnostics.push_back("parameter resolved by secant iteration");
          break;
        }
      }
      if (!solved) {
        it.diagnostics.push_back("nonlinear parameter solve did not converge");
        out.push_back(std::move(it));
        continue;
      }
    }

    it.c_value = cstar;
    {
      // error bound: sensitivity of the solved parameter to the root location
      auto cfun = [&](double xv) -> double {
        double a = eval_numeric(qf.numerator, {{x, xv}, {c, 0.0}});
        double b = eval_numeric(qf.numerator, {{x, xv}, {c, 1.0}});
        return -a / (b - a);
      };
      double h = 1e-6 * std::max(1.0, std::fabs(rho));
      try {
        double slope = (cfun(rho + h) - cfun(rho - h)) / (2 * h);
        it.c_error_bound =
            std::fabs(slope) * ctx.opts.root_tol + 1e-12 * (1 + std::fabs(cstar));
      } catch (const error&) {
        it.c_error_bound = 1e-9;
      }
    }
    it.certificate_residual = std::fabs(nfun(cstar)) / scale;

    if (pure_sqrt) {
      // radicand sign on both approach sides after the cancellation
      for (double dx : {1e-4, 1e-7}) {
        for (double side : {-1.0, 1.0}) {
          double v = rho + side * dx;
          try {
            double nval = eval_numeric(qf.numerator, {{x, v}, {c, cstar}});
            double dval = eval_numeric(qf.denominator, {{x, v}});
            if (dval != 0.0 && nval / dval < 0.0) {
              it.diagnostics.push_back("radicand negative on one approach side of x*");
              dx = 1;  // stop flagging repeatedly
              break;
            }
          } catch (const error&) {
          }
        }
      }
    }

    it.resolved = true;
    it.rep_symbolic =
        substitute(y_sym, {{c, Expr::constant(Rational::from_double(cstar))}});
    it.expression_size = rep_size(it);
    out.push_back(std::move(it));
  }
  return out;
}

}  // namespace

std::vector<CanardIterate> step(const IterationMap& map, const CanardIterate& prev,
                                const StepOptions& opts) {
  StepContext ctx{map, opts};
  if (prev.rep_symbolic) return step_symbolic(ctx, prev);
  if (prev.rep_exact) return step_exact(ctx, prev);
  if (prev.rep_numeric) return step_numeric(ctx, prev);
  fail(errc::internal, "iterate carries no representation");
}

RunResult run_iteration(const IterationMap& map, int k_max, const StepOptions& opts) {
  if (k_max < 1) fail(errc::internal, "k_max must be >= 1");
  RunResult out;
  CanardIterate cur = seed_iterate(map, opts.mode);
  for (int k = 1; k <= k_max; ++k) {
    std::vector<CanardIterate> cands = step(map, cur, opts);
    out.steps.push_back(cands);
    std::vector<const CanardIterate*> resolved;
    for (const CanardIterate& c : cands)
      if (c.resolved) resolved.push_back(&c);
    if (k == k_max) break;
    if (resolved.empty()) {
      out.stop_reason = "no resolvable singularity in the bracket";
      break;
    }
    if (resolved.size() > 1) {
      out.stop_reason = "multiple canard candidates; continuation is ambiguous";
      break;
    }
    if (resolved[0]->expression_size > opts.node_budget) {
      out.stop_reason = "ExpressionBudgetExceeded: last good iterate is step " +
                        std::to_string(k);
      break;
    }
    cur = *resolved[0];
  }
  return out;
}

std::string CanardIterate::render(const std::string& var) const {
  if (rep_exact) return ratfunc_to_string(*rep_exact, var);
  if (rep_numeric) return ratfunc_to_string(*rep_numeric, var);
  if (rep_symbolic) return rep_symbolic->to_string();
  return "<none>";
}

}  // namespace canard
