#include "canard/limit_cycle.hpp"

#include <cmath>

namespace canard {

PlanarField compile_field(const ModelSpec& model, double param_value) {
  std::map<std::string, Expr> bind{
      {model.param, Expr::constant(Rational::from_double(param_value))}};
  return PlanarField(substitute(model.rhs0, bind), substitute(model.rhs1, bind), model.var0,
                     model.var1);
}

namespace {

double state_diff(const State2& a, const State2& b) {
  double d = 0;
  for (int i = 0; i < 2; ++i)
    d = std::max(d, std::fabs(a[i] - b[i]) / (1.0 + std::max(std::fabs(a[i]), std::fabs(b[i]))));
  return d;
}

struct Extrema {
  State2 lo{1e300, 1e300}, hi{-1e300, -1e300};
  void feed(const State2& y) {
    for (int i = 0; i < 2; ++i) {
      lo[i] = std::min(lo[i], y[i]);
      hi[i] = std::max(hi[i], y[i]);
    }
  }
  State2 amplitude() const { return {hi[0] - lo[0], hi[1] - lo[1]}; }
};

constexpr int kSegmentSamples = 6;

}  // namespace

CycleStats find_limit_cycle(const ModelSpec& model, double param_value, State2 seed,
                            const CycleOptions& opts) {
  PlanarField f = compile_field(model, param_value);
  IntegrateOptions iopts;
  iopts.rtol = opts.rtol;
  iopts.atol = opts.atol;

  CycleStats stats;
  stats.section_var = opts.section_var;

  State2 y = seed;
  integrate_adaptive(f, y, 0.0, opts.transient, iopts);

  auto near_fixed_point = [&](const State2& s) {
    State2 d;
    f(s, d);
    double scale = 1.0 + std::max(std::fabs(s[0]), std::fabs(s[1]));
    return std::max(std::fabs(d[0]), std::fabs(d[1])) <= 1e-9 * scale;
  };
  if (near_fixed_point(y)) {
    stats.status = CycleStats::Status::fixed_point;
    stats.fixed_point = y;
    return stats;
  }

  // calibrate the section at the mid-level of the chosen coordinate
  const int sv = opts.section_var;
  double smin = y[sv], smax = y[sv];
  integrate_adaptive(f, y, opts.transient, opts.transient + opts.window, iopts,
                     [&](const DenseSegment& seg) {
                       for (int i = 1; i <= kSegmentSamples; ++i) {
                         State2 p = seg.eval(seg.t0 + (seg.t1 - seg.t0) * i / kSegmentSamples);
                         smin = std::min(smin, p[sv]);
                         smax = std::max(smax, p[sv]);
                       }
                       return true;
                     });
  if (smax - smin <= 1e-9 * (1.0 + std::fabs(smax))) {
    stats.status = CycleStats::Status::fixed_point;
    stats.fixed_point = y;
    return stats;
  }
  const double section = 0.5 * (smin + smax);
  stats.section_value = section;

  // collect upward section returns until two consecutive return states agree
  double t_end = opts.t_max > 0 ? opts.t_max : opts.transient * 10 + 2000;
  double t_here = opts.transient + opts.window;

  bool have_prev = false;
  double prev_t = 0;
  State2 prev_state{};
  Extrema loop_extrema;
  int returns = 0;
  bool done = false;

  integrate_adaptive(f, y, t_here, std::max(t_end, t_here + 1.0), iopts,
                     [&](const DenseSegment& seg) {
                       State2 p0 = seg.eval(seg.t0);
                       loop_extrema.feed(p0);
                       for (int i = 1; i <= kSegmentSamples; ++i)
                         loop_extrema.feed(
                             seg.eval(seg.t0 + (seg.t1 - seg.t0) * i / kSegmentSamples));

                       State2 p1 = seg.eval(seg.t1);
                       double g0 = p0[sv] - section, g1 = p1[sv] - section;
                       if (!(g0 < 0.0 && g1 >= 0.0)) return true;

                       // refine the crossing on the dense output
                       double a = seg.t0, b = seg.t1;
                       for (int it = 0; it < 80 && (b - a) > 1e-14 * (1 + std::fabs(b)); ++it) {
                         double m = 0.5 * (a + b);
                         if (seg.eval(m)[sv] - section < 0.0)
                           a = m;
                         else
                           b = m;
                       }
                       double tc = 0.5 * (a + b);
                       State2 sc = seg.eval(tc);

                       if (have_prev) {
                         ++returns;
                         stats.returns_used = returns;
                         stats.period = tc - prev_t;
                         stats.amplitude = loop_extrema.amplitude();
                         stats.loop_start = sc;
                         if (state_diff(sc, prev_state) <= opts.match_rtol) {
                           stats.status = CycleStats::Status::converged;
                           done = true;
                           return false;
                         }
                         if (returns >= opts.max_returns) {
                           stats.status = CycleStats::Status::not_converged;
                           done = true;
                           return false;
                         }
                       }
                       have_prev = true;
                       prev_t = tc;
                       prev_state = sc;
                       loop_extrema = Extrema{};
                       loop_extrema.feed(sc);
                       return true;
                     });

  if (!done) {
    if (!have_prev || returns == 0) {
      // no (second) section return: either a fixed point or a timeout
      if (near_fixed_point(y)) {
        stats.status = CycleStats::Status::fixed_point;
        stats.fixed_point = y;
      } else {
        stats.status = CycleStats::Status::not_converged;
      }
    } else {
      stats.status = CycleStats::Status::not_converged;
    }
  }
  return stats;
}

namespace {

double classifier_amplitude(const CycleStats& s) {
  if (s.status == CycleStats::Status::fixed_point) return 0.0;
  return s.amplitude[s.section_var];
}

}  // namespace

ExplosionResult explosion_bisect(const ModelSpec& model, double lo, double hi, double param_tol,
                                 State2 seed, const CycleOptions& opts,
                                 std::optional<double> threshold) {
  if (!(hi > lo)) fail(errc::internal, "empty parameter interval");
  ExplosionResult res;
  res.stat_lo = find_limit_cycle(model, lo, seed, opts);
  res.stat_hi = find_limit_cycle(model, hi, seed, opts);
  res.evaluations = 2;

  double a_lo = classifier_amplitude(res.stat_lo);
  double a_hi = classifier_amplitude(res.stat_hi);
  if (threshold) {
    res.threshold = *threshold;
  } else {
    // the default mid-gap threshold only makes sense when the endpoints
    // exhibit the small-versus-large amplitude gap of an explosion
    double big = std::max(a_lo, a_hi), small = std::min(a_lo, a_hi);
    if (big <= 0.0 || (small > 0.0 && big / small < 4.0))
      fail(errc::same_class_at_endpoints,
           "endpoint amplitudes " + std::to_string(a_lo) + " and " + std::to_string(a_hi) +
               " show no explosion gap");
    res.threshold = small > 0 ? std::sqrt(a_lo * a_hi) : big / 2;
  }
  if (res.threshold <= 0.0)
    fail(errc::same_class_at_endpoints, "no cycle at either endpoint");

  bool big_lo = a_lo > res.threshold;
  bool big_hi = a_hi > res.threshold;
  if (big_lo == big_hi)
    fail(errc::same_class_at_endpoints,
         "amplitudes " + std::to_string(a_lo) + " and " + std::to_string(a_hi) +
             " fall on the same side of the threshold");

  double xl = lo, xh = hi;
  while (xh - xl > param_tol) {
    double mid = 0.5 * (xl + xh);
    CycleStats sm = find_limit_cycle(model, mid, seed, opts);
    ++res.evaluations;
    bool big_mid = classifier_amplitude(sm) > res.threshold;
    if (big_mid == big_lo)
      xl = mid;
    else
      xh = mid;
  }
  res.lo = xl;
  res.hi = xh;
  res.parameter = 0.5 * (xl + xh);
  return res;
}

std::vector<SweepPoint> amplitude_sweep(const ModelSpec& model, double lo, double hi, int points,
                                        State2 seed, const CycleOptions& opts) {
  if (points < 2) fail(errc::internal, "sweep needs at least two points");
  std::vector<SweepPoint> out;
  out.reserve(points);
  for (int i = 0; i < points; ++i) {
    double p = lo + (hi - lo) * i / (points - 1);
    out.push_back({p, find_limit_cycle(model, p, seed, opts)});
  }
  return out;
}

}  // namespace canard
