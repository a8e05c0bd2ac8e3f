#pragma once

#include <algorithm>
#include <cmath>
#include <random>
#include <string>
#include <vector>

#include "nfr/engine.hpp"
#include "nfr/grid.hpp"
#include "nfr/trilinear.hpp"

namespace nfr {

inline constexpr double kEta = 0.01;
inline constexpr double kRhsFloor = 1e-300;

struct SampleProfile {
  double s_decay = 0.0;
  std::uint64_t seed = 0;
  double amplitude = 1.0;
  bool hermitian = false;
};

// Complex Gaussian coefficients with envelope <xi>^{-s_decay-1/2-eta}.
inline GridFunction sample(const FrequencyGrid& g, const SampleProfile& p) {
  std::mt19937_64 rng(p.seed);
  std::normal_distribution<double> nd;
  GridFunction f(g);
  for (std::size_t k = 0; k < g.n(); ++k) {
    double re = nd(rng), im = nd(rng);
    f[k] = p.amplitude * cplx(re, im) * std::pow(japanese(g.node(k)), -p.s_decay - 0.5 - kEta);
  }
  if (p.hermitian) {
    f = hermitian_part(f);
    f.set_real_physical(true);
  }
  return f;
}

struct FitResult {
  double slope = 0;
  double intercept = 0;
  double r2 = 0;
  std::vector<std::pair<double, double>> points;  // (log x, log y)
};

// Ordinary least squares on (log x, log y); needs three points with positive y.
inline FitResult fit_loglog(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size()) throw Error(ErrorKind::InvalidArgument, "fit needs paired samples");
  FitResult r;
  for (std::size_t i = 0; i < x.size(); ++i)
    if (x[i] > 0 && y[i] > 0 && std::isfinite(y[i])) r.points.emplace_back(std::log(x[i]), std::log(y[i]));
  if (r.points.size() < 3) throw Error(ErrorKind::FitUndefined, "fewer than 3 usable points");
  double n = static_cast<double>(r.points.size()), sx = 0, sy = 0;
  for (auto [a, b] : r.points) sx += a, sy += b;
  double mx = sx / n, my = sy / n, sxx = 0, sxy = 0, syy = 0;
  for (auto [a, b] : r.points) {
    sxx += (a - mx) * (a - mx);
    sxy += (a - mx) * (b - my);
    syy += (b - my) * (b - my);
  }
  if (sxx == 0) throw Error(ErrorKind::FitUndefined, "all abscissae coincide");
  r.slope = sxy / sxx;
  r.intercept = my - r.slope * mx;
  r.r2 = syy == 0 ? 1.0 : std::clamp(sxy * sxy / (sxx * syy), 0.0, 1.0);
  return r;
}

enum class Lemma { NLS1, NLS2, KdV1, KdV2, NLS3, NLS4, Extra, Mk1, Mk2 };

inline const char* to_string(Lemma l) {
  switch (l) {
    case Lemma::NLS1: return "NLS1";
    case Lemma::NLS2: return "NLS2";
    case Lemma::KdV1: return "KdV1";
    case Lemma::KdV2: return "KdV2";
    case Lemma::NLS3: return "NLS3";
    case Lemma::NLS4: return "NLS4";
    case Lemma::Extra: return "Extra";
    case Lemma::Mk1: return "mk1";
    case Lemma::Mk2: return "mk2";
  }
  return "?";
}

inline Lemma parse_lemma(const std::string& s) {
  for (Lemma l : {Lemma::NLS1, Lemma::NLS2, Lemma::KdV1, Lemma::KdV2, Lemma::NLS3, Lemma::NLS4, Lemma::Extra,
                  Lemma::Mk1, Lemma::Mk2})
    if (s == to_string(l)) return l;
  throw Error(ErrorKind::InvalidArgument, "unsupported lemma '" + s + "'");
}

inline Equation lemma_equation(Lemma l) {
  switch (l) {
    case Lemma::NLS1: case Lemma::NLS2: case Lemma::NLS3: case Lemma::NLS4: return Equation::CubicNLS;
    default: return Equation::MKdV;
  }
}

// Operators whose bound grows like M^{1/2} (plain window) rather than decays (divided shell).
inline bool growth_family(Lemma l) {
  return l == Lemma::NLS1 || l == Lemma::KdV1 || l == Lemma::NLS3 || l == Lemma::Mk1;
}

// Power of M in the lemma's right-hand side, without the eps.
inline double lemma_exponent(Lemma l) {
  if (l == Lemma::Extra) return 0.0;
  return growth_family(l) ? 0.5 : -0.5;
}

inline bool uses_eps(Lemma l) {
  return l == Lemma::NLS1 || l == Lemma::NLS2 || l == Lemma::KdV1 || l == Lemma::KdV2;
}

// Smallest admissible Sobolev index; the mk estimates need s > 1/4 strictly.
inline double lemma_floor(Lemma l) { return lemma_equation(l) == Equation::CubicNLS ? 0.0 : 0.25; }

struct LemmaInputs {
  double M = 1;
  double alpha = 0;
  double s = 0;
  double eps = 0.01;
  double t = 0;
  int slot = 0;  // distinguished slot for the FL-infinity forms
};

inline TrilinearSpec lemma_spec(Lemma l, const LemmaInputs& in) {
  TrilinearSpec s = lemma_equation(l) == Equation::CubicNLS ? TrilinearSpec::nls() : TrilinearSpec::mkdv();
  s.t = in.t;
  if (l == Lemma::Extra) {
    s.weight = WeightKind::SgnQuarter;
    return s;
  }
  if (growth_family(l)) {
    s.window = ModulationWindow::leq(in.M, in.alpha);
  } else {
    s.window = ModulationWindow::shell(in.M, in.alpha);
    s.kernel = KernelKind::CauchyDivided;
  }
  if (l == Lemma::Mk1 || l == Lemma::Mk2) {
    s.weight = WeightKind::QuarterSlot;
    s.weight_slot = in.slot;
  }
  return s;
}

// Left side of the lemma's inequality, i.e. the norm of the operator output.
inline double lemma_lhs(Lemma l, const LemmaInputs& in, const GridFunction& a, const GridFunction& b,
                        const GridFunction& c) {
  auto out = apply(lemma_spec(l, in), a, b, c);
  switch (l) {
    case Lemma::NLS1: case Lemma::NLS2: case Lemma::KdV1: case Lemma::KdV2: return sobolev_norm(out, in.s);
    default: return flinf_norm(out);
  }
}

// Right side without the M power: data norms, <alpha>^eps, and the mk max{|alpha|,M}^{1/12}.
inline double lemma_data_factor(Lemma l, const LemmaInputs& in, const GridFunction& a, const GridFunction& b,
                                const GridFunction& c) {
  const GridFunction* v[3] = {&a, &b, &c};
  double f = 1;
  switch (l) {
    case Lemma::NLS1: case Lemma::NLS2: case Lemma::KdV1: case Lemma::KdV2:
      for (auto* x : v) f *= sobolev_norm(*x, in.s);
      f *= std::pow(japanese(in.alpha), in.eps);
      break;
    case Lemma::NLS3: {
      double best = INFINITY;
      for (int j = 0; j < 3; ++j) {
        double p = flinf_norm(*v[j]);
        for (int k = 0; k < 3; ++k)
          if (k != j) p *= sobolev_norm(*v[k], in.eps);
        best = std::min(best, p);
      }
      f = best;
      break;
    }
    case Lemma::NLS4:
      f = sobolev_norm(a, in.eps) * sobolev_norm(a, in.eps) * flinf_norm(a);
      break;
    case Lemma::Extra:
      for (auto* x : v) f *= sobolev_norm(*x, 0.25);
      break;
    case Lemma::Mk1: case Lemma::Mk2:
      f = flinf_norm(*v[in.slot]);
      for (int k = 0; k < 3; ++k)
        if (k != in.slot) f *= sobolev_norm(*v[k], in.s);
      f *= std::pow(std::max(std::abs(in.alpha), in.M), 1.0 / 12.0);
      break;
  }
  return f;
}

inline double lemma_rhs(Lemma l, const LemmaInputs& in, const GridFunction& a, const GridFunction& b,
                        const GridFunction& c) {
  double e = lemma_exponent(l) + (uses_eps(l) ? in.eps : 0.0);
  return lemma_data_factor(l, in, a, b, c) * std::pow(in.M, e);
}

inline double lemma_ratio(Lemma l, const LemmaInputs& in, const GridFunction& a, const GridFunction& b,
                          const GridFunction& c) {
  return lemma_lhs(l, in, a, b, c) / std::max(lemma_rhs(l, in, a, b, c), kRhsFloor);
}

struct LemmaSweep {
  std::vector<double> M;        // empty: interior_levels of the sweep grid
  std::vector<double> alpha{0};
  bool alpha_tracks_M = false;  // use alpha = M instead of the alpha list
  int trials = 100;
  double s = -1;                // negative: the lemma's floor (plus 0.01 where strict)
  double eps = 0.01;
  double xi_max = 16;
  std::size_t n = 129;
  std::uint64_t seed = 1;
};

struct LemmaRow {
  double M = 0, alpha = 0;
  double sup_ratio = 0;   // sup over trials of LHS / RHS
  double sup_scaled = 0;  // sup over trials of LHS / (RHS without its M power)
  int trials = 0;
};

struct LemmaReport {
  Lemma lemma = Lemma::NLS1;
  double s = 0;
  std::vector<LemmaRow> rows;
  FitResult fit;          // log sup_scaled against log M, alpha = 0 (or tracking)
  double slope_bound = 0;
  bool slope_ok = false;
};

inline double lemma_index(Lemma l, double s_requested) {
  if (s_requested >= 0) return s_requested;
  return (l == Lemma::Mk1 || l == Lemma::Mk2) ? 0.26 : lemma_floor(l);
}

// Dyadic M levels centred (geometrically) between the lattice modulation unit
// and the largest modulation on the grid, so neither the lattice spacing nor
// window saturation dominates the fit.
inline std::vector<double> interior_levels(Equation eq, const FrequencyGrid& g, int levels = 6) {
  if (levels < 1) throw Error(ErrorKind::InvalidArgument, "need at least one level");
  const double m = static_cast<double>(g.n() - 1);
  const double unit = eq == Equation::CubicNLS ? 2 * g.dxi() * g.dxi() : 3 * std::pow(g.dxi(), 3);
  const double top = unit * (eq == Equation::CubicNLS ? m * m : m * m * m);
  const double centre = std::log2(std::sqrt(unit * top));
  int lo = std::max(0, static_cast<int>(std::lround(centre - levels / 2.0)));
  std::vector<double> M;
  for (int k = 0; k < levels; ++k) M.push_back(std::ldexp(1.0, lo + k));
  return M;
}

// Empirical sup over random samples of each lemma's ratio on a sweep of M
// (and alpha), with the log-slope of the M-free ratio at alpha = 0.
inline LemmaReport verify_lemma(Lemma l, const LemmaSweep& sw) {
  if (sw.trials <= 0) throw Error(ErrorKind::InvalidArgument, "trials must be positive");
  FrequencyGrid g(sw.xi_max, sw.n);
  const std::vector<double> Ms = sw.M.empty() ? interior_levels(lemma_equation(l), g) : sw.M;
  for (double M : Ms)
    if (!is_dyadic(M) || M < 1) throw Error(ErrorKind::InvalidArgument, "sweep M must be dyadic and >= 1");
  LemmaReport rep;
  rep.lemma = l;
  rep.s = lemma_index(l, sw.s);
  const bool mkdv = lemma_equation(l) == Equation::MKdV;
  std::vector<std::vector<GridFunction>> data;
  std::vector<double> times;
  std::mt19937_64 trng(sw.seed ^ 0x5bd1e995ULL);
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  for (int i = 0; i < sw.trials; ++i) {
    std::vector<GridFunction> d;
    for (int j = 0; j < 3; ++j) {
      SampleProfile p;
      p.s_decay = rep.s;
      p.seed = sw.seed * 1000003ULL + static_cast<std::uint64_t>(3 * i + j);
      p.hermitian = mkdv;
      d.push_back(sample(g, p));
    }
    data.push_back(std::move(d));
    times.push_back(u01(trng));
  }
  std::vector<double> alphas = sw.alpha_tracks_M ? std::vector<double>{NAN} : sw.alpha;
  for (double a0 : alphas)
    for (double M : Ms) {
      LemmaRow row;
      row.M = M;
      row.alpha = sw.alpha_tracks_M ? M : a0;
      row.trials = sw.trials;
      for (int i = 0; i < sw.trials; ++i) {
        LemmaInputs in{M, row.alpha, rep.s, sw.eps, times[static_cast<std::size_t>(i)], i % 3};
        const auto& d = data[static_cast<std::size_t>(i)];
        const GridFunction& b = l == Lemma::NLS2 || l == Lemma::KdV2 || l == Lemma::NLS4 ? d[0] : d[1];
        const GridFunction& c = l == Lemma::NLS2 || l == Lemma::KdV2 || l == Lemma::NLS4 ? d[0] : d[2];
        double lhs = lemma_lhs(l, in, d[0], b, c);
        double df = std::max(lemma_data_factor(l, in, d[0], b, c), kRhsFloor);
        double e = lemma_exponent(l) + (uses_eps(l) ? sw.eps : 0.0);
        row.sup_ratio = std::max(row.sup_ratio, lhs / std::max(df * std::pow(M, e), kRhsFloor));
        row.sup_scaled = std::max(row.sup_scaled, lhs / df);
      }
      rep.rows.push_back(row);
    }
  std::vector<double> xs, ys;
  for (const auto& r : rep.rows)
    if (sw.alpha_tracks_M || r.alpha == 0.0) {
      xs.push_back(r.M);
      ys.push_back(r.sup_scaled);
    }
  if (l != Lemma::Extra && xs.size() >= 3) {
    rep.fit = fit_loglog(xs, ys);
    double extra = (sw.alpha_tracks_M && (l == Lemma::Mk1 || l == Lemma::Mk2)) ? 1.0 / 12.0 : 0.0;
    rep.slope_bound = lemma_exponent(l) + extra + 2 * sw.eps;
    rep.slope_ok = rep.fit.slope <= rep.slope_bound;
  }
  return rep;
}

// Sup ratio of the quarter-derivative estimate on successively larger grids
// at fixed spacing; the estimate is uniform if the ratios show no growth.
struct RefinementReport {
  std::vector<std::size_t> n;
  std::vector<double> sup_ratio;
  double growth_per_level = 0;  // fitted slope of log ratio per refinement level
};

inline RefinementReport refinement_sweep(Lemma l, double s, int levels, int trials, double dxi = 0.25,
                                         double xi_max0 = 8, std::uint64_t seed = 7, double M = 16) {
  if (trials <= 0) throw Error(ErrorKind::InvalidArgument, "trials must be positive");
  RefinementReport r;
  std::vector<double> lv, lr;
  for (int k = 0; k < levels; ++k) {
    double xm = xi_max0 * std::pow(2.0, k);
    auto n = static_cast<std::size_t>(std::llround(2 * xm / dxi)) + 1;
    FrequencyGrid g(xm, n);
    double best = 0;
    for (int i = 0; i < trials; ++i) {
      GridFunction d[3];
      for (int j = 0; j < 3; ++j)
        d[j] = sample(g, {s, seed * 7919ULL + static_cast<std::uint64_t>(3 * i + j), 1.0, true});
      LemmaInputs in{M, 0.0, s, 0.01, 0.0, i % 3};
      best = std::max(best, lemma_ratio(l, in, d[0], d[1], d[2]));
    }
    r.n.push_back(n);
    r.sup_ratio.push_back(best);
    lv.push_back(k);
    lr.push_back(std::log(best));
  }
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < lv.size(); ++i) mx += lv[i], my += lr[i];
  mx /= lv.size();
  my /= lv.size();
  double sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < lv.size(); ++i) {
    sxx += (lv[i] - mx) * (lv[i] - mx);
    sxy += (lv[i] - mx) * (lr[i] - my);
  }
  r.growth_per_level = sxx > 0 ? sxy / sxx : 0.0;
  return r;
}

enum class Quantity { Boundary, Resonant, Remainder };
enum class Axis { N, J };

inline const char* to_string(Quantity q) {
  switch (q) {
    case Quantity::Boundary: return "boundary";
    case Quantity::Resonant: return "resonant";
    case Quantity::Remainder: return "remainder";
  }
  return "?";
}

inline Quantity parse_quantity(const std::string& s) {
  for (Quantity q : {Quantity::Boundary, Quantity::Resonant, Quantity::Remainder})
    if (s == to_string(q)) return q;
  throw Error(ErrorKind::InvalidArgument, "unknown quantity '" + s + "'");
}

struct DecaySweep {
  Quantity quantity = Quantity::Boundary;
  Axis axis = Axis::N;
  int j = 2;                                  // generation for the N axis
  std::vector<double> N{2, 4, 8, 16, 32, 64};
  std::vector<int> J{1, 2, 3};                // for the J axis
  double N_fixed = 64;
  ReductionConfig cfg;
  double xi_max = 16;
  std::size_t n = 65;
  int trials = 4;
  std::uint64_t seed = 3;
  EvalOptions eval;                           // sampling for deep generations
  double sampled_from_J = 3;                  // J-axis levels at or above this use sampling
};

struct DecayReport {
  std::vector<double> x;
  std::vector<double> y;         // sup over trials of the norm
  std::vector<double> std_error; // sampling error of y (0 when exact)
  FitResult fit;
  double predicted = 0;
  bool fit_defined = false;
};

// Exponent of N the reduction lemmas predict for a term of generation j.
inline double predicted_exponent(Quantity q, int j, double delta, Equation eq) {
  const double d = eq == Equation::CubicNLS ? 2.0 : 3.0;
  switch (q) {
    case Quantity::Boundary: return -(j - 1) / 2.0 + (j - 2) * delta / 2.0;
    case Quantity::Resonant: return j == 1 ? 0.5 : -(j - 2) / 2.0 + (j - 3) * delta / 2.0;
    case Quantity::Remainder: return -j / d + (j - 1) * delta / d;
  }
  return 0;
}

inline DecayReport decay_fit(const DecaySweep& sw) {
  DecayReport r;
  FrequencyGrid g(sw.xi_max, sw.n);
  std::vector<GridFunction> data;
  for (int i = 0; i < sw.trials; ++i) {
    SampleProfile p;
    p.s_decay = sw.cfg.s;
    p.seed = sw.seed * 104729ULL + static_cast<std::uint64_t>(i);
    p.hermitian = sw.cfg.equation == Equation::MKdV;
    data.push_back(sample(g, p));
  }
  if (data.empty()) throw Error(ErrorKind::InvalidArgument, "trials must be positive");
  auto measure = [&](const ReductionConfig& cfg, int level, double& se) {
    double best = 0;
    se = 0;
    for (const auto& v : data) {
      GridFunction out(g);
      GridFunction err(g);
      switch (sw.quantity) {
        case Quantity::Boundary: out = boundary_term(v, level, cfg, 0.0); break;
        case Quantity::Resonant: out = resonant_term(v, level, cfg, 0.0); break;
        case Quantity::Remainder: {
          const EvalOptions* opt = level >= sw.sampled_from_J && sw.eval.sampled ? &sw.eval : nullptr;
          out = reduction_constant(cfg.equation, level) *
                sum_over_trees(v, level + 1, TermKind::Remainder, cfg, 0.0, opt, &err);
          break;
        }
      }
      double y = sw.quantity == Quantity::Remainder ? flinf_norm(out) : sobolev_norm(out, cfg.s);
      if (y > best) {
        best = y;
        se = flinf_norm(err);
      }
    }
    return best;
  };
  if (sw.axis == Axis::N) {
    for (double N : sw.N) {
      ReductionConfig cfg = sw.cfg;
      cfg.N = N;
      cfg.J_max = std::max(cfg.J_max, sw.j);
      cfg.validate();
      double se;
      r.x.push_back(N);
      r.y.push_back(measure(cfg, sw.j, se));
      r.std_error.push_back(se);
    }
    r.predicted = predicted_exponent(sw.quantity, sw.j, sw.cfg.delta, sw.cfg.equation);
  } else {
    if (sw.quantity != Quantity::Remainder) throw Error(ErrorKind::InvalidArgument, "the J axis is for the remainder");
    for (int J : sw.J) {
      ReductionConfig cfg = sw.cfg;
      cfg.N = sw.N_fixed;
      cfg.J_max = std::max(cfg.J_max, J);
      cfg.validate();
      double se;
      r.x.push_back(J);
      r.y.push_back(measure(cfg, J, se));
      r.std_error.push_back(se);
    }
  }
  try {
    if (sw.axis == Axis::N) {
      r.fit = fit_loglog(r.x, r.y);
    } else {
      // log-linear in J
      std::vector<double> ex;
      for (double x : r.x) ex.push_back(std::exp(x));
      r.fit = fit_loglog(ex, r.y);
    }
    r.fit_defined = true;
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::FitUndefined) throw;
  }
  return r;
}

// Calibration constant for the contraction estimate: sup over samples and
// J <= J_top of ||resonant term of generation J+1|| / (N^{-(J-1)/2+(J-2)delta/2+eps} ||v||^{2J+3}).
inline double calibrate_constant(const ReductionConfig& base, const FrequencyGrid& g, int trials, int J_top,
                                 std::uint64_t seed, const std::vector<double>& Ns = {4, 16, 64}) {
  double best = 0;
  for (int i = 0; i < trials; ++i) {
    SampleProfile p;
    p.s_decay = base.s;
    p.seed = seed * 31337ULL + static_cast<std::uint64_t>(i);
    p.hermitian = base.equation == Equation::MKdV;
    auto v = sample(g, p);
    double nv = sobolev_norm(v, base.s);
    for (double N : Ns)
      for (int J = 1; J <= J_top; ++J) {
        ReductionConfig cfg = base;
        cfg.N = N;
        cfg.J_max = J + 1;
        double lhs = sobolev_norm(resonant_term(v, J + 1, cfg, 0.0), base.s);
        double e = -(J - 1) / 2.0 + (J - 2) * base.delta / 2.0 + base.eps;
        double rhs = std::pow(N, e) * std::pow(nv, 2 * J + 3);
        best = std::max(best, lhs / std::max(rhs, kRhsFloor));
      }
  }
  return best;
}

}  // namespace nfr
