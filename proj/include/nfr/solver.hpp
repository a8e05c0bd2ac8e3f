#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "nfr/engine.hpp"
#include "nfr/grid.hpp"
#include "nfr/trilinear.hpp"

namespace nfr {

struct Trajectory {
  FrequencyGrid grid;
  std::vector<double> times;
  std::vector<GridFunction> states;

  explicit Trajectory(const FrequencyGrid& g) : grid(g) {}

  std::size_t size() const { return times.size(); }

  void push(double t, GridFunction v) {
    if (!times.empty() && !(t > times.back())) throw Error(ErrorKind::InvalidArgument, "times must increase");
    if (!(v.grid() == grid)) throw Error(ErrorKind::GridMismatch, "state grid differs from trajectory grid");
    times.push_back(t);
    states.push_back(std::move(v));
  }

  std::vector<double> hs_norms(double s) const {
    std::vector<double> out;
    for (const auto& v : states) out.push_back(sobolev_norm(v, s));
    return out;
  }

  std::vector<double> flinf_norms() const {
    std::vector<double> out;
    for (const auto& v : states) out.push_back(flinf_norm(v));
    return out;
  }
};

// sup over the common mesh of ||a(t) - b(t)||_{H^s}
inline double sup_distance(const Trajectory& a, const Trajectory& b, double s) {
  if (a.times != b.times) throw Error(ErrorKind::GridMismatch, "time meshes differ");
  double m = 0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, sobolev_norm(a.states[i] - b.states[i], s));
  return m;
}

inline double sup_norm(const Trajectory& a, double s) {
  double m = 0;
  for (const auto& v : a.states) m = std::max(m, sobolev_norm(v, s));
  return m;
}

inline std::vector<double> uniform_mesh(double T, int n_t) {
  if (!(T > 0) || !std::isfinite(T)) throw Error(ErrorKind::InvalidArgument, "T must be positive");
  if (n_t < 2) throw Error(ErrorKind::InvalidArgument, "need at least two mesh points");
  std::vector<double> t(static_cast<std::size_t>(n_t));
  for (int i = 0; i < n_t; ++i) t[static_cast<std::size_t>(i)] = T * i / (n_t - 1);
  t.back() = T;
  return t;
}

inline Trajectory constant_trajectory(const GridFunction& u0, const std::vector<double>& times) {
  Trajectory tr(u0.grid());
  for (double t : times) tr.push(t, u0);
  return tr;
}

struct SolverConfig {
  double T = 0.1;            // user time horizon, capped by pick_parameters
  int n_t = 64;
  double kappa = 0.1;
  double C_hat = 1.0;        // calibration constant of the contraction estimate
  double tol = 1e-8;
  int max_iter = 30;
  int ref_substeps = 4;      // reference steps per mesh interval
  bool auto_parameters = true;
  double band_tol = 1e-6;    // allowed relative H^s mass of the datum above xi_max/3
  EvalOptions eval;

  void validate() const {
    if (!(T > 0) || !std::isfinite(T)) throw Error(ErrorKind::InvalidArgument, "T must be positive");
    if (n_t < 64) throw Error(ErrorKind::InvalidArgument, "the time mesh needs at least 64 points");
    if (!(kappa > 0)) throw Error(ErrorKind::InvalidArgument, "kappa must be positive");
    if (!(C_hat > 0)) throw Error(ErrorKind::InvalidArgument, "C_hat must be positive");
    if (!(tol > 0)) throw Error(ErrorKind::InvalidArgument, "tol must be positive");
    if (max_iter < 1) throw Error(ErrorKind::InvalidArgument, "max_iter must be at least 1");
    if (ref_substeps < 1) throw Error(ErrorKind::InvalidArgument, "ref_substeps must be at least 1");
  }
};

struct Parameters {
  double N = 2;
  double T = 0;
};

// Smallest dyadic N >= 2 with C N^{-1/2+delta/2+eps} (2R)^4 <= 1/2, then
// T = min(T_user, kappa / (N^{1/2+eps} (2R)^2)).
inline Parameters pick_parameters(double R, const ReductionConfig& cfg, const SolverConfig& sc) {
  if (!std::isfinite(R)) throw Error(ErrorKind::InvalidArgument, "R must be finite");
  if (R < 1) throw Error(ErrorKind::InvalidArgument, "R must be at least 1");
  const double e = -0.5 + cfg.delta / 2 + cfg.eps;
  if (!(e < 0)) throw Error(ErrorKind::InvalidArgument, "delta/2 + eps must stay below 1/2");
  const double load = sc.C_hat * std::pow(2 * R, 4);
  Parameters p;
  p.N = 2;
  while (load * std::pow(p.N, e) > 0.5) {
    p.N *= 2;
    if (p.N > 1e300) throw Error(ErrorKind::ResourceLimit, "no dyadic N satisfies the contraction condition");
  }
  p.T = std::min(sc.T, sc.kappa / (std::pow(p.N, 0.5 + cfg.eps) * std::pow(2 * R, 2)));
  return p;
}

namespace detail {

inline GridFunction boundary_sum(const GridFunction& v, const ReductionConfig& cfg, double t, const EvalOptions& opt) {
  GridFunction acc(v.grid());
  for (int j = 2; j <= cfg.J_max + 1; ++j) acc += boundary_term(v, j, cfg, t, &opt);
  return acc;
}

inline GridFunction resonant_sum(const GridFunction& v, const ReductionConfig& cfg, double t, const EvalOptions& opt) {
  GridFunction acc(v.grid());
  for (int j = 1; j <= cfg.J_max; ++j) acc += resonant_term(v, j, cfg, t, &opt);
  return acc;
}

}  // namespace detail

// One application of the normal-form map on a time mesh: boundary terms up to
// generation J_max+1 at (v(t), t) minus those at (u0, 0), plus the trapezoid
// integral of the resonant terms up to generation J_max.
inline Trajectory gamma_map(const Trajectory& v, const GridFunction& u0, const ReductionConfig& cfg,
                            const EvalOptions& opt = {}) {
  if (v.size() < 2) throw Error(ErrorKind::InvalidArgument, "need at least two mesh points");
  if (!(v.grid == u0.grid())) throw Error(ErrorKind::GridMismatch, "datum and trajectory grids differ");
  if (v.times.front() != 0.0) throw Error(ErrorKind::GridMismatch, "time mesh must start at 0");
  Trajectory out(v.grid);
  const GridFunction b0 = detail::boundary_sum(u0, cfg, 0.0, opt);
  GridFunction integral(v.grid);
  GridFunction prev = detail::resonant_sum(v.states[0], cfg, v.times[0], opt);
  out.push(0.0, u0);
  for (std::size_t i = 1; i < v.size(); ++i) {
    GridFunction cur = detail::resonant_sum(v.states[i], cfg, v.times[i], opt);
    integral += (0.5 * (v.times[i] - v.times[i - 1])) * (prev + cur);
    GridFunction w = u0 + detail::boundary_sum(v.states[i], cfg, v.times[i], opt) - b0 + integral;
    w.set_real_physical(u0.real_physical());
    out.push(v.times[i], std::move(w));
    prev = std::move(cur);
  }
  return out;
}

struct SolveReport {
  bool converged = false;
  int iterations = 0;
  double final_residual = 0;
  double N = 0;
  double T = 0;
  std::vector<double> residuals;
};

// Gaussian profile exp(-xi^2/(2 w^2)) rescaled to the given H^s norm; real in physical space.
inline GridFunction gaussian_datum(const FrequencyGrid& g, double width, double norm, double s) {
  if (!(width > 0) || !(norm >= 0)) throw Error(ErrorKind::InvalidArgument, "bad Gaussian parameters");
  auto f = GridFunction::from_function(g, [&](double x) { return std::exp(-x * x / (2 * width * width)); });
  f *= norm / sobolev_norm(f, s);
  f.set_real_physical(true);
  return f;
}

// Datum energy above |xi| > xi_max/3, relative; the solver requires it to be negligible.
inline double out_of_band_fraction(const GridFunction& u, double s) {
  double total = sobolev_norm(u, s);
  if (total == 0) return 0;
  GridFunction hi(u.grid());
  for (std::size_t k = 0; k < u.size(); ++k)
    if (std::abs(u.grid().node(k)) > u.grid().xi_max() / 3) hi[k] = u[k];
  return sobolev_norm(hi, s) / total;
}

inline void check_datum(const GridFunction& u0, const ReductionConfig& cfg, double band_tol) {
  if (!u0.all_finite()) throw Error(ErrorKind::InvalidInput, "datum has non-finite values");
  if (out_of_band_fraction(u0, cfg.s) > band_tol)
    throw Error(ErrorKind::InvalidInput, "datum spectrum must be supported in |xi| <= xi_max/3");
}

// Picard iteration of the normal-form map from v = u0 on [0, T]; cfg.N and
// sc.T are replaced by pick_parameters when sc.auto_parameters is set.
inline std::pair<Trajectory, SolveReport> solve_normal_form(const GridFunction& u0, ReductionConfig cfg,
                                                            const SolverConfig& sc) {
  sc.validate();
  check_datum(u0, cfg, sc.band_tol);
  double T = sc.T;
  if (sc.auto_parameters) {
    auto p = pick_parameters(1.0 + sobolev_norm(u0, cfg.s), cfg, sc);
    cfg.N = p.N;
    T = p.T;
  }
  cfg.validate();
  SolveReport rep;
  rep.N = cfg.N;
  rep.T = T;
  auto times = uniform_mesh(T, sc.n_t);
  Trajectory v = constant_trajectory(u0, times);
  int growth = 0;
  for (int it = 1; it <= sc.max_iter; ++it) {
    Trajectory next = gamma_map(v, u0, cfg, sc.eval);
    double r = sup_distance(next, v, cfg.s);
    rep.iterations = it;
    rep.residuals.push_back(r);
    rep.final_residual = r;
    v = std::move(next);
    if (r < sc.tol) {
      rep.converged = true;
      break;
    }
    if (rep.residuals.size() >= 2 && r > rep.residuals[rep.residuals.size() - 2]) {
      if (++growth >= 3)
        throw Error(ErrorKind::NoContraction, "Picard residual grew for 3 consecutive iterations (last " +
                                                  std::to_string(r) + ", N=" + std::to_string(cfg.N) +
                                                  ", T=" + std::to_string(T) + ")");
    } else {
      growth = 0;
    }
  }
  return {std::move(v), rep};
}

// Classical RK4 for dv/dt = scale * N(v)(t) in the interaction representation,
// recording the state after every step.
inline Trajectory reference_solve(const GridFunction& u0, Equation eq, double T, double dt, double scale = 1.0) {
  if (!(dt > 0) || !std::isfinite(dt)) throw Error(ErrorKind::InvalidArgument, "dt must be positive");
  if (!(T > 0) || !std::isfinite(T)) throw Error(ErrorKind::InvalidArgument, "T must be positive");
  if (!u0.all_finite()) throw Error(ErrorKind::InvalidInput, "datum has non-finite values");
  const auto steps = static_cast<std::size_t>(std::ceil(T / dt - 1e-9));
  const double h = T / static_cast<double>(steps);
  auto f = [&](const GridFunction& v, double t) { return scale * nonlinearity(eq, v, t); };
  Trajectory tr(u0.grid());
  GridFunction v = u0;
  tr.push(0.0, v);
  double norm = flinf_norm(v);
  for (std::size_t i = 0; i < steps; ++i) {
    double t = h * static_cast<double>(i);
    auto k1 = f(v, t);
    auto k2 = f(v + (h / 2) * k1, t + h / 2);
    auto k3 = f(v + (h / 2) * k2, t + h / 2);
    auto k4 = f(v + h * k3, t + h);
    v += (h / 6) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    v.set_real_physical(u0.real_physical());
    double nn = flinf_norm(v);
    if (!v.all_finite() || (norm > 0 && nn > 10 * norm))
      throw Error(ErrorKind::Blowup, "state grew more than tenfold in one step at t=" + std::to_string(t + h));
    norm = nn;
    tr.push(i + 1 == steps ? T : h * static_cast<double>(i + 1), v);
  }
  return tr;
}

// Reference solution sampled on a given mesh, with `substeps` RK4 steps per interval.
inline Trajectory reference_on_mesh(const GridFunction& u0, Equation eq, const std::vector<double>& times,
                                    int substeps) {
  Trajectory full = reference_solve(u0, eq, times.back(), times.back() / ((times.size() - 1) * substeps));
  Trajectory out(u0.grid());
  for (std::size_t i = 0; i < times.size(); ++i) out.push(times[i], full.states[i * static_cast<std::size_t>(substeps)]);
  return out;
}

struct Comparison {
  std::vector<double> times;
  std::vector<double> discrepancy;
  double max_discrepancy = 0;
  double tail_budget = 0;         // integral of the first dropped term, doubled for the contraction
  double quadrature_budget = 0;   // rounding floor plus sampling error
  double time_budget = 0;         // trapezoid and RK4 step-halving estimates
  SolveReport report;

  double budget() const { return tail_budget + quadrature_budget + time_budget; }
};

namespace detail {

// Same mesh refined by halving every interval.
inline std::vector<double> refine(const std::vector<double>& t) {
  std::vector<double> out;
  for (std::size_t i = 0; i + 1 < t.size(); ++i) {
    out.push_back(t[i]);
    out.push_back(0.5 * (t[i] + t[i + 1]));
  }
  out.push_back(t.back());
  return out;
}

inline Trajectory every_other(const Trajectory& tr) {
  Trajectory out(tr.grid);
  for (std::size_t i = 0; i < tr.size(); i += 2) out.push(tr.times[i], tr.states[i]);
  return out;
}

}  // namespace detail

// Normal-form solution against the RK4 reference on the same grid, with an
// a posteriori error budget.
inline Comparison compare_solutions(const GridFunction& u0, const ReductionConfig& cfg, const SolverConfig& sc) {
  Comparison c;
  auto [nf, rep] = solve_normal_form(u0, cfg, sc);
  c.report = rep;
  ReductionConfig used = cfg;
  used.N = rep.N;
  auto ref = reference_on_mesh(u0, cfg.equation, nf.times, sc.ref_substeps);
  c.times = nf.times;
  for (std::size_t i = 0; i < nf.size(); ++i) {
    double d = sobolev_norm(nf.states[i] - ref.states[i], cfg.s);
    c.discrepancy.push_back(d);
    c.max_discrepancy = std::max(c.max_discrepancy, d);
  }
  // dropped term: integral of the full next-order term along the solution
  GridFunction acc(u0.grid());
  GridFunction prev = next_order_term(nf.states[0], used.J_max, used, 0.0, &sc.eval);
  double tail = 0;
  for (std::size_t i = 1; i < nf.size(); ++i) {
    GridFunction cur = next_order_term(nf.states[i], used.J_max, used, nf.times[i], &sc.eval);
    acc += (0.5 * (nf.times[i] - nf.times[i - 1])) * (prev + cur);
    tail = std::max(tail, sobolev_norm(acc, cfg.s));
    prev = std::move(cur);
  }
  c.tail_budget = 2 * tail;
  // trapezoid error: fixed-point solve on the halved mesh, same N and T
  SolverConfig fine = sc;
  fine.auto_parameters = false;
  fine.T = rep.T;
  fine.n_t = 2 * sc.n_t - 1;
  auto nf_fine = solve_normal_form(u0, used, fine).first;
  double trap = sup_distance(nf, detail::every_other(nf_fine), cfg.s);
  auto ref_fine = reference_on_mesh(u0, cfg.equation, nf.times, 2 * sc.ref_substeps);
  double rk = sup_distance(ref, ref_fine, cfg.s);
  c.time_budget = 2 * (4.0 / 3.0 * trap + 16.0 / 15.0 * rk) + 2 * sc.tol;
  double scale = std::max(sup_norm(nf, cfg.s), sup_norm(ref, cfg.s));
  c.quadrature_budget = 1e3 * std::numeric_limits<double>::epsilon() * scale * std::sqrt(double(u0.size()));
  return c;
}

struct DifferenceResult {
  double ratio = 0;
  bool degenerate = false;
  double data_distance = 0;
  double solution_distance = 0;
};

// ||v_a - v_b||_{C_T H^s} / ||u0a - u0b||_{H^s}; both solves share (N, T),
// chosen from the larger datum.
inline DifferenceResult difference_experiment(const GridFunction& a, const GridFunction& b, ReductionConfig cfg,
                                              SolverConfig sc) {
  a.check_same(b);
  DifferenceResult r;
  r.data_distance = sobolev_norm(a - b, cfg.s);
  if (sc.auto_parameters) {
    auto p = pick_parameters(1.0 + std::max(sobolev_norm(a, cfg.s), sobolev_norm(b, cfg.s)), cfg, sc);
    cfg.N = p.N;
    sc.T = p.T;
    sc.auto_parameters = false;
  }
  if (r.data_distance == 0) {
    r.degenerate = true;
    return r;
  }
  auto va = solve_normal_form(a, cfg, sc);
  auto vb = solve_normal_form(b, cfg, sc);
  if (!va.second.converged || !vb.second.converged)
    throw Error(ErrorKind::NoContraction, "difference experiment needs both solves to converge");
  r.solution_distance = sup_distance(va.first, vb.first, cfg.s);
  r.ratio = r.solution_distance / r.data_distance;
  return r;
}

struct MollifiedResult {
  std::vector<double> cutoffs;
  std::vector<double> distances;  // sup_t ||v_{k+1} - v_k||_{H^s}
  bool monotone = false;
};

// Solves from the frequency truncations |xi| <= K of u0 for the given cutoffs,
// all with the (N, T) of the full datum, and records successive distances.
inline MollifiedResult mollified_sequence(const GridFunction& u0, const std::vector<double>& cutoffs,
                                          ReductionConfig cfg, SolverConfig sc) {
  if (cutoffs.size() < 3) throw Error(ErrorKind::InvalidArgument, "need at least three cutoffs");
  if (sc.auto_parameters) {
    auto p = pick_parameters(1.0 + sobolev_norm(u0, cfg.s), cfg, sc);
    cfg.N = p.N;
    sc.T = p.T;
    sc.auto_parameters = false;
  }
  MollifiedResult r;
  r.cutoffs = cutoffs;
  std::optional<Trajectory> prev;
  for (double K : cutoffs) {
    auto uk = mask(u0, [K](double xi) { return std::abs(xi) <= K; });
    auto [v, rep] = solve_normal_form(uk, cfg, sc);
    if (!rep.converged) throw Error(ErrorKind::NoContraction, "mollified solve did not converge");
    if (prev) r.distances.push_back(sup_distance(*prev, v, cfg.s));
    prev = std::move(v);
  }
  r.monotone = true;
  for (std::size_t i = 1; i < r.distances.size(); ++i)
    if (!(r.distances[i] < r.distances[i - 1])) r.monotone = false;
  return r;
}

}  // namespace nfr
