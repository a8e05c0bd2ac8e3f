#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <vector>

#include "nfr/dispersion.hpp"
#include "nfr/grid.hpp"
#include "nfr/modulation_index.hpp"

namespace nfr {

enum class WindowKind { None, LeqM, GtM, Shell };

// Restriction on the modulation: |m - alpha| <= M, > M, or M < |m - alpha| <= 2M.
struct ModulationWindow {
  WindowKind kind = WindowKind::None;
  double alpha = 0.0;
  double M = 1.0;

  static ModulationWindow none() { return {}; }
  static ModulationWindow leq(double M, double alpha = 0.0) { return {WindowKind::LeqM, alpha, M}; }
  static ModulationWindow gt(double M, double alpha = 0.0) { return {WindowKind::GtM, alpha, M}; }
  static ModulationWindow shell(double M, double alpha = 0.0) { return {WindowKind::Shell, alpha, M}; }

  bool admits(double m) const {
    double d = std::abs(m - alpha);
    switch (kind) {
      case WindowKind::None: return true;
      case WindowKind::LeqM: return d <= M;
      case WindowKind::GtM: return d > M;
      case WindowKind::Shell: return d > M && d <= 2.0 * M;
    }
    return false;
  }
};

enum class KernelKind { Plain, CauchyDivided };

// Multiplier attached to the trilinear integrand.
//   None        : the equation's bare coefficient (i for NLS, -i for mKdV)
//   XiFull      : coefficient times xi (the mKdV derivative)
//   SgnQuarter  : coefficient times sgn(xi)|xi|^{1/4}
//   QuarterSlot : |xi|^{1/4} |xi_j|^{3/4}, no coefficient
enum class WeightKind { None, XiFull, SgnQuarter, QuarterSlot };

struct TrilinearSpec {
  Equation equation = Equation::CubicNLS;
  ModulationWindow window;
  KernelKind kernel = KernelKind::Plain;
  WeightKind weight = WeightKind::None;
  int weight_slot = 0;  // 0, 1, 2 for QuarterSlot
  std::array<bool, 3> conj{false, true, false};
  double t = 0.0;

  static TrilinearSpec nls(ModulationWindow w = {}, KernelKind k = KernelKind::Plain, double t = 0.0) {
    TrilinearSpec s;
    s.window = w;
    s.kernel = k;
    s.t = t;
    return s;
  }
  static TrilinearSpec mkdv(ModulationWindow w = {}, KernelKind k = KernelKind::Plain, double t = 0.0) {
    TrilinearSpec s;
    s.equation = Equation::MKdV;
    s.window = w;
    s.kernel = k;
    s.weight = WeightKind::XiFull;
    s.conj = {false, false, false};
    s.t = t;
    return s;
  }
};

inline double sgn_quarter(double xi) {
  if (xi == 0.0) return 0.0;
  return (xi > 0 ? 1.0 : -1.0) * std::pow(std::abs(xi), 0.25);
}

inline cplx base_coefficient(Equation eq) { return eq == Equation::CubicNLS ? cplx(0, 1) : cplx(0, -1); }

inline cplx output_weight(const TrilinearSpec& s, double xi) {
  cplx c = base_coefficient(s.equation);
  switch (s.weight) {
    case WeightKind::None: return c;
    case WeightKind::XiFull: return c * xi;
    case WeightKind::SgnQuarter: return c * sgn_quarter(xi);
    case WeightKind::QuarterSlot: return std::pow(std::abs(xi), 0.25);
  }
  return c;
}

// Sign of each slot in the modulation: Phi = xi^2 - xi1^2 + xi2^2 - xi3^2,
// Psi = xi^3 - xi1^3 - xi2^3 - xi3^3.
inline std::array<double, 3> slot_signs(Equation eq) {
  return eq == Equation::CubicNLS ? std::array<double, 3>{-1, 1, -1} : std::array<double, 3>{-1, -1, -1};
}

inline double dispersion_power(Equation eq, double xi) { return eq == Equation::CubicNLS ? xi * xi : xi * xi * xi; }

inline void validate(const TrilinearSpec& s) {
  if (s.window.kind != WindowKind::None && !(s.window.M >= 1.0))
    throw Error(ErrorKind::InvalidSpec, "restricted windows need M >= 1");
  if (s.kernel == KernelKind::CauchyDivided && s.window.kind != WindowKind::GtM && s.window.kind != WindowKind::Shell)
    throw Error(ErrorKind::InvalidSpec, "divided kernel needs a window bounded away from resonance");
  if (s.weight == WeightKind::QuarterSlot && (s.weight_slot < 0 || s.weight_slot > 2))
    throw Error(ErrorKind::InvalidSpec, "weight slot must be 0, 1 or 2");
  if (!std::isfinite(s.t) || !std::isfinite(s.window.alpha)) throw Error(ErrorKind::InvalidSpec, "non-finite parameter");
}

namespace detail {

// Per-slot factors: the argument (conjugated where flagged) times its share
// of the separable phase exp(i s Phi t) and any slot weight.
inline std::array<std::vector<cplx>, 3> slot_factors(const TrilinearSpec& s, const GridFunction& a,
                                                      const GridFunction& b, const GridFunction& c) {
  const auto& g = a.grid();
  const double sg = phase_sign(s.equation);
  const auto signs = slot_signs(s.equation);
  const GridFunction* args[3] = {&a, &b, &c};
  std::array<std::vector<cplx>, 3> f;
  for (int r = 0; r < 3; ++r) {
    f[r].resize(g.n());
    for (std::size_t k = 0; k < g.n(); ++k) {
      cplx z = (*args[r])[k];
      if (s.conj[r]) z = std::conj(z);
      double xi = g.node(k);
      if (s.t != 0.0) z *= std::polar(1.0, sg * signs[r] * dispersion_power(s.equation, xi) * s.t);
      if (s.weight == WeightKind::QuarterSlot && s.weight_slot == r) z *= std::pow(std::abs(xi), 0.75);
      f[r][k] = z;
    }
  }
  return f;
}

inline cplx output_factor(const TrilinearSpec& s, double xi) {
  cplx w = output_weight(s, xi);
  if (s.t != 0.0) w *= std::polar(1.0, phase_sign(s.equation) * dispersion_power(s.equation, xi) * s.t);
  return w;
}

// Unrestricted sum over all pairs: two successive one-dimensional sums.
inline void unrestricted(const TrilinearSpec& s, const std::array<std::vector<cplx>, 3>& f, const FrequencyGrid& g,
                         std::vector<cplx>& out) {
  long n = static_cast<long>(g.n());
  long c = static_cast<long>(g.center());
  const auto &A = f[0], &B = f[1], &C = f[2];
  if (s.equation == Equation::CubicNLS) {
    // H(d) = sum_{i2} B(i2) C(i2 + d), d = i3 - i2 = k - i1
    std::vector<cplx> H(static_cast<std::size_t>(2 * n - 1));
    for (long d = -(n - 1); d <= n - 1; ++d) {
      cplx acc = 0;
      long lo = std::max(0L, -d), hi = std::min(n, n - d);
      for (long i2 = lo; i2 < hi; ++i2) acc += B[i2] * C[i2 + d];
      H[d + n - 1] = acc;
    }
    for (long k = 0; k < n; ++k) {
      cplx acc = 0;
      for (long i1 = 0; i1 < n; ++i1) acc += A[i1] * H[k - i1 + n - 1];
      out[k] = acc;
    }
  } else {
    // H(e) = sum_{i2} B(i2) C(e - i2), e = i2 + i3 = k - i1 + 2c
    std::vector<cplx> H(static_cast<std::size_t>(2 * n - 1));
    for (long e = 0; e <= 2 * n - 2; ++e) {
      cplx acc = 0;
      long lo = std::max(0L, e - (n - 1)), hi = std::min(n - 1, e);
      for (long i2 = lo; i2 <= hi; ++i2) acc += B[i2] * C[e - i2];
      H[e] = acc;
    }
    for (long k = 0; k < n; ++k) {
      cplx acc = 0;
      for (long i1 = 0; i1 < n; ++i1) {
        long e = k - i1 + 2 * c;
        if (e >= 0 && e <= 2 * n - 2) acc += A[i1] * H[e];
      }
      out[k] = acc;
    }
  }
}

}  // namespace detail

// Runs of the sorted pair list of node k admitted by the window.
inline std::vector<IndexRange> window_runs(const ModulationIndex& idx, std::size_t k, const ModulationWindow& w) {
  std::size_t end = idx.pairs(k).size();
  switch (w.kind) {
    case WindowKind::None: return {IndexRange{0, end}};
    case WindowKind::LeqM: return {idx.inside(k, -w.alpha, 1, w.M)};
    case WindowKind::GtM: {
      auto r = idx.inside(k, -w.alpha, 1, w.M);
      return {IndexRange{0, r.begin}, IndexRange{r.end, end}};
    }
    case WindowKind::Shell: {
      auto inner = idx.inside(k, -w.alpha, 1, w.M);
      auto outer = idx.inside(k, -w.alpha, 1, 2.0 * w.M);
      return {IndexRange{outer.begin, inner.begin}, IndexRange{inner.end, outer.end}};
    }
  }
  return {};
}

// Discrete trilinear operator: for each output node the Riemann sum over
// (xi1, xi2) with xi3 fixed by the frequency constraint, times dxi^2.
inline GridFunction apply(const TrilinearSpec& spec, const GridFunction& v1, const GridFunction& v2,
                          const GridFunction& v3) {
  v1.check_same(v2);
  v1.check_same(v3);
  validate(spec);
  const auto& g = v1.grid();
  auto f = detail::slot_factors(spec, v1, v2, v3);
  std::vector<cplx> sums(g.n());
  // A window that contains every grid modulation is no restriction (or, for
  // the complementary windows, excludes everything).
  WindowKind kind = spec.window.kind;
  if (kind != WindowKind::None) {
    LatticeModulation lat(spec.equation, g);
    double reach = lat.unit * static_cast<double>(lat.max_key()) + std::abs(spec.window.alpha);
    if (reach <= spec.window.M * (1.0 - 1e-12)) {
      if (kind != WindowKind::LeqM) {
        GridFunction out(g);
        out.set_real_physical(spec.equation == Equation::MKdV && v1.real_physical() && v2.real_physical() &&
                              v3.real_physical());
        return out;
      }
      kind = WindowKind::None;
    }
  }
  if (kind == WindowKind::None) {
    detail::unrestricted(spec, f, g, sums);
  } else {
    auto idx = ModulationIndex::shared(spec.equation, g);
    const bool divided = spec.kernel == KernelKind::CauchyDivided;
    for (std::size_t k = 0; k < g.n(); ++k) {
      const auto& pairs = idx->pairs(k);
      cplx acc = 0;
      for (const auto& run : window_runs(*idx, k, spec.window))
        for (std::size_t p = run.begin; p < run.end; ++p) {
          const auto& e = pairs[p];
          long i3 = idx->third(static_cast<long>(k), e);
          cplx term = f[0][e.i1] * f[1][e.i2] * f[2][i3];
          if (divided) term /= idx->mu(e) - spec.window.alpha;
          acc += term;
        }
      sums[k] = acc;
    }
  }
  const double w = g.dxi() * g.dxi();
  GridFunction out(g);
  for (std::size_t k = 0; k < g.n(); ++k) out[k] = detail::output_factor(spec, g.node(k)) * sums[k] * w;
  bool real = spec.equation == Equation::MKdV && v1.real_physical() && v2.real_physical() && v3.real_physical() &&
              spec.window.alpha == 0.0 && spec.kernel == KernelKind::Plain && spec.weight != WeightKind::None;
  out.set_real_physical(real);
  return out;
}

inline GridFunction apply(const TrilinearSpec& spec, const GridFunction& v) { return apply(spec, v, v, v); }

// The equation's full nonlinearity in the interaction representation.
inline GridFunction nonlinearity(Equation eq, const GridFunction& v, double t) {
  return apply(eq == Equation::CubicNLS ? TrilinearSpec::nls({}, KernelKind::Plain, t)
                                        : TrilinearSpec::mkdv({}, KernelKind::Plain, t),
               v);
}

// The operator with multiplier sgn(xi)|xi|^{1/4} in place of the mKdV derivative.
inline GridFunction apply_mkdv_quarter(const GridFunction& v, double t) {
  auto s = TrilinearSpec::mkdv({}, KernelKind::Plain, t);
  s.weight = WeightKind::SgnQuarter;
  return apply(s, v);
}

}  // namespace nfr
