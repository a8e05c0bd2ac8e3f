#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <limits>
#include <vector>

#include "nfr/error.hpp"

namespace nfr {

using cplx = std::complex<double>;

// Uniform symmetric frequency grid with an odd number of nodes, so that
// xi = 0 is a node. Node k sits at (k - c) * dxi with c the center index.
class FrequencyGrid {
 public:
  FrequencyGrid() = default;
  FrequencyGrid(double xi_max, std::size_t n) : xi_max_(xi_max), n_(n) {
    if (!(xi_max > 0.0) || !std::isfinite(xi_max))
      throw Error(ErrorKind::InvalidArgument, "xi_max must be positive and finite");
    if (n < 3 || n % 2 == 0)
      throw Error(ErrorKind::InvalidArgument, "grid size must be odd and >= 3");
    if (n > 65535)
      throw Error(ErrorKind::ResourceLimit, "grid size above 65535 is not supported");
    dxi_ = 2.0 * xi_max / static_cast<double>(n - 1);
  }

  double xi_max() const { return xi_max_; }
  std::size_t n() const { return n_; }
  double dxi() const { return dxi_; }
  std::size_t center() const { return (n_ - 1) / 2; }
  long offset(std::size_t k) const { return static_cast<long>(k) - static_cast<long>(center()); }
  double node(std::size_t k) const { return static_cast<double>(offset(k)) * dxi_; }

  std::vector<double> nodes() const {
    std::vector<double> xs(n_);
    for (std::size_t k = 0; k < n_; ++k) xs[k] = node(k);
    return xs;
  }

  // Index of the node within dxi/2 of xi, or -1 when xi is off the grid.
  long snap(double xi) const {
    double r = xi / dxi_;
    double k = std::nearbyint(r);
    if (std::abs(r - k) > 0.5) return -1;
    long idx = static_cast<long>(k) + static_cast<long>(center());
    if (idx < 0 || idx >= static_cast<long>(n_)) return -1;
    return idx;
  }

  bool operator==(const FrequencyGrid& o) const { return xi_max_ == o.xi_max_ && n_ == o.n_; }
  bool operator!=(const FrequencyGrid& o) const { return !(*this == o); }

 private:
  double xi_max_ = 1.0;
  std::size_t n_ = 3;
  double dxi_ = 1.0;
};

inline double japanese(double xi) { return std::sqrt(1.0 + xi * xi); }

class GridFunction {
 public:
  GridFunction() = default;
  explicit GridFunction(const FrequencyGrid& g, bool real_physical = false)
      : grid_(g), values_(g.n(), cplx(0.0, 0.0)), real_physical_(real_physical) {}
  GridFunction(const FrequencyGrid& g, std::vector<cplx> values, bool real_physical = false)
      : grid_(g), values_(std::move(values)), real_physical_(real_physical) {
    if (values_.size() != g.n())
      throw Error(ErrorKind::InvalidArgument, "value count does not match grid size");
  }

  template <class F>
  static GridFunction from_function(const FrequencyGrid& g, F&& f, bool real_physical = false) {
    GridFunction out(g, real_physical);
    for (std::size_t k = 0; k < g.n(); ++k) out.values_[k] = cplx(f(g.node(k)));
    return out;
  }

  const FrequencyGrid& grid() const { return grid_; }
  std::size_t size() const { return values_.size(); }
  bool real_physical() const { return real_physical_; }
  void set_real_physical(bool flag) { real_physical_ = flag; }

  const std::vector<cplx>& values() const { return values_; }
  std::vector<cplx>& values() { return values_; }
  const cplx* data() const { return values_.data(); }
  cplx* data() { return values_.data(); }
  cplx operator[](std::size_t k) const { return values_[k]; }
  cplx& operator[](std::size_t k) { return values_[k]; }

  GridFunction& operator+=(const GridFunction& o) {
    check_same(o);
    for (std::size_t k = 0; k < values_.size(); ++k) values_[k] += o.values_[k];
    return *this;
  }
  GridFunction& operator-=(const GridFunction& o) {
    check_same(o);
    for (std::size_t k = 0; k < values_.size(); ++k) values_[k] -= o.values_[k];
    return *this;
  }
  GridFunction& operator*=(cplx a) {
    for (auto& x : values_) x *= a;
    return *this;
  }
  friend GridFunction operator+(GridFunction a, const GridFunction& b) { return a += b; }
  friend GridFunction operator-(GridFunction a, const GridFunction& b) { return a -= b; }
  friend GridFunction operator*(cplx a, GridFunction b) { return b *= a; }

  bool all_finite() const {
    return std::all_of(values_.begin(), values_.end(),
                       [](cplx z) { return std::isfinite(z.real()) && std::isfinite(z.imag()); });
  }

  void check_same(const GridFunction& o) const {
    if (grid_ != o.grid_) throw Error(ErrorKind::GridMismatch, "grid functions live on different grids");
  }

 private:
  FrequencyGrid grid_;
  std::vector<cplx> values_;
  bool real_physical_ = false;
};

inline void require_finite(const GridFunction& f) {
  if (!f.all_finite()) throw Error(ErrorKind::InvalidInput, "grid function has non-finite samples");
}

inline double sobolev_norm(const GridFunction& f, double s) {
  require_finite(f);
  const auto& g = f.grid();
  double acc = 0.0;
  for (std::size_t k = 0; k < f.size(); ++k) {
    double w = s == 0.0 ? 1.0 : std::pow(1.0 + g.node(k) * g.node(k), s);
    acc += w * std::norm(f[k]);
  }
  return std::sqrt(acc * g.dxi());
}

inline double l2_norm(const GridFunction& f) { return sobolev_norm(f, 0.0); }

// Fourier-Lebesgue norm; p must be 1 or infinity.
inline double fl_norm(const GridFunction& f, double p) {
  require_finite(f);
  if (std::isinf(p) && p > 0) {
    double m = 0.0;
    for (auto z : f.values()) m = std::max(m, std::abs(z));
    return m;
  }
  if (p == 1.0) {
    double acc = 0.0;
    for (auto z : f.values()) acc += std::abs(z);
    return acc * f.grid().dxi();
  }
  throw Error(ErrorKind::InvalidArgument, "Fourier-Lebesgue exponent must be 1 or infinity");
}

inline double flinf_norm(const GridFunction& f) { return fl_norm(f, std::numeric_limits<double>::infinity()); }

inline bool is_dyadic(double N) {
  if (!(N >= 1.0) || !std::isfinite(N)) return false;
  int e = 0;
  double m = std::frexp(N, &e);
  return m == 0.5;
}

template <class Pred>
GridFunction mask(const GridFunction& f, Pred&& keep) {
  GridFunction out(f.grid(), f.real_physical());
  for (std::size_t k = 0; k < f.size(); ++k)
    if (keep(f.grid().node(k))) out[k] = f[k];
  return out;
}

// P_1 keeps |xi| < 2, P_N keeps N <= |xi| < 2N for dyadic N >= 2.
inline GridFunction littlewood_paley(const GridFunction& f, double N) {
  if (!is_dyadic(N)) throw Error(ErrorKind::InvalidArgument, "Littlewood-Paley level must be a power of 2");
  if (N == 1.0) return mask(f, [](double xi) { return std::abs(xi) < 2.0; });
  return mask(f, [N](double xi) {
    double a = std::abs(xi);
    return a >= N && a < 2.0 * N;
  });
}

inline GridFunction unit_interval_project(const GridFunction& f, long k) {
  double lo = static_cast<double>(k);
  return mask(f, [lo](double xi) { return xi >= lo && xi < lo + 1.0; });
}

// Largest relative deviation from f(-xi) = conj(f(xi)).
inline double hermitian_defect(const GridFunction& f) {
  double scale = flinf_norm(f);
  if (scale == 0.0) return 0.0;
  std::size_t n = f.size();
  double d = 0.0;
  for (std::size_t k = 0; k < n; ++k) d = std::max(d, std::abs(f[n - 1 - k] - std::conj(f[k])));
  return d / scale;
}

inline GridFunction hermitian_part(const GridFunction& f) {
  GridFunction out(f.grid(), true);
  std::size_t n = f.size();
  for (std::size_t k = 0; k < n; ++k) out[k] = 0.5 * (f[k] + std::conj(f[n - 1 - k]));
  return out;
}

// xi -> conj(f(-xi)); the frequency-side image of complex conjugation.
inline GridFunction reflect_conj(const GridFunction& f) {
  GridFunction out(f.grid(), f.real_physical());
  std::size_t n = f.size();
  for (std::size_t k = 0; k < n; ++k) out[k] = std::conj(f[n - 1 - k]);
  return out;
}

inline double max_abs_diff(const GridFunction& a, const GridFunction& b) {
  a.check_same(b);
  double d = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) d = std::max(d, std::abs(a[k] - b[k]));
  return d;
}

}  // namespace nfr
