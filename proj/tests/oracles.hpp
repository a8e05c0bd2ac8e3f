#pragma once

// Brute-force reference implementations used only by the tests.  They are
// written directly from the defining sums, without the sorted pair index or
// the separable phase factorization used by the library.

#include <cmath>
#include <random>
#include <vector>

#include "nfr/dispersion.hpp"
#include "nfr/grid.hpp"
#include "nfr/engine.hpp"
#include "nfr/trees.hpp"
#include "nfr/trilinear.hpp"

namespace oracle {

using nfr::cplx;
using nfr::Equation;
using nfr::FrequencyTuple;
using nfr::GridFunction;

inline double symbol(Equation eq, const FrequencyTuple& t) {
  return eq == Equation::CubicNLS ? nfr::phi_factored(t) : nfr::psi_factored(t);
}

inline double sgn(double x) { return x > 0 ? 1.0 : (x < 0 ? -1.0 : 0.0); }

// Dense triple loop over (xi, xi1, xi2) for one trilinear operator.
inline GridFunction trilinear(const nfr::TrilinearSpec& s, const GridFunction& a, const GridFunction& b,
                              const GridFunction& c) {
  const auto& g = a.grid();
  GridFunction out(g);
  const GridFunction* args[3] = {&a, &b, &c};
  for (std::size_t k = 0; k < g.n(); ++k) {
    double xi = g.node(k);
    cplx acc = 0;
    for (std::size_t i1 = 0; i1 < g.n(); ++i1)
      for (std::size_t i2 = 0; i2 < g.n(); ++i2) {
        double x1 = g.node(i1), x2 = g.node(i2);
        double x3 = s.equation == Equation::CubicNLS ? xi - x1 + x2 : xi - x1 - x2;
        long i3 = g.snap(x3);
        if (i3 < 0) continue;
        x3 = g.node(static_cast<std::size_t>(i3));
        FrequencyTuple t{xi, x1, x2, x3};
        double m = symbol(s.equation, t);
        if (!s.window.admits(m)) continue;
        std::size_t idx[3] = {i1, i2, static_cast<std::size_t>(i3)};
        double xs[3] = {x1, x2, x3};
        cplx term = 1.0;
        for (int r = 0; r < 3; ++r) {
          cplx z = (*args[r])[idx[r]];
          term *= s.conj[r] ? std::conj(z) : z;
        }
        double sg = s.equation == Equation::CubicNLS ? -1.0 : 1.0;
        term *= std::polar(1.0, sg * m * s.t);
        switch (s.weight) {
          case nfr::WeightKind::None: break;
          case nfr::WeightKind::XiFull: term *= xi; break;
          case nfr::WeightKind::SgnQuarter: term *= sgn(xi) * std::pow(std::abs(xi), 0.25); break;
          case nfr::WeightKind::QuarterSlot:
            term *= std::pow(std::abs(xi), 0.25) * std::pow(std::abs(xs[s.weight_slot]), 0.75);
            break;
        }
        if (s.kernel == nfr::KernelKind::CauchyDivided) term /= (m - s.window.alpha);
        acc += term;
      }
    cplx coef = s.weight == nfr::WeightKind::QuarterSlot ? cplx(1, 0)
                : s.equation == Equation::CubicNLS      ? cplx(0, 1)
                                                        : cplx(0, -1);
    out[k] = coef * acc * g.dxi() * g.dxi();
  }
  return out;
}

inline GridFunction random_function(const nfr::FrequencyGrid& g, std::mt19937_64& rng, double decay = 0.0,
                                    bool hermitian = false) {
  std::normal_distribution<double> nd;
  GridFunction f(g);
  for (std::size_t k = 0; k < g.n(); ++k)
    f[k] = cplx(nd(rng), nd(rng)) * std::pow(1.0 + g.node(k) * g.node(k), -decay / 2);
  if (hermitian) return nfr::hermitian_part(f);
  return f;
}

// Random operator specification: equation, window, kernel, weight and time.
inline nfr::TrilinearSpec random_spec(std::mt19937_64& rng, const nfr::FrequencyGrid& g) {
  std::uniform_real_distribution<double> u(0, 1);
  nfr::LatticeModulation lat(rng() % 2 ? Equation::CubicNLS : Equation::MKdV, g);
  nfr::TrilinearSpec s = lat.eq == Equation::CubicNLS ? nfr::TrilinearSpec::nls() : nfr::TrilinearSpec::mkdv();
  double scale = lat.unit * static_cast<double>(lat.max_key());
  double M = std::max(1.0, std::exp2(std::floor(u(rng) * std::log2(std::max(2.0, scale / 4)))));
  // Half of the shifts sit on the modulation lattice so window edges are hit exactly.
  double alpha = rng() % 2 ? lat.unit * std::round((u(rng) - 0.5) * scale / 4 / lat.unit)
                           : (u(rng) - 0.5) * scale / 4;
  switch (rng() % 4) {
    case 0: s.window = nfr::ModulationWindow::none(); break;
    case 1: s.window = nfr::ModulationWindow::leq(M, alpha); break;
    case 2: s.window = nfr::ModulationWindow::gt(M, alpha); break;
    default: s.window = nfr::ModulationWindow::shell(M, alpha); break;
  }
  if ((s.window.kind == nfr::WindowKind::GtM || s.window.kind == nfr::WindowKind::Shell) && rng() % 2)
    s.kernel = nfr::KernelKind::CauchyDivided;
  if (lat.eq == Equation::MKdV) {
    switch (rng() % 4) {
      case 0: s.weight = nfr::WeightKind::XiFull; break;
      case 1: s.weight = nfr::WeightKind::SgnQuarter; break;
      case 2: s.weight = nfr::WeightKind::QuarterSlot; s.weight_slot = static_cast<int>(rng() % 3); break;
      default: s.weight = nfr::WeightKind::None; break;
    }
  }
  if (rng() % 3 == 0)
    for (auto& c : s.conj) c = rng() % 2;
  s.t = rng() % 4 == 0 ? 0.0 : u(rng) * 4.0 / scale;
  return s;
}

// Nested sum over every frequency assignment of a tree, generation by
// generation, with the windows and kernels written out explicitly.
class Nested {
 public:
  Nested(const nfr::OrderedTree& tree, const std::vector<const GridFunction*>& args, const nfr::ReductionConfig& cfg,
         nfr::TermKind kind, double t)
      : tree_(tree), args_(args), cfg_(cfg), kind_(kind), t_(t), g_(args.at(0)->grid()),
        J_(tree.generations()), xi_(tree.node_count()), slot_(tree.node_count(), -1) {
    auto terms = tree.terminals();
    for (std::size_t i = 0; i < terms.size(); ++i) slot_[static_cast<std::size_t>(terms[i])] = static_cast<int>(i);
  }

  GridFunction run() {
    GridFunction out(g_);
    for (std::size_t k = 0; k < g_.n(); ++k) {
      xi_[0] = g_.node(k);
      out[k] = rec(1, 0.0, 0.0) * std::pow(g_.dxi(), 2.0 * J_);
    }
    return out;
  }

 private:
  bool nls() const { return cfg_.equation == Equation::CubicNLS; }

  cplx rec(int j, double prev, double mu1) {
    const int r = tree_.generation_root(j);
    const auto ch = tree_.node(r).children;
    const double sigma = nls() && tree_.node(r).conj ? -1.0 : 1.0;
    const bool last = j == J_;
    const double x = xi_[static_cast<std::size_t>(r)];
    cplx coef = nls() ? cplx(0, sigma) : cplx(0, -x);
    cplx sum = 0;
    for (std::size_t i1 = 0; i1 < g_.n(); ++i1)
      for (std::size_t i2 = 0; i2 < g_.n(); ++i2) {
        double x1 = g_.node(i1), x2 = g_.node(i2);
        long i3 = g_.snap(nls() ? x - x1 + x2 : x - x1 - x2);
        if (i3 < 0) continue;
        double x3 = g_.node(static_cast<std::size_t>(i3));
        double mu = symbol(cfg_.equation, {x, x1, x2, x3});
        double mt = prev + sigma * mu;
        bool keep;
        bool divide = !last || kind_ == nfr::TermKind::Boundary;
        if (j == 1) {
          bool low = std::abs(mu) <= cfg_.N;
          keep = (last && kind_ == nfr::TermKind::Resonant) ? low : !low;
          if (low) divide = false;
        } else {
          double c = 2.0 * j + 1.0;
          double thr = c * c * c * std::pow(std::max(std::abs(prev), std::abs(mu1)), 1.0 - cfg_.delta);
          bool inside = std::abs(mt) <= thr;
          if (!last || kind_ == nfr::TermKind::Boundary || kind_ == nfr::TermKind::Remainder) keep = !inside;
          else if (kind_ == nfr::TermKind::Resonant) keep = inside;
          else keep = true;
        }
        if (!keep) continue;
        double xs[3] = {x1, x2, x3};
        cplx term = 1.0;
        for (int l = 0; l < 3; ++l) {
          auto c = static_cast<std::size_t>(ch[static_cast<std::size_t>(l)]);
          xi_[c] = xs[l];
          if (slot_[c] >= 0) {
            std::size_t ix = l == 0 ? i1 : (l == 1 ? i2 : static_cast<std::size_t>(i3));
            cplx z = (*args_[static_cast<std::size_t>(slot_[c])])[ix];
            term *= nls() && tree_.node(static_cast<int>(c)).conj ? std::conj(z) : z;
          }
        }
        if (term == 0.0) continue;
        if (divide) term /= mt;
        if (last)
          term *= std::polar(1.0, nfr::phase_sign(cfg_.equation) * mt * t_);
        else
          term *= rec(j + 1, mt, j == 1 ? mt : mu1);
        sum += term;
      }
    return coef * sum;
  }

  const nfr::OrderedTree& tree_;
  std::vector<const GridFunction*> args_;
  nfr::ReductionConfig cfg_;
  nfr::TermKind kind_;
  double t_;
  nfr::FrequencyGrid g_;
  int J_;
  std::vector<double> xi_;
  std::vector<int> slot_;
};

inline GridFunction nested(const nfr::OrderedTree& tree, const std::vector<const GridFunction*>& args,
                           const nfr::ReductionConfig& cfg, nfr::TermKind kind, double t) {
  return Nested(tree, args, cfg, kind, t).run();
}

}  // namespace oracle
