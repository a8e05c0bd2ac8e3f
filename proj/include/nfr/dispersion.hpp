#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "nfr/error.hpp"
#include "nfr/grid.hpp"
#include "nfr/trees.hpp"

namespace nfr {

enum class Equation { CubicNLS, MKdV };

inline const char* to_string(Equation eq) { return eq == Equation::CubicNLS ? "nls" : "mkdv"; }

inline Equation parse_equation(const std::string& s) {
  if (s == "nls" || s == "NLS" || s == "cubic_nls") return Equation::CubicNLS;
  if (s == "mkdv" || s == "mKdV" || s == "MKDV") return Equation::MKdV;
  throw Error(ErrorKind::InvalidArgument, "unknown equation '" + s + "'");
}

// Sign s such that the oscillatory factor of a generation with modulation m is exp(i s m t).
inline double phase_sign(Equation eq) { return eq == Equation::CubicNLS ? -1.0 : 1.0; }

inline constexpr double kConstraintTol = 1e-9;

struct FrequencyTuple {
  double xi = 0, xi1 = 0, xi2 = 0, xi3 = 0;
};

inline double tuple_scale(const FrequencyTuple& t) {
  return std::max({1.0, std::abs(t.xi), std::abs(t.xi1), std::abs(t.xi2), std::abs(t.xi3)});
}

inline bool nls_constrained(const FrequencyTuple& t) {
  return std::abs(t.xi - (t.xi1 - t.xi2 + t.xi3)) <= kConstraintTol * tuple_scale(t);
}

inline bool mkdv_constrained(const FrequencyTuple& t) {
  return std::abs(t.xi - (t.xi1 + t.xi2 + t.xi3)) <= kConstraintTol * tuple_scale(t);
}

inline double phi(const FrequencyTuple& t) {
  if (!nls_constrained(t)) throw Error(ErrorKind::InvalidTuple, "xi != xi1 - xi2 + xi3");
  return t.xi * t.xi - t.xi1 * t.xi1 + t.xi2 * t.xi2 - t.xi3 * t.xi3;
}

inline double phi_factored(const FrequencyTuple& t) { return 2.0 * (t.xi2 - t.xi1) * (t.xi2 - t.xi3); }
inline double phi_factored_outer(const FrequencyTuple& t) { return 2.0 * (t.xi - t.xi1) * (t.xi - t.xi3); }

inline double psi(const FrequencyTuple& t) {
  if (!mkdv_constrained(t)) throw Error(ErrorKind::InvalidTuple, "xi != xi1 + xi2 + xi3");
  return t.xi * t.xi * t.xi - t.xi1 * t.xi1 * t.xi1 - t.xi2 * t.xi2 * t.xi2 - t.xi3 * t.xi3 * t.xi3;
}

inline double psi_factored(const FrequencyTuple& t) {
  return 3.0 * (t.xi1 + t.xi2) * (t.xi2 + t.xi3) * (t.xi3 + t.xi1);
}

inline double modulation(Equation eq, const FrequencyTuple& t) {
  return eq == Equation::CubicNLS ? phi(t) : psi(t);
}

// Grid-index form of the frequency constraint and of the modulation.  On a
// uniform grid the modulation is an integer multiple of a fixed unit, so the
// factored forms are evaluated exactly in integer arithmetic.
struct LatticeModulation {
  Equation eq;
  long c;        // center index
  long n;
  double unit;   // Phi = unit * key (NLS), Psi = unit * key (mKdV)

  LatticeModulation(Equation e, const FrequencyGrid& g)
      : eq(e), c(static_cast<long>(g.center())), n(static_cast<long>(g.n())),
        unit(e == Equation::CubicNLS ? 2.0 * g.dxi() * g.dxi() : 3.0 * g.dxi() * g.dxi() * g.dxi()) {}

  long third(long k, long i1, long i2) const {
    return eq == Equation::CubicNLS ? k - i1 + i2 : k - i1 - i2 + 2 * c;
  }

  long long key(long k, long i1, long i2, long i3) const {
    if (eq == Equation::CubicNLS) return static_cast<long long>(i2 - i1) * (i2 - i3);
    long long a = k - i1, b = k - i2, d = k - i3;
    return a * b * d;
  }

  double value(long k, long i1, long i2, long i3) const { return unit * static_cast<double>(key(k, i1, i2, i3)); }

  // Largest |key| reachable on the grid.
  long long max_key() const {
    long long m = n - 1;
    return eq == Equation::CubicNLS ? m * m : m * m * m;
  }
};

// Exact exponent of the free propagator in the interaction representation.
inline double free_phase(Equation eq, double xi) {
  return eq == Equation::CubicNLS ? -xi * xi : xi * xi * xi;
}

inline GridFunction to_interaction(const GridFunction& u, double t, Equation eq) {
  GridFunction v = u;
  for (std::size_t k = 0; k < u.size(); ++k) v[k] = u[k] * std::polar(1.0, free_phase(eq, u.grid().node(k)) * t);
  return v;
}

inline GridFunction from_interaction(const GridFunction& v, double t, Equation eq) {
  GridFunction u = v;
  for (std::size_t k = 0; k < v.size(); ++k) u[k] = v[k] * std::polar(1.0, -free_phase(eq, v.grid().node(k)) * t);
  return u;
}

struct GenerationModulation {
  std::vector<double> mu;        // raw modulation of each generation
  std::vector<double> mu_tilde;  // signed running sums
  std::vector<int> sigma;        // +1 / -1 conjugation sign of each generation root
};

// Frequencies are given per node id of the tree.
inline GenerationModulation accumulate_modulations(const OrderedTree& tree, const std::vector<double>& freqs,
                                                   Equation eq) {
  if (freqs.size() != tree.node_count())
    throw Error(ErrorKind::InvalidIndex, "frequency assignment does not cover every node");
  GenerationModulation gm;
  double acc = 0.0;
  for (int j = 1; j <= tree.generations(); ++j) {
    int r = tree.generation_root(j);
    const auto& ch = tree.node(r).children;
    FrequencyTuple t{freqs[static_cast<std::size_t>(r)], freqs[static_cast<std::size_t>(ch[0])],
                     freqs[static_cast<std::size_t>(ch[1])], freqs[static_cast<std::size_t>(ch[2])]};
    bool ok = eq == Equation::CubicNLS ? nls_constrained(t) : mkdv_constrained(t);
    if (!ok) throw Error(ErrorKind::InvalidIndex, "inconsistent frequencies at generation " + std::to_string(j));
    double m = eq == Equation::CubicNLS ? phi_factored(t) : psi_factored(t);
    int s = (eq == Equation::CubicNLS && tree.node(r).conj) ? -1 : 1;
    acc += s * m;
    gm.mu.push_back(m);
    gm.sigma.push_back(s);
    gm.mu_tilde.push_back(acc);
  }
  return gm;
}

}  // namespace nfr
