#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <map>
#include <memory>
#include <random>
#include <string>
#include <tuple>
#include <vector>

#include "nfr/dispersion.hpp"
#include "nfr/grid.hpp"
#include "nfr/modulation_index.hpp"
#include "nfr/trees.hpp"
#include "nfr/trilinear.hpp"

namespace nfr {

struct ReductionConfig {
  double N = 64.0;      // first-generation modulation threshold
  double delta = 0.5;
  double eps = 0.01;
  int J_max = 2;
  Equation equation = Equation::CubicNLS;
  double s = 0.0;       // working Sobolev index

  void validate() const {
    if (!is_dyadic(N) || N < 2.0) throw Error(ErrorKind::InvalidArgument, "N must be a power of 2, at least 2");
    if (!(delta > 0.0 && delta < 1.0)) throw Error(ErrorKind::InvalidArgument, "delta must lie in (0, 1)");
    if (!(eps > 0.0)) throw Error(ErrorKind::InvalidArgument, "eps must be positive");
    if (J_max < 1) throw Error(ErrorKind::InvalidArgument, "J_max must be at least 1");
    if (equation == Equation::CubicNLS && s < 0.0) throw Error(ErrorKind::InvalidArgument, "NLS needs s >= 0");
    if (equation == Equation::MKdV && s < 0.25) throw Error(ErrorKind::InvalidArgument, "mKdV needs s >= 1/4");
  }
};

// Constant of the cutoff set C_j: |mu~_{j+1}| <= (2j+3)^3 M_j^{1-delta}.
inline double cutoff_constant(int j) {
  double c = 2.0 * j + 3.0;
  return c * c * c;
}

// Threshold of C_j given mu~_j and mu_1, with M_j = max(|mu~_j|, |mu_1|).
inline double cutoff_threshold(int j, double mu_tilde_j, double mu1, double delta) {
  double M = std::max(std::abs(mu_tilde_j), std::abs(mu1));
  return cutoff_constant(j) * std::pow(M, 1.0 - delta);
}

// Indicator of C_j (j >= 1) on the modulations of a chronicle with at least j+1 generations.
inline bool in_cutoff(int j, const GenerationModulation& gm, double delta) {
  double thr = cutoff_threshold(j, gm.mu_tilde[static_cast<std::size_t>(j - 1)], gm.mu_tilde[0], delta);
  return std::abs(gm.mu_tilde[static_cast<std::size_t>(j)]) <= thr;
}

enum class TermKind { Boundary, Resonant, Remainder, Full };

inline const char* to_string(TermKind k) {
  switch (k) {
    case TermKind::Boundary: return "boundary";
    case TermKind::Resonant: return "resonant";
    case TermKind::Remainder: return "remainder";
    case TermKind::Full: return "full";
  }
  return "?";
}

// How a generation restricts its running modulation mu~_j.
enum class Rule {
  None,
  RootGt,   // |mu_1| > N
  RootLeq,  // |mu_1| <= N
  CutGt,    // outside C_{j-1}
  CutLeq,   // inside C_{j-1}
};

struct GenerationPlan {
  int node = 0;
  double sigma = 1.0;
  std::array<int, 3> child{};
  std::array<int, 3> slot{-1, -1, -1};  // argument slot of a terminal child, -1 if expanded later
  std::array<bool, 3> conj{};
  Rule rule = Rule::None;
  bool divide = false;
  bool split_multiplier = false;        // mKdV: write xi as |xi|^{3/4} sgn(xi)|xi|^{1/4}
};

struct CompositionPlan {
  Equation equation = Equation::CubicNLS;
  std::vector<GenerationPlan> gens;
  std::size_t nodes = 0;
  std::size_t slots = 0;
};

// Nested composition attached to one ordered tree: the root carries the
// first-generation window, deeper generation roots carry the cutoff windows,
// and kind decides the deepest operator (divided or plain, and its window).
inline CompositionPlan make_plan(const OrderedTree& t, Equation eq, TermKind kind) {
  CompositionPlan p;
  p.equation = eq;
  p.nodes = t.node_count();
  auto terms = t.terminals();
  p.slots = terms.size();
  std::vector<int> slot_of(t.node_count(), -1);
  for (std::size_t i = 0; i < terms.size(); ++i) slot_of[static_cast<std::size_t>(terms[i])] = static_cast<int>(i);
  const int J = t.generations();
  for (int j = 1; j <= J; ++j) {
    GenerationPlan g;
    g.node = t.generation_root(j);
    g.sigma = (eq == Equation::CubicNLS && t.node(g.node).conj) ? -1.0 : 1.0;
    g.child = t.node(g.node).children;
    for (int l = 0; l < 3; ++l) {
      int c = g.child[static_cast<std::size_t>(l)];
      g.slot[static_cast<std::size_t>(l)] = slot_of[static_cast<std::size_t>(c)];
      g.conj[static_cast<std::size_t>(l)] = eq == Equation::CubicNLS && t.node(c).conj;
    }
    const bool last = j == J;
    if (j == 1)
      g.rule = (last && kind == TermKind::Resonant) ? Rule::RootLeq : Rule::RootGt;
    else if (!last || kind == TermKind::Boundary || kind == TermKind::Remainder)
      g.rule = Rule::CutGt;
    else if (kind == TermKind::Resonant)
      g.rule = Rule::CutLeq;
    else
      g.rule = Rule::None;
    g.divide = !last || kind == TermKind::Boundary;
    if (g.rule == Rule::RootLeq) g.divide = false;
    p.gens.push_back(g);
  }
  return p;
}

struct EvalOptions {
  bool sampled = false;             // quasi-Monte Carlo over the inner generations
  std::size_t samples = 200000;     // per call, spread over output nodes
  std::size_t replicates = 8;       // randomly shifted copies for the error estimate
  std::uint64_t seed = 12345;
};

struct EvalResult {
  GridFunction value;
  GridFunction std_error;  // zero for exact evaluation
};

namespace detail {

// Radical inverse in base b: the Halton coordinate.
inline double halton(std::uint64_t i, unsigned b) {
  double f = 1.0, r = 0.0;
  while (i > 0) {
    f /= b;
    r += f * static_cast<double>(i % b);
    i /= b;
  }
  return r;
}

inline constexpr unsigned kPrimes[] = {2, 3, 5, 7, 11, 13, 17, 19};

// Evaluates one composition plan at a fixed time for all output nodes.
class Evaluator {
 public:
  Evaluator(const CompositionPlan& plan, const std::vector<const GridFunction*>& args, const ReductionConfig& cfg,
            double t)
      : plan_(plan), args_(args), cfg_(cfg), t_(t), grid_(args.at(0)->grid()),
        idx_(ModulationIndex::shared(plan.equation, grid_)), s_(phase_sign(plan.equation)) {
    if (args.size() != plan.slots)
      throw Error(ErrorKind::InvalidArgument, "expected " + std::to_string(plan.slots) + " arguments");
    for (auto* a : args)
      if (!(grid_ == a->grid())) throw Error(ErrorKind::GridMismatch, "argument grids differ");
    node_phase_.resize(grid_.n());
    for (std::size_t k = 0; k < grid_.n(); ++k)
      node_phase_[k] = std::polar(1.0, s_ * dispersion_power(plan.equation, grid_.node(k)) * t);
    freq_.assign(plan.nodes, 0);
  }

  GridFunction run() {
    GridFunction out(grid_);
    const double w = std::pow(grid_.dxi() * grid_.dxi(), static_cast<double>(plan_.gens.size()));
    for (std::size_t k = 0; k < grid_.n(); ++k) {
      freq_[static_cast<std::size_t>(plan_.gens[0].node)] = static_cast<int>(k);
      out[k] = descend(0, 0.0, 0.0) * w;
    }
    return out;
  }

  EvalResult run_sampled(const EvalOptions& opt) {
    EvalResult r{GridFunction(grid_), GridFunction(grid_)};
    const double w = std::pow(grid_.dxi() * grid_.dxi(), static_cast<double>(plan_.gens.size()));
    std::size_t per_node = std::max<std::size_t>(1, opt.samples / (grid_.n() * std::max<std::size_t>(1, opt.replicates)));
    std::mt19937_64 rng(opt.seed);
    std::uniform_real_distribution<double> u01(0.0, 1.0);
    const std::size_t dims = plan_.gens.size() > 1 ? plan_.gens.size() - 1 : 0;
    for (std::size_t k = 0; k < grid_.n(); ++k) {
      std::vector<cplx> means;
      for (std::size_t rep = 0; rep < opt.replicates; ++rep) {
        std::vector<double> shift(dims);
        for (auto& x : shift) x = u01(rng);
        cplx acc = 0;
        for (std::size_t i = 0; i < per_node; ++i) {
          point_.resize(dims);
          for (std::size_t d = 0; d < dims; ++d) {
            double x = halton(i + 1, kPrimes[d % 8]) + shift[d];
            point_[d] = x - std::floor(x);
          }
          freq_[static_cast<std::size_t>(plan_.gens[0].node)] = static_cast<int>(k);
          acc += descend_sampled(0, 0.0, 0.0);
        }
        means.push_back(acc / static_cast<double>(per_node));
      }
      cplx mean = 0;
      for (auto m : means) mean += m;
      mean /= static_cast<double>(means.size());
      double var = 0;
      for (auto m : means) var += std::norm(m - mean);
      var /= static_cast<double>(std::max<std::size_t>(1, means.size() - 1));
      r.value[k] = mean * w;
      r.std_error[k] = std::sqrt(var / static_cast<double>(means.size())) * w;
    }
    return r;
  }

 private:
  struct Cached {
    std::vector<cplx> weight;  // per sorted pair: phase share times argument values
    std::vector<cplx> prefix;  // prefix sums of weight
  };

  cplx value(int slot, bool conj, std::size_t i) const {
    cplx z = (*args_[static_cast<std::size_t>(slot)])[i];
    return conj ? std::conj(z) : z;
  }

  cplx multiplier(const GenerationPlan& g, std::size_t f) const {
    if (plan_.equation == Equation::CubicNLS) return cplx(0.0, g.sigma);
    double xi = grid_.node(f);
    double m = g.split_multiplier ? std::pow(std::abs(xi), 0.75) * sgn_quarter(xi) : xi;
    return cplx(0.0, -m);
  }

  double threshold(std::size_t j, double prev, double mu1) const {
    const auto& g = plan_.gens[j];
    if (g.rule == Rule::RootGt || g.rule == Rule::RootLeq) return cfg_.N;
    return cutoff_threshold(static_cast<int>(j), prev, mu1, cfg_.delta);
  }

  // At most two contiguous runs of the sorted pair list survive a window.
  struct Runs {
    IndexRange r[2];
    int n = 0;
    const IndexRange* begin() const { return r; }
    const IndexRange* end() const { return r + n; }
    std::size_t count() const { return (n > 0 ? r[0].size() : 0) + (n > 1 ? r[1].size() : 0); }
  };

  Runs runs(std::size_t j, std::size_t f, double prev, double mu1) const {
    const auto& g = plan_.gens[j];
    std::size_t end = idx_->pairs(f).size();
    Runs out;
    if (g.rule == Rule::None) {
      out.r[out.n++] = {0, end};
      return out;
    }
    auto in = idx_->inside(f, prev, g.sigma > 0 ? 1 : -1, threshold(j, prev, mu1));
    if (g.rule == Rule::RootLeq || g.rule == Rule::CutLeq) {
      out.r[out.n++] = in;
    } else {
      out.r[out.n++] = {0, in.begin};
      out.r[out.n++] = {in.end, end};
    }
    return out;
  }

  // Slots, conjugations and sign are fixed per generation, so the cache is keyed by (j, f).
  const Cached& cached(std::size_t j, std::size_t f) {
    const auto& g = plan_.gens[j];
    if (cache_.size() != plan_.gens.size()) cache_.resize(plan_.gens.size());
    auto& row = cache_[j];
    if (row.empty()) row.resize(grid_.n());
    if (row[f]) return *row[f];
    Cached c;
    const auto& pairs = idx_->pairs(f);
    c.weight.resize(pairs.size());
    c.prefix.resize(pairs.size() + 1);
    c.prefix[0] = 0;
    const bool nls = plan_.equation == Equation::CubicNLS;
    for (std::size_t p = 0; p < pairs.size(); ++p) {
      const auto& e = pairs[p];
      std::size_t i3 = static_cast<std::size_t>(idx_->third(static_cast<long>(f), e));
      // exp(i s mu t) with mu the generation's raw modulation, split over the four frequencies
      cplx ph = nls ? node_phase_[f] * std::conj(node_phase_[e.i1]) * node_phase_[e.i2] * std::conj(node_phase_[i3])
                    : node_phase_[f] * std::conj(node_phase_[e.i1] * node_phase_[e.i2] * node_phase_[i3]);
      if (g.sigma < 0) ph = std::conj(ph);
      cplx w = ph * value(g.slot[0], g.conj[0], e.i1) * value(g.slot[1], g.conj[1], e.i2) *
               value(g.slot[2], g.conj[2], i3);
      c.weight[p] = w;
      c.prefix[p + 1] = c.prefix[p] + w;
    }
    row[f] = std::make_unique<Cached>(std::move(c));
    return *row[f];
  }

  // Sum over the deepest generation with the full phase exp(i s mu~_J t).
  cplx last_generation(std::size_t j, std::size_t f, double prev, double mu1) {
    const auto& g = plan_.gens[j];
    const Runs rs = runs(j, f, prev, mu1);
    if (rs.count() == 0) return 0.0;
    const auto& c = cached(j, f);
    cplx sum = 0;
    if (g.divide) {
      const auto& pairs = idx_->pairs(f);
      for (const auto& r : rs)
        for (std::size_t p = r.begin; p < r.end; ++p) {
          if (c.weight[p] == 0.0) continue;
          double mt = prev + g.sigma * idx_->mu(pairs[p]);
          sum += c.weight[p] / mt;
        }
    } else {
      for (const auto& r : rs) sum += c.prefix[r.end] - c.prefix[r.begin];
    }
    return multiplier(g, f) * std::polar(1.0, s_ * prev * t_) * sum;
  }

  cplx descend(std::size_t j, double prev, double mu1) {
    const auto& g = plan_.gens[j];
    std::size_t f = static_cast<std::size_t>(freq_[static_cast<std::size_t>(g.node)]);
    if (j + 1 == plan_.gens.size()) return last_generation(j, f, prev, mu1);
    const Runs rs = runs(j, f, prev, mu1);
    const auto& pairs = idx_->pairs(f);
    cplx sum = 0;
    for (const auto& r : rs)
      for (std::size_t p = r.begin; p < r.end; ++p) sum += step(j, f, pairs[p], prev, mu1, false);
    return multiplier(g, f) * sum;
  }

  cplx descend_sampled(std::size_t j, double prev, double mu1) {
    const auto& g = plan_.gens[j];
    std::size_t f = static_cast<std::size_t>(freq_[static_cast<std::size_t>(g.node)]);
    if (j + 1 == plan_.gens.size()) return last_generation(j, f, prev, mu1);
    const Runs rs = runs(j, f, prev, mu1);
    const std::size_t count = rs.count();
    if (count == 0) return 0.0;
    std::size_t pick = std::min(count - 1, static_cast<std::size_t>(point_[j] * static_cast<double>(count)));
    std::size_t p = 0;
    for (const auto& r : rs) {
      if (pick < r.size()) {
        p = r.begin + pick;
        break;
      }
      pick -= r.size();
    }
    return multiplier(g, f) * static_cast<double>(count) * step(j, f, idx_->pairs(f)[p], prev, mu1, true);
  }

  cplx step(std::size_t j, std::size_t f, const PairEntry& e, double prev, double mu1, bool sampled) {
    const auto& g = plan_.gens[j];
    std::size_t i3 = static_cast<std::size_t>(idx_->third(static_cast<long>(f), e));
    std::size_t ci[3] = {e.i1, e.i2, i3};
    cplx w = 1.0;
    for (int l = 0; l < 3; ++l) {
      if (g.slot[static_cast<std::size_t>(l)] >= 0)
        w *= value(g.slot[static_cast<std::size_t>(l)], g.conj[static_cast<std::size_t>(l)], ci[l]);
      else
        freq_[static_cast<std::size_t>(g.child[static_cast<std::size_t>(l)])] = static_cast<int>(ci[l]);
    }
    if (w == 0.0) return 0.0;
    double mu = idx_->mu(e);
    double mt = prev + g.sigma * mu;
    if (g.divide) w /= mt;
    double m1 = j == 0 ? mt : mu1;
    return w * (sampled ? descend_sampled(j + 1, mt, m1) : descend(j + 1, mt, m1));
  }

  const CompositionPlan& plan_;
  std::vector<const GridFunction*> args_;
  ReductionConfig cfg_;
  double t_;
  FrequencyGrid grid_;
  std::shared_ptr<const ModulationIndex> idx_;
  double s_;
  std::vector<cplx> node_phase_;
  std::vector<int> freq_;
  std::vector<double> point_;
  std::vector<std::vector<std::unique_ptr<Cached>>> cache_;
};

inline const std::vector<OrderedTree>& trees_of(int J) {
  static std::map<int, std::vector<OrderedTree>> memo;
  auto it = memo.find(J);
  if (it == memo.end()) it = memo.emplace(J, enumerate_ordered_trees(J)).first;
  return it->second;
}

inline std::vector<const GridFunction*> repeat(const GridFunction& v, std::size_t n) {
  return std::vector<const GridFunction*>(n, &v);
}

}  // namespace detail

inline GridFunction evaluate_plan(const CompositionPlan& plan, const std::vector<const GridFunction*>& args,
                                  const ReductionConfig& cfg, double t) {
  detail::Evaluator ev(plan, args, cfg, t);
  return ev.run();
}

inline EvalResult evaluate_plan_sampled(const CompositionPlan& plan, const std::vector<const GridFunction*>& args,
                                        const ReductionConfig& cfg, double t, const EvalOptions& opt) {
  detail::Evaluator ev(plan, args, cfg, t);
  return ev.run_sampled(opt);
}

// Nested composition with the divided operator at every generation root.
inline GridFunction s0_compose(const OrderedTree& tree, const std::vector<const GridFunction*>& args,
                               const ReductionConfig& cfg, double t) {
  return evaluate_plan(make_plan(tree, cfg.equation, TermKind::Boundary), args, cfg, t);
}

// As s0_compose, but the deepest generation root carries the plain operator
// restricted to the cutoff set; needs at least two generations.
inline GridFunction s1_compose(const OrderedTree& tree, const std::vector<const GridFunction*>& args,
                               const ReductionConfig& cfg, double t) {
  if (tree.generations() < 2)
    throw Error(ErrorKind::InvalidArgument, "the first resonant term is the restricted operator itself");
  return evaluate_plan(make_plan(tree, cfg.equation, TermKind::Resonant), args, cfg, t);
}

// (i s)^J with s the phase sign: the constant produced by J integrations by parts.
inline cplx reduction_constant(Equation eq, int J) {
  cplx is(0.0, phase_sign(eq));
  cplx c = 1.0;
  for (int j = 0; j < J; ++j) c *= is;
  return c;
}

inline GridFunction sum_over_trees(const GridFunction& v, int gens, TermKind kind, const ReductionConfig& cfg, double t,
                                   const EvalOptions* opt = nullptr, GridFunction* err = nullptr) {
  if (gens == 1) {
    // a single generation is one trilinear operator
    if (err) *err = GridFunction(v.grid());
    auto spec = cfg.equation == Equation::CubicNLS ? TrilinearSpec::nls() : TrilinearSpec::mkdv();
    spec.t = t;
    spec.window = kind == TermKind::Resonant ? ModulationWindow::leq(cfg.N) : ModulationWindow::gt(cfg.N);
    if (kind == TermKind::Boundary) spec.kernel = KernelKind::CauchyDivided;
    return apply(spec, v);
  }
  GridFunction acc(v.grid());
  GridFunction var(v.grid());
  for (const auto& tree : detail::trees_of(gens)) {
    auto plan = make_plan(tree, cfg.equation, kind);
    auto args = detail::repeat(v, plan.slots);
    if (opt && opt->sampled) {
      auto r = evaluate_plan_sampled(plan, args, cfg, t, *opt);
      acc += r.value;
      for (std::size_t k = 0; k < var.size(); ++k) var[k] += std::norm(r.std_error[k]);
    } else {
      acc += evaluate_plan(plan, args, cfg, t);
    }
  }
  if (err) {
    *err = GridFunction(v.grid());
    for (std::size_t k = 0; k < var.size(); ++k) (*err)[k] = std::sqrt(var[k].real());
  }
  return acc;
}

// Boundary term of generation j >= 2 (built on the trees of generation j-1).
inline GridFunction boundary_term(const GridFunction& v, int j, const ReductionConfig& cfg, double t,
                                  const EvalOptions* opt = nullptr) {
  if (j < 2) throw Error(ErrorKind::InvalidArgument, "boundary terms start at generation 2");
  if (j - 1 > cfg.J_max) throw Error(ErrorKind::InvalidArgument, "boundary generation exceeds J_max + 1");
  auto s = sum_over_trees(v, j - 1, TermKind::Boundary, cfg, t, opt);
  return -reduction_constant(cfg.equation, j - 1) * s;
}

// Resonant term of generation j >= 1; j = 1 is the operator restricted to |mu_1| <= N.
inline GridFunction resonant_term(const GridFunction& v, int j, const ReductionConfig& cfg, double t,
                                  const EvalOptions* opt = nullptr) {
  if (j < 1) throw Error(ErrorKind::InvalidArgument, "resonant terms start at generation 1");
  if (j > cfg.J_max) throw Error(ErrorKind::InvalidArgument, "resonant generation exceeds J_max");
  auto s = sum_over_trees(v, j, TermKind::Resonant, cfg, t, opt);
  return reduction_constant(cfg.equation, j - 1) * s;
}

// Remainder after J reductions: generation J+1 trees outside every cutoff set.
inline GridFunction remainder_term(const GridFunction& v, int J, const ReductionConfig& cfg, double t,
                                   const EvalOptions* opt = nullptr) {
  if (J < 1) throw Error(ErrorKind::InvalidArgument, "J must be at least 1");
  auto s = sum_over_trees(v, J + 1, TermKind::Remainder, cfg, t, opt);
  return reduction_constant(cfg.equation, J) * s;
}

// The whole term produced at step J (resonant plus remainder parts), i.e. what
// is dropped when the reduction stops after J steps.
inline GridFunction next_order_term(const GridFunction& v, int J, const ReductionConfig& cfg, double t,
                                    const EvalOptions* opt = nullptr) {
  if (J < 1) throw Error(ErrorKind::InvalidArgument, "J must be at least 1");
  auto s = sum_over_trees(v, J + 1, TermKind::Full, cfg, t, opt);
  return reduction_constant(cfg.equation, J) * s;
}

// Same quantity, written as boundary compositions of generation J with one
// argument replaced by the time derivative dv/dt = N(v).
inline GridFunction next_order_term_by_substitution(const GridFunction& v, int J, const ReductionConfig& cfg, double t) {
  GridFunction dv = nonlinearity(cfg.equation, v, t);
  GridFunction acc(v.grid());
  for (const auto& tree : detail::trees_of(J)) {
    auto plan = make_plan(tree, cfg.equation, TermKind::Boundary);
    for (std::size_t p = 0; p < plan.slots; ++p) {
      auto args = detail::repeat(v, plan.slots);
      args[p] = &dv;
      acc += evaluate_plan(plan, args, cfg, t);
    }
  }
  return reduction_constant(cfg.equation, J) * acc;
}

// mKdV: the same term with the derivative multipliers regrouped so that every
// generation along the path to the expanded terminal carries |xi|^{1/4}, and
// the innermost operator is the quarter-derivative one.
inline GridFunction mkdv_shifted_term(const GridFunction& v, int J, const ReductionConfig& cfg, double t) {
  if (cfg.equation != Equation::MKdV) throw Error(ErrorKind::InvalidArgument, "shifted form is defined for mKdV");
  GridFunction m = apply_mkdv_quarter(v, t);
  GridFunction g(v.grid());
  for (std::size_t k = 0; k < g.size(); ++k) g[k] = std::pow(std::abs(v.grid().node(k)), 0.75) * m[k];
  GridFunction acc(v.grid());
  for (const auto& tree : detail::trees_of(J)) {
    auto base = make_plan(tree, cfg.equation, TermKind::Boundary);
    auto terms = tree.terminals();
    for (std::size_t p = 0; p < terms.size(); ++p) {
      auto plan = base;
      auto on_path = tree.path_generation_set(terms[p]);
      for (int j = 1; j <= J; ++j) plan.gens[static_cast<std::size_t>(j - 1)].split_multiplier = on_path.count(j) > 0;
      auto args = detail::repeat(v, plan.slots);
      args[p] = &g;
      acc += evaluate_plan(plan, args, cfg, t);
    }
  }
  return reduction_constant(cfg.equation, J) * acc;
}

struct TermDiagnostic {
  int gen = 0;
  TermKind kind = TermKind::Boundary;
  int tree_index = 0;
  double l2 = 0, hs = 0, flinf = 0;
};

// Per-tree norms of every boundary/resonant term up to J_max, plus the remainder.
inline std::vector<TermDiagnostic> diagnose(const GridFunction& v, const ReductionConfig& cfg, double t) {
  std::vector<TermDiagnostic> out;
  auto record = [&](int gen, TermKind kind, int idx, const GridFunction& f) {
    out.push_back({gen, kind, idx, l2_norm(f), sobolev_norm(f, cfg.s), flinf_norm(f)});
  };
  for (int j = 1; j <= cfg.J_max + 1; ++j) {
    const auto& trees = detail::trees_of(j);
    for (std::size_t i = 0; i < trees.size(); ++i) {
      auto args = detail::repeat(v, static_cast<std::size_t>(2 * j + 1));
      auto b = evaluate_plan(make_plan(trees[i], cfg.equation, TermKind::Boundary), args, cfg, t);
      record(j + 1, TermKind::Boundary, static_cast<int>(i), -reduction_constant(cfg.equation, j) * b);
      if (j <= cfg.J_max) {
        auto r = evaluate_plan(make_plan(trees[i], cfg.equation, TermKind::Resonant), args, cfg, t);
        record(j, TermKind::Resonant, static_cast<int>(i), reduction_constant(cfg.equation, j - 1) * r);
      }
    }
  }
  record(cfg.J_max + 1, TermKind::Remainder, -1, remainder_term(v, cfg.J_max, cfg, t));
  return out;
}

}  // namespace nfr
