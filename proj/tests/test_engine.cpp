#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "nfr/engine.hpp"
#include "oracles.hpp"

using namespace nfr;

namespace {

double rel_err(const GridFunction& a, const GridFunction& b) {
  return max_abs_diff(a, b) / std::max(1e-300, flinf_norm(b));
}

ReductionConfig config(Equation eq, double N, double delta = 0.5, int J_max = 4) {
  ReductionConfig c;
  c.equation = eq;
  c.N = N;
  c.delta = delta;
  c.J_max = J_max;
  c.s = eq == Equation::MKdV ? 0.25 : 0.0;
  return c;
}

std::vector<const GridFunction*> distinct(std::vector<GridFunction>& store, const FrequencyGrid& g, std::size_t n,
                                          std::mt19937_64& rng) {
  store.clear();
  for (std::size_t i = 0; i < n; ++i) store.push_back(oracle::random_function(g, rng, 0.5));
  std::vector<const GridFunction*> out;
  for (auto& f : store) out.push_back(&f);
  return out;
}

}  // namespace

TEST_CASE("cutoff constants and thresholds") {
  REQUIRE(cutoff_constant(1) == 125.0);
  REQUIRE(cutoff_constant(2) == 343.0);
  REQUIRE(cutoff_threshold(1, 16.0, 4.0, 0.5) == 500.0);
  REQUIRE(cutoff_threshold(1, -4.0, 9.0, 0.5) == 375.0);
  GenerationModulation gm{{8.0, 3.0}, {8.0, 400.0}, {1, 1}};
  REQUIRE(in_cutoff(1, gm, 0.5) == (400.0 <= 125.0 * std::sqrt(8.0)));
  REQUIRE(reduction_constant(Equation::CubicNLS, 1) == cplx(0, -1));
  REQUIRE(reduction_constant(Equation::MKdV, 2) == cplx(-1, 0));
}

TEST_CASE("one reduction step reproduces the restricted trilinear operators") {
  FrequencyGrid g(8.0, 33);
  std::mt19937_64 rng(21);
  auto v = oracle::random_function(g, rng, 0.5);
  for (Equation eq : {Equation::CubicNLS, Equation::MKdV}) {
    auto cfg = config(eq, 16);
    const double t = 0.013;
    auto tree = enumerate_ordered_trees(1)[0];
    auto base = eq == Equation::CubicNLS ? TrilinearSpec::nls() : TrilinearSpec::mkdv();
    base.t = t;
    auto gt = base;
    gt.window = ModulationWindow::gt(cfg.N);
    gt.kernel = KernelKind::CauchyDivided;
    auto leq = base;
    leq.window = ModulationWindow::leq(cfg.N);
    REQUIRE(rel_err(s0_compose(tree, {&v, &v, &v}, cfg, t), apply(gt, v)) <= 1e-12);
    REQUIRE(rel_err(resonant_term(v, 1, cfg, t), apply(leq, v)) <= 1e-12);
    auto big = base;
    big.window = ModulationWindow::gt(cfg.N);
    REQUIRE(rel_err(apply(big, v) + resonant_term(v, 1, cfg, t), nonlinearity(eq, v, t)) <= 1e-12);
  }
}

TEST_CASE("two-generation compositions match the dense nested sum") {
  std::mt19937_64 rng(5);
  FrequencyGrid g(16.0, 33);
  for (Equation eq : {Equation::CubicNLS, Equation::MKdV}) {
    auto cfg = config(eq, eq == Equation::CubicNLS ? 4 : 32);
    std::vector<GridFunction> store;
    auto args = distinct(store, g, 5, rng);
    const double t = eq == Equation::CubicNLS ? 0.002 : 1e-4;
    for (const auto& tree : enumerate_ordered_trees(2))
      for (auto kind : {TermKind::Boundary, TermKind::Resonant, TermKind::Remainder, TermKind::Full}) {
        auto lib = evaluate_plan(make_plan(tree, eq, kind), args, cfg, t);
        auto ref = oracle::nested(tree, args, cfg, kind, t);
        INFO(to_string(eq) << " " << to_string(kind));
        REQUIRE(flinf_norm(ref) > 1e-6);
        REQUIRE(rel_err(lib, ref) <= 1e-11);
      }
  }
}

TEST_CASE("three-generation compositions match the dense nested sum") {
  std::mt19937_64 rng(6);
  FrequencyGrid g(16.0, 9);
  for (Equation eq : {Equation::CubicNLS, Equation::MKdV}) {
    auto cfg = config(eq, 2, 0.9);
    std::vector<GridFunction> store;
    auto args = distinct(store, g, 7, rng);
    const auto& trees = enumerate_ordered_trees(3);
    for (std::size_t i = 0; i < trees.size(); i += 4)
      for (auto kind : {TermKind::Boundary, TermKind::Resonant, TermKind::Full}) {
        auto lib = evaluate_plan(make_plan(trees[i], eq, kind), args, cfg, 0.01);
        auto ref = oracle::nested(trees[i], args, cfg, kind, 0.01);
        INFO(to_string(eq) << " " << to_string(kind) << " tree " << i);
        REQUIRE(flinf_norm(ref) > 1e-8);
        REQUIRE(max_abs_diff(lib, ref) <= 1e-11 * std::max(1.0, flinf_norm(ref)));
      }
  }
}

TEST_CASE("resonant and remainder parts add up to the next-order term") {
  std::mt19937_64 rng(8);
  FrequencyGrid g(16.0, 33);
  for (Equation eq : {Equation::CubicNLS, Equation::MKdV}) {
    auto cfg = config(eq, 8);
    auto v = oracle::random_function(g, rng, 0.5);
    for (int J = 1; J <= 2; ++J) {
      auto full = next_order_term(v, J, cfg, 0.004);
      auto parts = resonant_term(v, J + 1, cfg, 0.004) + remainder_term(v, J, cfg, 0.004);
      REQUIRE(rel_err(parts, full) <= 1e-12);
    }
  }
}

TEST_CASE("next-order term equals boundary compositions with the time derivative substituted") {
  std::mt19937_64 rng(9);
  FrequencyGrid g(16.0, 33);
  for (Equation eq : {Equation::CubicNLS, Equation::MKdV}) {
    auto cfg = config(eq, 4);
    auto v = oracle::random_function(g, rng, 0.5);
    for (int J = 1; J <= 2; ++J) {
      auto a = next_order_term(v, J, cfg, 0.02);
      auto b = next_order_term_by_substitution(v, J, cfg, 0.02);
      REQUIRE(flinf_norm(a) > 1e-6);
      REQUIRE(rel_err(a, b) <= 1e-11);
    }
  }
}

TEST_CASE("mKdV shifted derivative form agrees with the unshifted enumeration") {
  std::mt19937_64 rng(10);
  FrequencyGrid g(8.0, 33);
  auto cfg = config(Equation::MKdV, 8);
  auto v = oracle::random_function(g, rng, 0.5, true);
  v.set_real_physical(true);
  for (int J = 1; J <= 2; ++J) {
    auto a = mkdv_shifted_term(v, J, cfg, 0.001);
    auto b = next_order_term(v, J, cfg, 0.001);
    REQUIRE(flinf_norm(b) > 1e-6);
    REQUIRE(rel_err(a, b) <= 1e-11);
  }
  REQUIRE_THROWS_AS(mkdv_shifted_term(v, 1, config(Equation::CubicNLS, 8), 0.0), Error);
}

TEST_CASE("NLS terms transform under reflection and conjugation") {
  std::mt19937_64 rng(11);
  FrequencyGrid g(16.0, 33);
  auto cfg = config(Equation::CubicNLS, 4);
  auto v = oracle::random_function(g, rng, 0.5);
  auto w = reflect_conj(v);
  const double t = 0.03;
  for (int j = 2; j <= 3; ++j) {
    auto lhs = boundary_term(w, j, cfg, t);
    auto rhs = reflect_conj(boundary_term(v, j, cfg, -t));
    REQUIRE(flinf_norm(rhs) > 1e-6);
    REQUIRE(rel_err(lhs, rhs) <= 1e-12);
  }
  for (int j = 1; j <= 2; ++j) {
    auto lhs = resonant_term(w, j, cfg, t);
    auto rhs = -1.0 * reflect_conj(resonant_term(v, j, cfg, -t));
    REQUIRE(rel_err(lhs, rhs) <= 1e-12);
  }
}

TEST_CASE("time derivative of a boundary term at frozen data is the previous remainder") {
  std::mt19937_64 rng(12);
  FrequencyGrid g(16.0, 33);
  for (Equation eq : {Equation::CubicNLS, Equation::MKdV}) {
    auto cfg = config(eq, 4);
    auto v = oracle::random_function(g, rng, 0.5);
    const double t = 0.01, h = 1e-6;
    // fourth-order central difference in t
    auto ddt = [&](int j) {
      auto f = [&](double dt) { return boundary_term(v, j, cfg, t + dt); };
      return (1.0 / (12 * h)) * (f(-2 * h) - f(2 * h) + 8.0 * (f(h) - f(-h)));
    };
    // generation 2: derivative is the operator restricted to |mu_1| > N
    auto d2 = ddt(2);
    auto high = eq == Equation::CubicNLS ? TrilinearSpec::nls(ModulationWindow::gt(cfg.N), KernelKind::Plain, t)
                                         : TrilinearSpec::mkdv(ModulationWindow::gt(cfg.N), KernelKind::Plain, t);
    auto r1 = apply(high, v);
    REQUIRE(rel_err(d2, r1) <= 1e-6);
    auto d3 = ddt(3);
    auto r2 = remainder_term(v, 1, cfg, t);
    REQUIRE(flinf_norm(r2) > 1e-6);
    REQUIRE(rel_err(d3, r2) <= 1e-6);
  }
}

TEST_CASE("sampled evaluation is consistent with the exact sum") {
  std::mt19937_64 rng(13);
  FrequencyGrid g(8.0, 17);
  auto cfg = config(Equation::MKdV, 2, 0.9);
  auto v = oracle::random_function(g, rng, 0.5);
  EvalOptions opt;
  opt.sampled = true;
  opt.samples = 400000;
  GridFunction err(g);
  auto approx = sum_over_trees(v, 3, TermKind::Full, cfg, 0.0, &opt, &err);
  auto exact = sum_over_trees(v, 3, TermKind::Full, cfg, 0.0);
  double worst = 0;
  for (std::size_t k = 0; k < g.n(); ++k) {
    double e = std::abs(approx[k] - exact[k]);
    double se = std::abs(err[k]);
    worst = std::max(worst, e / std::max(se, 1e-12 * flinf_norm(exact)));
  }
  REQUIRE(worst <= 6.0);
  REQUIRE(rel_err(approx, exact) <= 0.05);
}

TEST_CASE("argument count and generation limits are checked") {
  FrequencyGrid g(8.0, 17);
  GridFunction v(g);
  auto cfg = config(Equation::CubicNLS, 4, 0.5, 1);
  auto tree = enumerate_ordered_trees(2)[0];
  REQUIRE_THROWS_AS(s0_compose(tree, {&v, &v, &v}, cfg, 0.0), Error);
  REQUIRE_THROWS_AS(s1_compose(enumerate_ordered_trees(1)[0], {&v, &v, &v}, cfg, 0.0), Error);
  REQUIRE_THROWS_AS(boundary_term(v, 3, cfg, 0.0), Error);
  REQUIRE_THROWS_AS(resonant_term(v, 2, cfg, 0.0), Error);
  ReductionConfig bad = cfg;
  bad.N = 3;
  REQUIRE_THROWS_AS(bad.validate(), Error);
}

TEST_CASE("diagnostics list every tree term and the remainder") {
  std::mt19937_64 rng(14);
  FrequencyGrid g(8.0, 17);
  auto cfg = config(Equation::CubicNLS, 4, 0.5, 2);
  auto v = oracle::random_function(g, rng, 0.5);
  auto d = diagnose(v, cfg, 0.0);
  // boundary: 1 + 3 + 15 trees, resonant: 1 + 3, remainder: 1
  REQUIRE(d.size() == 24);
  for (const auto& r : d) REQUIRE(std::isfinite(r.hs));
}
