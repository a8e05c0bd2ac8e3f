#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "nfr/dispersion.hpp"
#include "nfr/trees.hpp"

using namespace nfr;

TEST_CASE("phi small examples") {
  FrequencyTuple t{2, 1, 0, 1};
  REQUIRE(phi(t) == 2.0);
  REQUIRE(phi_factored(t) == 2.0);
  REQUIRE(phi_factored_outer(t) == 2.0);
  FrequencyTuple res{0.7, 0.7, -1.3, -1.3};
  REQUIRE(phi(res) == 0.0);
  REQUIRE_THROWS_AS(phi(FrequencyTuple{1, 1, 1, 2}), Error);
}

TEST_CASE("psi small examples") {
  REQUIRE(psi(FrequencyTuple{3, 1, 1, 1}) == 24.0);
  REQUIRE(psi_factored(FrequencyTuple{3, 1, 1, 1}) == 24.0);
  REQUIRE(psi(FrequencyTuple{2, 1, -1, 2}) == 0.0);
  REQUIRE_THROWS_AS(psi(FrequencyTuple{2, 1, 1, 1}), Error);
}

TEST_CASE("factorizations hold on random constrained tuples") {
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> u(-10, 10);
  for (int i = 0; i < 100000; ++i) {
    double a = u(rng), b = u(rng), c = u(rng);
    FrequencyTuple n{a - b + c, a, b, c};
    double q = phi(n);
    REQUIRE(std::abs(q - phi_factored(n)) <= 1e-12 * (1 + std::abs(q)));
    FrequencyTuple m{a + b + c, a, b, c};
    double p = psi(m);
    REQUIRE(std::abs(p - psi_factored(m)) <= 1e-12 * (1 + std::abs(p)));
  }
}

TEST_CASE("lattice modulation agrees with the factored forms") {
  FrequencyGrid g(8.0, 33);
  for (Equation eq : {Equation::CubicNLS, Equation::MKdV}) {
    LatticeModulation lat(eq, g);
    for (long k = 0; k < 33; k += 3)
      for (long i1 = 0; i1 < 33; i1 += 2)
        for (long i2 = 0; i2 < 33; ++i2) {
          long i3 = lat.third(k, i1, i2);
          if (i3 < 0 || i3 >= 33) continue;
          FrequencyTuple t{g.node(k), g.node(i1), g.node(i2), g.node(i3)};
          double m = eq == Equation::CubicNLS ? phi_factored(t) : psi_factored(t);
          REQUIRE(lat.value(k, i1, i2, i3) == m);
          REQUIRE(std::abs(lat.key(k, i1, i2, i3)) <= lat.max_key());
        }
  }
}

TEST_CASE("interaction representation is a pointwise unitary phase") {
  FrequencyGrid g(10.0, 41);
  std::mt19937_64 rng(5);
  std::normal_distribution<double> nd;
  GridFunction f(g);
  for (std::size_t k = 0; k < g.n(); ++k) f[k] = cplx(nd(rng), nd(rng));
  for (Equation eq : {Equation::CubicNLS, Equation::MKdV}) {
    auto same = to_interaction(f, 0.0, eq);
    REQUIRE(max_abs_diff(same, f) == 0.0);
    auto v = to_interaction(f, 0.37, eq);
    auto back = from_interaction(v, 0.37, eq);
    for (std::size_t k = 0; k < g.n(); ++k) {
      REQUIRE(std::abs(back[k] - f[k]) <= 1e-14 * (1 + std::abs(f[k])));
      REQUIRE(std::abs(std::abs(v[k]) - std::abs(f[k])) <= 4e-16 * std::abs(f[k]));
    }
  }
  // NLS: exp(-i xi^2 t); mKdV: exp(+i xi^3 t)
  GridFunction one = GridFunction::from_function(g, [](double) { return 1.0; });
  auto vn = to_interaction(one, 0.1, Equation::CubicNLS);
  auto vm = to_interaction(one, 0.1, Equation::MKdV);
  std::size_t k = g.center() + 3;
  double xi = g.node(k);
  REQUIRE(std::abs(vn[k] - std::polar(1.0, -xi * xi * 0.1)) < 1e-15);
  REQUIRE(std::abs(vm[k] - std::polar(1.0, xi * xi * xi * 0.1)) < 1e-15);
}

namespace {

// Random consistent assignment: choose two children freely, the third is forced.
std::vector<double> random_assignment(const OrderedTree& t, Equation eq, std::mt19937_64& rng) {
  std::uniform_int_distribution<int> u(-10, 10);
  std::vector<double> f(t.node_count(), 0.0);
  f[0] = u(rng);
  for (int j = 1; j <= t.generations(); ++j) {
    int r = t.generation_root(j);
    auto ch = t.node(r).children;
    double a = u(rng), b = u(rng);
    f[ch[0]] = a;
    f[ch[1]] = b;
    f[ch[2]] = eq == Equation::CubicNLS ? f[r] - a + b : f[r] - a - b;
  }
  return f;
}

}  // namespace

TEST_CASE("accumulated modulations") {
  auto t1 = enumerate_ordered_trees(1)[0];
  std::vector<double> f{2, 1, 0, 1};
  auto gm = accumulate_modulations(t1, f, Equation::CubicNLS);
  REQUIRE(gm.mu[0] == 2.0);
  REQUIRE(gm.mu_tilde[0] == 2.0);
  REQUIRE(gm.sigma[0] == 1);

  // Resonant splitting in every generation gives zero modulation everywhere.
  for (const auto& t : enumerate_ordered_trees(3)) {
    std::vector<double> r(t.node_count(), 1.5);
    auto z = accumulate_modulations(t, r, Equation::CubicNLS);
    for (double m : z.mu) REQUIRE(m == 0.0);
  }

  std::mt19937_64 rng(9);
  for (Equation eq : {Equation::CubicNLS, Equation::MKdV})
    for (const auto& t : enumerate_ordered_trees(2)) {
      for (int trial = 0; trial < 50; ++trial) {
        auto a = random_assignment(t, eq, rng);
        auto m = accumulate_modulations(t, a, eq);
        // Recompute from the quadratic/cubic symbols and the conjugation flags.
        double acc = 0;
        for (int j = 1; j <= 2; ++j) {
          int r = t.generation_root(j);
          auto ch = t.node(r).children;
          double sym;
          if (eq == Equation::CubicNLS)
            sym = a[r] * a[r] - a[ch[0]] * a[ch[0]] + a[ch[1]] * a[ch[1]] - a[ch[2]] * a[ch[2]];
          else
            sym = std::pow(a[r], 3) - std::pow(a[ch[0]], 3) - std::pow(a[ch[1]], 3) - std::pow(a[ch[2]], 3);
          acc += (eq == Equation::CubicNLS && t.node(r).conj ? -1 : 1) * sym;
        }
        REQUIRE(m.mu_tilde[1] == Catch::Approx(acc).margin(1e-9));
      }
    }

  auto bad = f;
  bad[3] = 5;
  REQUIRE_THROWS_AS(accumulate_modulations(t1, bad, Equation::CubicNLS), Error);
}
