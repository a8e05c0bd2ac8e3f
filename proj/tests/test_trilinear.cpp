#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "nfr/trilinear.hpp"
#include "oracles.hpp"

using namespace nfr;

namespace {

double rel_err(const GridFunction& a, const GridFunction& b) {
  return max_abs_diff(a, b) / std::max(1.0, flinf_norm(b));
}

}  // namespace

TEST_CASE("zero inputs give zero output") {
  FrequencyGrid g(8.0, 33);
  GridFunction z(g);
  for (auto s : {TrilinearSpec::nls(), TrilinearSpec::mkdv(ModulationWindow::gt(4), KernelKind::CauchyDivided)})
    REQUIRE(flinf_norm(apply(s, z)) == 0.0);
}

TEST_CASE("unrestricted NLS operator on an indicator matches the dense oracle") {
  FrequencyGrid g(8.0, 65);
  auto ind = GridFunction::from_function(g, [](double x) { return (x >= 0 && x <= 1) ? 1.0 : 0.0; });
  auto s = TrilinearSpec::nls();
  REQUIRE(max_abs_diff(apply(s, ind), oracle::trilinear(s, ind, ind, ind)) <= 1e-10);
}

TEST_CASE("random specifications match the dense oracle") {
  std::mt19937_64 rng(77);
  for (std::size_t n : {33u, 65u}) {
    FrequencyGrid g(n == 33 ? 8.0 : 16.0, n);
    for (int trial = 0; trial < 25; ++trial) {
      auto s = oracle::random_spec(rng, g);
      auto a = oracle::random_function(g, rng, 0.5), b = oracle::random_function(g, rng, 0.5),
           c = oracle::random_function(g, rng, 0.5);
      INFO("trial " << trial << " n " << n);
      REQUIRE(max_abs_diff(apply(s, a, b, c), oracle::trilinear(s, a, b, c)) <= 1e-10);
    }
  }
}

TEST_CASE("shell window equals the difference of two cumulative windows") {
  FrequencyGrid g(8.0, 65);
  std::mt19937_64 rng(1);
  auto v = oracle::random_function(g, rng, 0.3);
  for (double M : {1.0, 4.0, 16.0})
    for (double alpha : {0.0, 3.0, -10.5}) {
      auto shell = apply(TrilinearSpec::nls(ModulationWindow::shell(M, alpha), KernelKind::Plain, 0.01), v);
      auto big = apply(TrilinearSpec::nls(ModulationWindow::leq(2 * M, alpha), KernelKind::Plain, 0.01), v);
      auto small = apply(TrilinearSpec::nls(ModulationWindow::leq(M, alpha), KernelKind::Plain, 0.01), v);
      REQUIRE(max_abs_diff(shell, big - small) <= 1e-12 * std::max(1.0, flinf_norm(big)));
    }
}

TEST_CASE("multilinearity with conjugate-linear middle slot") {
  FrequencyGrid g(8.0, 33);
  std::mt19937_64 rng(3);
  auto v1 = oracle::random_function(g, rng), w1 = oracle::random_function(g, rng), v2 = oracle::random_function(g, rng),
       v3 = oracle::random_function(g, rng);
  cplx a(0.3, -1.2), b(2.0, 0.5);
  auto s = TrilinearSpec::nls(ModulationWindow::leq(16, 2.0), KernelKind::Plain, 0.05);
  auto lhs = apply(s, a * v1 + b * w1, v2, v3);
  auto rhs = a * apply(s, v1, v2, v3) + b * apply(s, w1, v2, v3);
  REQUIRE(rel_err(lhs, rhs) <= 1e-12);
  auto lhs2 = apply(s, v1, a * v2 + b * w1, v3);
  auto rhs2 = std::conj(a) * apply(s, v1, v2, v3) + std::conj(b) * apply(s, v1, w1, v3);
  REQUIRE(rel_err(lhs2, rhs2) <= 1e-12);
}

TEST_CASE("a window wider than every grid modulation is no restriction") {
  FrequencyGrid g(8.0, 33);
  std::mt19937_64 rng(4);
  auto v = oracle::random_function(g, rng);
  for (Equation eq : {Equation::CubicNLS, Equation::MKdV}) {
    LatticeModulation lat(eq, g);
    double big = 2 * lat.unit * static_cast<double>(lat.max_key());
    auto full = eq == Equation::CubicNLS ? TrilinearSpec::nls({}, KernelKind::Plain, 0.02)
                                         : TrilinearSpec::mkdv({}, KernelKind::Plain, 0.02);
    auto win = full;
    win.window = ModulationWindow::leq(big);
    REQUIRE(rel_err(apply(win, v), apply(full, v)) <= 1e-12);
  }
}

TEST_CASE("mKdV operators preserve real-valuedness") {
  FrequencyGrid g(8.0, 65);
  std::mt19937_64 rng(5);
  auto v = oracle::random_function(g, rng, 0.5, true);
  v.set_real_physical(true);
  for (auto w : {ModulationWindow::none(), ModulationWindow::leq(64), ModulationWindow::shell(32)}) {
    auto out = apply(TrilinearSpec::mkdv(w, KernelKind::Plain, 0.003), v);
    REQUIRE(out.real_physical());
    REQUIRE(hermitian_defect(out) <= 1e-12);
  }
  REQUIRE(hermitian_defect(apply_mkdv_quarter(v, 0.01)) <= 1e-12);
}

TEST_CASE("divided kernel equals the plain integrand divided by the shifted modulation") {
  FrequencyGrid g(16.0, 33);
  std::mt19937_64 rng(6);
  auto v = oracle::random_function(g, rng);
  auto s = TrilinearSpec::nls(ModulationWindow::shell(8, 1.0), KernelKind::CauchyDivided, 0.1);
  auto plain = s;
  plain.kernel = KernelKind::Plain;
  // Sum the shell in pieces of constant modulation and divide each piece by hand.
  GridFunction pieced(g);
  LatticeModulation lat(Equation::CubicNLS, g);
  for (long long key = -lat.max_key(); key <= lat.max_key(); ++key) {
    double m = lat.unit * static_cast<double>(key);
    if (!s.window.admits(m)) continue;
    auto one = plain;
    one.window = ModulationWindow::leq(1.0, m);  // picks out exactly this lattice value
    auto part = apply(one, v);
    pieced += (1.0 / (m - 1.0)) * part;
  }
  REQUIRE(rel_err(apply(s, v), pieced) <= 1e-12);
}

TEST_CASE("quarter-derivative operator") {
  FrequencyGrid g(8.0, 33);
  GridFunction z(g, true);
  REQUIRE(flinf_norm(apply_mkdv_quarter(z, 0.0)) == 0.0);
  std::mt19937_64 rng(8);
  auto v = oracle::random_function(g, rng, 1.0, true);
  auto m = apply_mkdv_quarter(v, 0.2);
  REQUIRE(m[g.center()] == cplx(0.0, 0.0));
  auto s = TrilinearSpec::mkdv({}, KernelKind::Plain, 0.2);
  s.weight = WeightKind::SgnQuarter;
  REQUIRE(max_abs_diff(m, oracle::trilinear(s, v, v, v)) <= 1e-10);
}

TEST_CASE("invalid specifications are rejected") {
  FrequencyGrid g(8.0, 33), h(4.0, 33);
  GridFunction a(g), b(h);
  REQUIRE_THROWS_AS(apply(TrilinearSpec::nls(), a, a, b), Error);
  REQUIRE_THROWS_AS(apply(TrilinearSpec::nls(ModulationWindow::leq(4), KernelKind::CauchyDivided), a), Error);
  REQUIRE_THROWS_AS(apply(TrilinearSpec::nls(ModulationWindow::gt(0.5), KernelKind::CauchyDivided), a), Error);
  REQUIRE_THROWS_AS(apply(TrilinearSpec::nls({}, KernelKind::CauchyDivided), a), Error);
}

TEST_CASE("index windows agree with a linear scan") {
  std::mt19937_64 rng(77);
  for (Equation eq : {Equation::CubicNLS, Equation::MKdV}) {
    FrequencyGrid g(4.0, 33);
    ModulationIndex idx(eq, g);
    std::uniform_int_distribution<std::size_t> node(0, g.n() - 1);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int trial = 0; trial < 400; ++trial) {
      std::size_t k = node(rng);
      const auto& v = idx.pairs(k);
      double scale = idx.unit() * static_cast<double>(idx.lattice().max_key());
      double offset = trial % 5 == 0 ? 0.0 : u(rng) * scale;
      // exact lattice values land right on the window edge
      double tau = trial % 3 == 0 ? idx.unit() * std::round(std::abs(u(rng)) * 50) : std::abs(u(rng)) * scale;
      int sigma = trial % 2 ? 1 : -1;
      auto r = idx.inside(k, offset, sigma, tau);
      for (std::size_t p = 0; p < v.size(); ++p) {
        bool in = std::abs(offset + sigma * idx.mu(v[p])) <= tau;
        REQUIRE(in == (p >= r.begin && p < r.end));
      }
      long K = std::lround(u(rng) * static_cast<double>(idx.lattice().max_key()) * 1.2);
      auto ref = std::lower_bound(v.begin(), v.end(), K, [](const PairEntry& e, long key) { return e.key < key; });
      REQUIRE(idx.first_at_least(k, K) == static_cast<std::size_t>(ref - v.begin()));
    }
  }
}
