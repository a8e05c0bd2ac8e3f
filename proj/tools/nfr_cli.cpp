#include <CLI11.hpp>

#include <iostream>

#include "nfr/io.hpp"

using namespace nfr;

namespace {

struct Options {
  std::string config;
  std::string out;
  std::string seed;
  bool deterministic = false;
  int trees_J = -1;
  bool serialize = false;
  std::string lemma;
  int trials = -1;
};

RunConfig load(const Options& o) {
  auto text = o.config.empty() ? ConfigText{} : ConfigText::load(o.config);
  if (!o.seed.empty()) text.set("run.seed", o.seed);
  if (o.deterministic) text.set("run.deterministic", "true");
  if (!o.lemma.empty()) text.set("verify.lemma", o.lemma);
  if (o.trials >= 0) text.set("verify.trials", std::to_string(o.trials));
  if (o.trees_J >= 0) text.set("trees.J", std::to_string(o.trees_J));
  auto rc = run_config(text);
  if (!o.out.empty()) rc.out = o.out;
  return rc;
}

json run_echo(const RunConfig& rc) {
  return {{"seed", rc.seed}, {"deterministic", rc.deterministic}, {"xi_max", rc.xi_max}, {"n", rc.n},
          {"datum", rc.datum.kind}};
}

int cmd_trees(const Options& o) {
  auto rc = load(o);
  if (rc.trees_J < 1 || rc.trees_J > kDefaultMaxGenerations)
    throw Error(ErrorKind::ResourceLimit, "J must lie in 1.." + std::to_string(kDefaultMaxGenerations));
  std::cout << ordered_tree_count(rc.trees_J) << "\n";
  if (o.serialize || !o.out.empty()) {
    json all = json::array();
    for (const auto& t : enumerate_ordered_trees(rc.trees_J)) all.push_back(tree_json(t));
    write_json(fs::path(rc.out) / "trees.json", {{"J", rc.trees_J}, {"trees", all}});
  }
  return 0;
}

int cmd_solve(const Options& o) {
  auto rc = load(o);
  auto u0 = make_datum(rc);
  auto [v, rep] = solve_normal_form(u0, rc.reduction, rc.solver);
  ReductionConfig used = rc.reduction;
  used.N = rep.N;
  fs::path dir(rc.out);
  write_trajectory(dir / "trajectory", v, used, rep, {{"run", run_echo(rc)}});
  write_diagnostics(dir / "diagnostics.csv", diagnose(v.states.back(), used, v.times.back()));
  std::cout << "converged " << rep.converged << " iterations " << rep.iterations << " residual "
            << rep.final_residual << " N " << rep.N << " T " << rep.T << "\n";
  return rep.converged ? 0 : 1;
}

int cmd_compare(const Options& o) {
  auto rc = load(o);
  auto u0 = make_datum(rc);
  auto c = compare_solutions(u0, rc.reduction, rc.solver);
  bool ok = c.report.converged && c.max_discrepancy <= c.budget();
  write_json(fs::path(rc.out) / "compare.json",
             {{"times", c.times},
              {"discrepancy", c.discrepancy},
              {"max_discrepancy", c.max_discrepancy},
              {"tail_budget", c.tail_budget},
              {"quadrature_budget", c.quadrature_budget},
              {"time_budget", c.time_budget},
              {"budget", c.budget()},
              {"within_budget", ok},
              {"report", report_json(c.report)},
              {"run", run_echo(rc)}});
  std::cout << "discrepancy " << c.max_discrepancy << " budget " << c.budget() << (ok ? " ok" : " exceeded") << "\n";
  return ok ? 0 : 1;
}

int cmd_verify(const Options& o) {
  auto rc = load(o);
  auto l = parse_lemma(rc.lemma);
  auto rep = verify_lemma(l, rc.sweep);
  fs::path dir(rc.out);
  write_lemma_report(dir, rep);
  bool ok = rep.slope_ok;
  if (l == Lemma::Extra) {
    auto r = refinement_sweep(l, 0.25, 3, rc.sweep.trials, 0.25, 8, rc.sweep.seed);
    ok = r.growth_per_level <= 0.1;
    write_json(dir / "refinement.json",
               {{"n", r.n}, {"sup_ratio", r.sup_ratio}, {"growth_per_level", r.growth_per_level}, {"bounded", ok}});
    std::cout << to_string(l) << " growth per refinement " << r.growth_per_level << (ok ? " ok" : " grows") << "\n";
  } else {
    std::cout << to_string(l) << " slope " << rep.fit.slope << " bound " << rep.slope_bound
              << (ok ? " ok" : " violated") << "\n";
  }
  return ok ? 0 : 1;
}

int cmd_decay(const Options& o) {
  auto rc = load(o);
  auto r = decay_fit(rc.decay);
  write_decay_report(fs::path(rc.out), rc.decay, r);
  if (rc.decay.axis == Axis::J) {
    bool dec = true;
    for (std::size_t i = 1; i < r.y.size(); ++i) dec = dec && r.y[i] < r.y[i - 1];
    std::cout << to_string(rc.decay.quantity) << " strictly decreasing in J: " << (dec ? "yes" : "no") << "\n";
    return dec ? 0 : 1;
  }
  if (!r.fit_defined) throw Error(ErrorKind::FitUndefined, "fewer than 3 usable points");
  bool ok = std::abs(r.fit.slope - r.predicted) <= 0.15;
  std::cout << to_string(rc.decay.quantity) << " slope " << r.fit.slope << " predicted " << r.predicted
            << (ok ? " ok" : " off") << "\n";
  return ok ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Normal-form reduction engine for cubic NLS and mKdV"};
  app.require_subcommand(1);
  Options o;
  app.add_option("--config", o.config, "key=value configuration file");
  app.add_option("--out", o.out, "output directory (overrides run.out)");
  app.add_flag("--deterministic", o.deterministic, "serial, bit-reproducible execution");
  app.add_option("--seed", o.seed, "random seed (overrides run.seed)");

  auto* trees = app.add_subcommand("trees", "count (and optionally serialize) ordered trees");
  trees->add_option("J", o.trees_J, "number of generations");
  trees->add_flag("--serialize", o.serialize, "write trees.json to the output directory");
  auto* solve = app.add_subcommand("solve", "solve the normal-form equation");
  auto* compare = app.add_subcommand("compare", "compare against the reference integrator");
  auto* verify = app.add_subcommand("verify", "empirical sweep of a trilinear estimate");
  verify->add_option("--lemma", o.lemma, "NLS1 NLS2 KdV1 KdV2 NLS3 NLS4 Extra mk1 mk2");
  verify->add_option("--trials", o.trials, "trials per sweep point");
  auto* decay = app.add_subcommand("decay", "decay fit of a reduction term");
  for (auto* sub : {trees, solve, compare, verify, decay}) {
    sub->add_option("--config", o.config, "key=value configuration file");
    sub->add_option("--out", o.out, "output directory (overrides run.out)");
    sub->add_flag("--deterministic", o.deterministic, "serial, bit-reproducible execution");
    sub->add_option("--seed", o.seed, "random seed (overrides run.seed)");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (*trees) return cmd_trees(o);
    if (*solve) return cmd_solve(o);
    if (*compare) return cmd_compare(o);
    if (*verify) return cmd_verify(o);
    if (*decay) return cmd_decay(o);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return e.kind() == ErrorKind::Config || e.kind() == ErrorKind::Io ? 2 : 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
