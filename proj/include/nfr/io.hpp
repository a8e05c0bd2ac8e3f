#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "nfr/config.hpp"
#include "nfr/engine.hpp"
#include "nfr/harness.hpp"
#include "nfr/solver.hpp"
#include "nfr/trees.hpp"

namespace nfr {

using json = nlohmann::json;

namespace fs = std::filesystem;

inline std::ofstream open_out(const fs::path& p) {
  if (p.has_parent_path()) {
    std::error_code ec;
    fs::create_directories(p.parent_path(), ec);
    if (ec) throw Error(ErrorKind::Io, "cannot create directory '" + p.parent_path().string() + "'");
  }
  std::ofstream out(p);
  if (!out) throw Error(ErrorKind::Io, "cannot write '" + p.string() + "'");
  return out;
}

inline void write_json(const fs::path& p, const json& j) {
  auto out = open_out(p);
  out << j.dump(2) << "\n";
  if (!out) throw Error(ErrorKind::Io, "write failed for '" + p.string() + "'");
}

inline std::string g17(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

// xi,re,im rows plus a {xi_max, n, real_physical} sidecar next to the CSV.
inline void write_snapshot(const fs::path& csv, const GridFunction& f) {
  auto out = open_out(csv);
  out << "xi,re,im\n";
  const auto& g = f.grid();
  for (std::size_t k = 0; k < g.n(); ++k)
    out << g17(g.node(k)) << ',' << g17(f[k].real()) << ',' << g17(f[k].imag()) << '\n';
  if (!out) throw Error(ErrorKind::Io, "write failed for '" + csv.string() + "'");
  auto side = csv;
  side.replace_extension(".json");
  write_json(side, {{"xi_max", g.xi_max()}, {"n", g.n()}, {"real_physical", f.real_physical()}});
}

inline GridFunction read_snapshot(const fs::path& csv) {
  auto side = csv;
  side.replace_extension(".json");
  std::ifstream js(side);
  if (!js) throw Error(ErrorKind::Io, "missing sidecar '" + side.string() + "'");
  json meta;
  try {
    meta = json::parse(js);
  } catch (const json::exception& e) {
    throw Error(ErrorKind::Io, "bad sidecar '" + side.string() + "': " + e.what());
  }
  FrequencyGrid g;
  bool real = false;
  try {
    g = FrequencyGrid(meta.at("xi_max").get<double>(), meta.at("n").get<std::size_t>());
    real = meta.value("real_physical", false);
  } catch (const json::exception& e) {
    throw Error(ErrorKind::Io, "bad sidecar '" + side.string() + "': " + e.what());
  }
  std::ifstream in(csv);
  if (!in) throw Error(ErrorKind::Io, "cannot read '" + csv.string() + "'");
  std::string line;
  if (!std::getline(in, line) || line != "xi,re,im") throw Error(ErrorKind::Io, "snapshot header must be xi,re,im");
  GridFunction f(g, real);
  std::size_t k = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (k >= g.n()) throw Error(ErrorKind::Io, "snapshot has more rows than the grid");
    double xi, re, im;
    char c1, c2;
    std::istringstream row(line);
    if (!(row >> xi >> c1 >> re >> c2 >> im) || c1 != ',' || c2 != ',')
      throw Error(ErrorKind::Io, "malformed snapshot row " + std::to_string(k + 1));
    if (std::abs(xi - g.node(k)) > 0.5 * g.dxi()) throw Error(ErrorKind::Io, "snapshot node off the grid");
    f[k++] = cplx(re, im);
  }
  if (k != g.n()) throw Error(ErrorKind::Io, "snapshot has fewer rows than the grid");
  return f;
}

inline json tree_json(const OrderedTree& t) {
  json children = json::array(), gen = json::array(), conj = json::array();
  for (std::size_t a = 0; a < t.node_count(); ++a) {
    const auto& nd = t.node(static_cast<int>(a));
    children.push_back(nd.gen == 0 ? json::array() : json(nd.children));
    gen.push_back(nd.gen);
    conj.push_back(nd.conj);
  }
  return {{"children", children}, {"gen", gen}, {"conj", conj}};
}

inline json config_json(const ReductionConfig& c) {
  return {{"equation", to_string(c.equation)}, {"N", c.N}, {"delta", c.delta},
          {"eps", c.eps}, {"J_max", c.J_max}, {"s", c.s}};
}

inline json report_json(const SolveReport& r) {
  return {{"converged", r.converged}, {"iterations", r.iterations}, {"final_residual", r.final_residual},
          {"N", r.N}, {"T", r.T}, {"residuals", r.residuals}};
}

// state_XXXX.csv (+ sidecar) per mesh time and trajectory.json with norms and the run echo.
inline void write_trajectory(const fs::path& dir, const Trajectory& tr, const ReductionConfig& cfg,
                             const SolveReport& rep, const json& extra = json::object()) {
  json files = json::array();
  for (std::size_t i = 0; i < tr.size(); ++i) {
    char name[32];
    std::snprintf(name, sizeof name, "state_%04zu.csv", i);
    write_snapshot(dir / name, tr.states[i]);
    files.push_back(name);
  }
  json j{{"times", tr.times},
         {"hs_norms", tr.hs_norms(cfg.s)},
         {"flinf_norms", tr.flinf_norms()},
         {"files", files},
         {"config", config_json(cfg)},
         {"report", report_json(rep)}};
  for (auto& [k, v] : extra.items()) j[k] = v;
  write_json(dir / "trajectory.json", j);
}

inline void write_diagnostics(const fs::path& csv, const std::vector<TermDiagnostic>& rows) {
  auto out = open_out(csv);
  out << "gen,kind,tree_index,l2,hs,flinf\n";
  for (const auto& r : rows)
    out << r.gen << ',' << to_string(r.kind) << ',' << r.tree_index << ',' << g17(r.l2) << ',' << g17(r.hs) << ','
        << g17(r.flinf) << '\n';
}

inline json fit_json(const FitResult& f) {
  json pts = json::array();
  for (auto [x, y] : f.points) pts.push_back({x, y});
  return {{"slope", f.slope}, {"intercept", f.intercept}, {"r2", f.r2}, {"points", pts}};
}

inline void write_lemma_report(const fs::path& dir, const LemmaReport& r) {
  auto out = open_out(dir / "lemma.csv");
  out << "lemma,M,alpha,sup_ratio,trials\n";
  for (const auto& row : r.rows)
    out << to_string(r.lemma) << ',' << g17(row.M) << ',' << g17(row.alpha) << ',' << g17(row.sup_ratio) << ','
        << row.trials << '\n';
  json j = fit_json(r.fit);
  j["lemma"] = to_string(r.lemma);
  j["s"] = r.s;
  j["slope_bound"] = r.slope_bound;
  j["slope_ok"] = r.slope_ok;
  write_json(dir / "fit.json", j);
}

inline void write_decay_report(const fs::path& dir, const DecaySweep& sw, const DecayReport& r) {
  auto out = open_out(dir / "decay.csv");
  out << (sw.axis == Axis::N ? "N" : "J") << ",norm,std_error\n";
  for (std::size_t i = 0; i < r.x.size(); ++i)
    out << g17(r.x[i]) << ',' << g17(r.y[i]) << ',' << g17(r.std_error[i]) << '\n';
  json j = r.fit_defined ? fit_json(r.fit) : json{{"slope", nullptr}};
  j["quantity"] = to_string(sw.quantity);
  j["axis"] = sw.axis == Axis::N ? "N" : "J";
  j["fit_defined"] = r.fit_defined;
  if (sw.axis == Axis::N) {
    j["predicted"] = r.predicted;
    j["tolerance"] = 0.15;
    j["within_tolerance"] = r.fit_defined && std::abs(r.fit.slope - r.predicted) <= 0.15;
  }
  write_json(dir / "fit.json", j);
}

inline GridFunction make_datum(const RunConfig& rc) {
  auto g = rc.grid();
  const auto& d = rc.datum;
  const bool real = rc.reduction.equation == Equation::MKdV;
  if (d.kind == "zero") return GridFunction(g, real);
  if (d.kind == "gaussian") return gaussian_datum(g, d.width, d.norm, rc.reduction.s);
  if (d.kind == "file") {
    auto f = read_snapshot(d.file);
    if (!(f.grid() == g)) throw Error(ErrorKind::Config, "datum file grid differs from [grid]");
    return f;
  }
  auto f = sample(g, {d.s_decay, d.seed, d.amplitude, real});
  const double cut = d.band * g.xi_max();
  auto out = mask(f, [cut](double xi) { return std::abs(xi) <= cut; });
  out.set_real_physical(real);
  if (d.norm > 0 && sobolev_norm(out, rc.reduction.s) > 0) out *= d.norm / sobolev_norm(out, rc.reduction.s);
  return out;
}

}  // namespace nfr
