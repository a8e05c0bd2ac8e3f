#pragma once

#include <cmath>
#include <cstdint>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "nfr/engine.hpp"
#include "nfr/error.hpp"
#include "nfr/harness.hpp"
#include "nfr/solver.hpp"

namespace nfr {

// Flat "key = value" text grouped under [section] headers; '#' and ';' start comments.
class ConfigText {
 public:
  static ConfigText parse(std::istream& in) {
    ConfigText c;
    std::string line, section;
    int lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      auto cut = line.find_first_of("#;");
      if (cut != std::string::npos) line.erase(cut);
      line = trim(line);
      if (line.empty()) continue;
      auto where = " (line " + std::to_string(lineno) + ")";
      if (line.front() == '[') {
        if (line.back() != ']') throw Error(ErrorKind::Config, "unterminated section header" + where);
        section = trim(line.substr(1, line.size() - 2));
        if (section.empty()) throw Error(ErrorKind::Config, "empty section name" + where);
        continue;
      }
      auto eq = line.find('=');
      if (eq == std::string::npos) throw Error(ErrorKind::Config, "expected key = value" + where);
      auto key = trim(line.substr(0, eq));
      if (key.empty()) throw Error(ErrorKind::Config, "empty key" + where);
      if (section.empty()) throw Error(ErrorKind::Config, "key '" + key + "' outside any section" + where);
      auto full = section + "." + key;
      if (!c.values_.emplace(full, trim(line.substr(eq + 1))).second)
        throw Error(ErrorKind::Config, "duplicate key '" + full + "'" + where);
    }
    return c;
  }

  static ConfigText parse_string(const std::string& text) {
    std::istringstream in(text);
    return parse(in);
  }

  static ConfigText load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorKind::Io, "cannot read config '" + path + "'");
    return parse(in);
  }

  bool has(const std::string& key) const { return values_.count(key) != 0; }
  const std::map<std::string, std::string>& values() const { return values_; }

  void set(const std::string& key, const std::string& value) { values_[key] = value; }

  template <class T>
  void get(const std::string& key, T& out) const {
    auto it = values_.find(key);
    if (it == values_.end()) return;
    used_.insert(key);
    out = convert<T>(key, it->second);
  }

  // Every key must have been consumed by some get().
  void reject_unknown() const {
    for (const auto& [k, v] : values_)
      if (!used_.count(k)) throw Error(ErrorKind::Config, "unknown key '" + k + "'");
  }

 private:
  static std::string trim(const std::string& s) {
    auto a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return "";
    auto b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
  }

  template <class T>
  static T convert(const std::string& key, const std::string& v) {
    auto bad = [&] { return Error(ErrorKind::Config, "bad value '" + v + "' for '" + key + "'"); };
    if constexpr (std::is_same_v<T, std::string>) {
      return v;
    } else if constexpr (std::is_same_v<T, bool>) {
      if (v == "true" || v == "1" || v == "yes") return true;
      if (v == "false" || v == "0" || v == "no") return false;
      throw bad();
    } else if constexpr (std::is_same_v<T, std::vector<double>>) {
      std::vector<double> out;
      std::stringstream ss(v);
      std::string item;
      while (std::getline(ss, item, ',')) out.push_back(convert<double>(key, trim(item)));
      return out;
    } else if constexpr (std::is_same_v<T, std::vector<int>>) {
      std::vector<int> out;
      for (double d : convert<std::vector<double>>(key, v)) {
        if (d != std::floor(d)) throw bad();
        out.push_back(static_cast<int>(d));
      }
      return out;
    } else if constexpr (std::is_floating_point_v<T>) {
      std::size_t pos = 0;
      double d;
      try {
        d = std::stod(v, &pos);
      } catch (const std::exception&) {
        throw bad();
      }
      if (pos != v.size()) throw bad();
      return d;
    } else {
      static_assert(std::is_integral_v<T>);
      std::size_t pos = 0;
      long long d;
      try {
        d = std::stoll(v, &pos);
      } catch (const std::exception&) {
        throw bad();
      }
      if (pos != v.size()) throw bad();
      if constexpr (std::is_unsigned_v<T>)
        if (d < 0) throw bad();
      return static_cast<T>(d);
    }
  }

  std::map<std::string, std::string> values_;
  mutable std::set<std::string> used_;
};

struct DatumConfig {
  std::string kind = "gaussian";  // gaussian | zero | sample | file
  double width = 0.7;
  double norm = 0.1;
  double s_decay = 0.0;
  double amplitude = 1.0;
  std::uint64_t seed = 1;
  double band = 1.0 / 3.0;        // sampled data are cut to |xi| <= band * xi_max
  std::string file;
};

struct RunConfig {
  std::string out = "out";
  std::uint64_t seed = 1;
  bool deterministic = false;
  double xi_max = 16;
  std::size_t n = 65;
  ReductionConfig reduction;
  SolverConfig solver;
  DatumConfig datum;
  std::string lemma = "NLS2";
  LemmaSweep sweep;
  DecaySweep decay;
  int trees_J = 3;
  bool trees_serialize = false;

  FrequencyGrid grid() const { return FrequencyGrid(xi_max, n); }

  void validate() const {
    if (!(xi_max > 0) || n < 3 || n % 2 == 0) throw Error(ErrorKind::Config, "grid needs xi_max > 0 and odd n >= 3");
    if (datum.kind != "gaussian" && datum.kind != "zero" && datum.kind != "sample" && datum.kind != "file")
      throw Error(ErrorKind::Config, "datum.kind must be gaussian, zero, sample or file");
    if (datum.kind == "file" && datum.file.empty()) throw Error(ErrorKind::Config, "datum.file is required");
    try {
      reduction.validate();
      solver.validate();
    } catch (const Error& e) {
      throw Error(ErrorKind::Config, e.what());
    }
  }
};

inline RunConfig run_config(const ConfigText& c) {
  RunConfig r;
  c.get("run.out", r.out);
  c.get("run.seed", r.seed);
  c.get("run.deterministic", r.deterministic);
  c.get("grid.xi_max", r.xi_max);
  c.get("grid.n", r.n);

  auto& red = r.reduction;
  std::string eq = to_string(red.equation);
  c.get("reduction.equation", eq);
  try {
    red.equation = parse_equation(eq);
  } catch (const Error& e) {
    throw Error(ErrorKind::Config, e.what());
  }
  if (red.equation == Equation::MKdV) red.s = 0.25;
  c.get("reduction.N", red.N);
  c.get("reduction.delta", red.delta);
  c.get("reduction.eps", red.eps);
  c.get("reduction.J_max", red.J_max);
  c.get("reduction.s", red.s);

  auto& sc = r.solver;
  c.get("solver.T", sc.T);
  c.get("solver.n_t", sc.n_t);
  c.get("solver.kappa", sc.kappa);
  c.get("solver.C_hat", sc.C_hat);
  c.get("solver.tol", sc.tol);
  c.get("solver.max_iter", sc.max_iter);
  c.get("solver.ref_substeps", sc.ref_substeps);
  c.get("solver.auto_parameters", sc.auto_parameters);
  c.get("solver.band_tol", sc.band_tol);
  c.get("eval.sampled", sc.eval.sampled);
  c.get("eval.samples", sc.eval.samples);
  c.get("eval.replicates", sc.eval.replicates);
  c.get("eval.seed", sc.eval.seed);

  auto& d = r.datum;
  c.get("datum.kind", d.kind);
  c.get("datum.width", d.width);
  c.get("datum.norm", d.norm);
  c.get("datum.s_decay", d.s_decay);
  c.get("datum.amplitude", d.amplitude);
  c.get("datum.seed", d.seed);
  c.get("datum.band", d.band);
  c.get("datum.file", d.file);

  auto& sw = r.sweep;
  c.get("verify.lemma", r.lemma);
  c.get("verify.M", sw.M);
  c.get("verify.alpha", sw.alpha);
  c.get("verify.alpha_tracks_M", sw.alpha_tracks_M);
  c.get("verify.trials", sw.trials);
  c.get("verify.s", sw.s);
  c.get("verify.eps", sw.eps);
  c.get("verify.xi_max", sw.xi_max);
  c.get("verify.n", sw.n);
  sw.seed = r.seed;
  c.get("verify.seed", sw.seed);

  auto& dc = r.decay;
  std::string q = to_string(dc.quantity), axis = "N";
  c.get("decay.quantity", q);
  c.get("decay.axis", axis);
  try {
    dc.quantity = parse_quantity(q);
  } catch (const Error& e) {
    throw Error(ErrorKind::Config, e.what());
  }
  if (axis != "N" && axis != "J") throw Error(ErrorKind::Config, "decay.axis must be N or J");
  dc.axis = axis == "N" ? Axis::N : Axis::J;
  c.get("decay.j", dc.j);
  c.get("decay.N", dc.N);
  c.get("decay.J", dc.J);
  c.get("decay.N_fixed", dc.N_fixed);
  c.get("decay.trials", dc.trials);
  c.get("decay.xi_max", dc.xi_max);
  c.get("decay.n", dc.n);
  c.get("decay.sampled_from_J", dc.sampled_from_J);
  dc.seed = r.seed;
  c.get("decay.seed", dc.seed);
  dc.cfg = red;
  dc.eval = sc.eval;

  c.get("trees.J", r.trees_J);
  c.get("trees.serialize", r.trees_serialize);

  c.reject_unknown();
  r.validate();
  return r;
}

inline RunConfig load_run_config(const std::string& path) { return run_config(ConfigText::load(path)); }

}  // namespace nfr
