// Copyright 2026 The mixlab Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "mixlab/cli.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "mixlab/flow.hpp"
#include "mixlab/numerics.hpp"
#include "mixlab/orbits.hpp"
#include "mixlab/thermo.hpp"
#include "mixlab/twisted.hpp"

namespace mixlab::cli {

using nlohmann::json;

namespace {

[[noreturn]] void bad(const std::string& msg) { throw Error(ErrorCode::kConfigInvalid, msg); }

void check_keys(const json& obj, const std::string& where, std::initializer_list<const char*> keys) {
  if (!obj.is_object()) bad(where + " must be an object");
  std::set<std::string> allowed(keys.begin(), keys.end());
  for (const auto& [k, v] : obj.items()) {
    if (!allowed.count(k)) {
      std::string list;
      for (const auto& a : allowed) list += (list.empty() ? "" : ", ") + a;
      bad(where + ": unknown field '" + k + "' (expected one of: " + list + ")");
    }
  }
}

double get_number(const json& obj, const std::string& key, const std::string& where,
                  std::optional<double> fallback = std::nullopt) {
  if (!obj.contains(key)) {
    if (fallback) return *fallback;
    bad(where + ": missing '" + key + "'");
  }
  if (!obj[key].is_number()) bad(where + "." + key + " must be a number");
  return obj[key].get<double>();
}

long get_int(const json& obj, const std::string& key, const std::string& where,
             std::optional<long> fallback = std::nullopt) {
  if (!obj.contains(key)) {
    if (fallback) return *fallback;
    bad(where + ": missing '" + key + "'");
  }
  if (!obj[key].is_number_integer()) bad(where + "." + key + " must be an integer");
  return obj[key].get<long>();
}

Complex parse_complex(const json& j, const std::string& where) {
  if (j.is_number()) return {j.get<double>(), 0.0};
  if (j.is_array() && j.size() == 2 && j[0].is_number() && j[1].is_number())
    return {j[0].get<double>(), j[1].get<double>()};
  bad(where + " must be a number or a [re, im] pair");
}

std::vector<double> parse_grid(const json& j, const std::string& where) {
  std::vector<double> out;
  if (j.is_array()) {
    for (const auto& v : j) {
      if (!v.is_number()) bad(where + " entries must be numbers");
      out.push_back(v.get<double>());
    }
  } else if (j.is_object()) {
    check_keys(j, where, {"from", "to", "count"});
    const double a = get_number(j, "from", where);
    const double b = get_number(j, "to", where);
    const long n = get_int(j, "count", where);
    if (n < 1) bad(where + ".count must be >= 1");
    for (long i = 0; i < n; ++i) out.push_back(n == 1 ? a : a + (b - a) * i / (n - 1));
  } else {
    bad(where + " must be a list of numbers or {from, to, count}");
  }
  if (out.empty()) bad(where + " is empty");
  return out;
}

template <typename T, typename F>
thermo::LocallyConstantFn<T> parse_fn(const sft::Shift& shift, const json& j,
                                      const std::string& where, F&& parse_value) {
  if (!j.is_object() || !j.contains("values")) {
    return thermo::LocallyConstantFn<T>::constant(shift, 1, parse_value(j, where));
  }
  check_keys(j, where, {"depth", "values"});
  const int depth = static_cast<int>(get_int(j, "depth", where, 1));
  if (depth < 1) bad(where + ".depth must be >= 1");
  if (!j["values"].is_object()) bad(where + ".values must map words to values");
  std::map<sft::Word, T> values;
  for (const auto& [key, v] : j["values"].items()) {
    const sft::Word w = parse_word(key);
    if (static_cast<int>(w.size()) != depth)
      bad(where + ": word '" + key + "' does not have length " + std::to_string(depth));
    for (int s : w)
      if (s >= shift.n_symbols()) bad(where + ": word '" + key + "' uses an unknown symbol");
    if (!shift.is_admissible(w)) bad(where + ": word '" + key + "' is not admissible");
    values.emplace(w, parse_value(v, where + "['" + key + "']"));
  }
  try {
    return thermo::LocallyConstantFn<T>::from_map(shift, depth, values);
  } catch (const Error& e) {
    bad(where + ": " + std::string(e.what()).substr(std::string("ConfigInvalid: ").size()));
  }
}

double real_value(const json& j, const std::string& where) {
  if (!j.is_number()) bad(where + " must be a number");
  return j.get<double>();
}

struct Output {
  std::filesystem::path dir;
  std::vector<std::pair<std::string, std::string>> files;  // name, contents

  void add(const std::string& name, std::string contents) {
    files.emplace_back(name, std::move(contents));
  }
  void add_json(const std::string& name, const json& j) { add(name, j.dump(2) + "\n"); }
};

class Csv {
 public:
  explicit Csv(std::vector<std::string> header) : cols_(header.size()) { row_strings(header); }

  Csv& cell(const std::string& s) {
    pending_.push_back(s);
    return *this;
  }
  Csv& cell(double v) { return cell(format_double(v)); }
  Csv& cell(long v) { return cell(std::to_string(v)); }
  Csv& cell(int v) { return cell(std::to_string(v)); }
  Csv& cell(std::size_t v) { return cell(std::to_string(v)); }
  void end_row() {
    if (pending_.size() != cols_) throw std::logic_error("csv row width mismatch");
    row_strings(pending_);
    pending_.clear();
  }
  std::string str() const { return body_.str(); }

 private:
  void row_strings(const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i) body_ << ',';
      const bool quote = cells[i].find_first_of(",\"\n") != std::string::npos;
      if (quote) {
        body_ << '"';
        for (char c : cells[i]) body_ << (c == '"' ? "\"\"" : std::string(1, c));
        body_ << '"';
      } else {
        body_ << cells[i];
      }
    }
    body_ << '\n';
  }

  std::size_t cols_;
  std::vector<std::string> pending_;
  std::ostringstream body_;
};

std::string element_string(const grp::GroupElement& e) {
  std::string out;
  if (e.is_torus()) {
    for (double a : e.angles()) out += (out.empty() ? "" : ";") + format_double(a);
  } else {
    const auto& q = e.quat();
    for (double c : {q.w, q.x, q.y, q.z}) out += (out.empty() ? "" : ";") + format_double(c);
  }
  return out;
}

std::string point_string(const sft::TwoSidedPoint& p) {
  return sft::word_to_string(p.left_cycle()) + "|" + sft::word_to_string(p.core()) + "|" +
         sft::word_to_string(p.right_cycle()) + "@" + std::to_string(p.offset());
}

std::vector<grp::Irrep> parse_irreps(const grp::Group& g, const json& p, const std::string& key,
                                     const std::string& where) {
  if (!p.contains(key)) bad(where + ": missing '" + key + "'");
  if (!p[key].is_array() || p[key].empty()) bad(where + "." + key + " must be a nonempty list");
  std::vector<grp::Irrep> out;
  for (const auto& j : p[key]) out.push_back(parse_irrep(g, j));
  return out;
}

flow::TestFn parse_test_fn(const cocycle::SkewSystem& sys, const json& j,
                           const std::string& where) {
  const json terms = j.is_array() ? j : json::array({j});
  if (terms.empty()) bad(where + " has no terms");
  int degree = 0;
  int depth = 1;
  for (const auto& t : terms) {
    check_keys(t, where, {"irrep", "poly", "depth"});
    if (!t.contains("poly") || !t["poly"].is_array() || t["poly"].empty())
      bad(where + ".poly must be a nonempty list of coefficients");
    degree = std::max(degree, static_cast<int>(t["poly"].size()) - 1);
    depth = std::max(depth, static_cast<int>(get_int(t, "depth", where, 1)));
  }
  flow::TestFn f(sys.group, sft::word_index(sys.shift, depth), degree);
  for (const auto& t : terms) {
    if (!t.contains("irrep")) bad(where + ": missing 'irrep'");
    const grp::Irrep pi = parse_irrep(sys.group, t["irrep"]);
    auto& band = f.band(pi);
    const int d = pi.dim();
    for (std::size_t w = 0; w < f.words().size(); ++w)
      for (std::size_t p = 0; p < t["poly"].size(); ++p)
        band.coeffs[w * (degree + 1) + p] +=
            parse_complex(t["poly"][p], where + ".poly") * Eigen::MatrixXcd::Identity(d, d);
  }
  return f;
}

struct Context {
  const ExperimentConfig& cfg;
  const SystemConfig& sys;
  int threads;
  Output& out;
};

void run_pressure(const Context& c) {
  check_keys(c.cfg.parameters, "parameters", {});
  const auto& s = c.sys.system;
  const auto g = thermo::gibbs(s.shift, c.sys.potential, s.lam);
  c.out.add_json("pressure.json", {{"pressure", g.pressure()}, {"iterations", g.iterations()}});
  Csv csv({"state", "right_eigvec", "left_eigvec", "stationary"});
  for (std::size_t i = 0; i < g.states().size(); ++i) {
    csv.cell(sft::word_to_string(g.states().word(i)))
        .cell(g.right_eigvec()[i])
        .cell(g.left_eigvec()[i])
        .cell(g.stationary()[i])
        .end_row();
  }
  c.out.add("states.csv", csv.str());
}

void run_gibbs(const Context& c) {
  const auto& p = c.cfg.parameters;
  check_keys(p, "parameters", {"cylinder_length", "ratio_n"});
  const auto& s = c.sys.system;
  const auto g = thermo::gibbs(s.shift, c.sys.potential, s.lam);
  const int k = static_cast<int>(get_int(p, "cylinder_length", "parameters", g.depth()));
  const int n = static_cast<int>(get_int(p, "ratio_n", "parameters", 8));
  if (k < 1 || n < 1) bad("parameters: cylinder_length and ratio_n must be >= 1");
  Csv csv({"word", "measure"});
  for (const auto& w : sft::words(s.shift, k))
    csv.cell(sft::word_to_string(w)).cell(g.cylinder_measure(w)).end_row();
  c.out.add("cylinders.csv", csv.str());
  const auto ratio = thermo::gibbs_property_ratio(g, n);
  c.out.add_json("gibbs.json", {{"pressure", g.pressure()},
                                {"ratio_n", n},
                                {"ratio_min", ratio.min_ratio},
                                {"ratio_max", ratio.max_ratio}});
}

void run_correlations(const Context& c) {
  const auto& p = c.cfg.parameters;
  check_keys(p, "parameters",
             {"e", "f", "t_grid", "estimator", "n_samples", "depth_budget", "fit_t_min"});
  const auto& s = c.sys.system;
  if (!p.contains("e")) bad("parameters: missing 'e'");
  const flow::TestFn e = parse_test_fn(s, p["e"], "parameters.e");
  const flow::TestFn f = p.contains("f") ? parse_test_fn(s, p["f"], "parameters.f") : e;
  if (!p.contains("t_grid")) bad("parameters: missing 't_grid'");
  const auto t_grid = parse_grid(p["t_grid"], "parameters.t_grid");
  const std::string est = p.value("estimator", std::string("quadrature"));
  if (est != "quadrature" && est != "monte_carlo" && est != "both")
    bad("parameters.estimator must be quadrature, monte_carlo or both");
  const auto g = thermo::gibbs(s.shift, c.sys.potential, s.lam);
  Csv csv({"t", "re_rho", "im_rho", "stderr", "estimator"});
  std::optional<flow::CorrelationSeries> primary;
  if (est != "monte_carlo") {
    flow::QuadratureOptions opt;
    opt.depth_budget = static_cast<int>(get_int(p, "depth_budget", "parameters", 20));
    opt.threads = c.threads;
    const auto q = flow::correlation_quadrature(s, g, e, f, t_grid, opt);
    for (std::size_t i = 0; i < q.t_grid.size(); ++i)
      csv.cell(q.t_grid[i]).cell(q.rho[i].real()).cell(q.rho[i].imag()).cell("")
          .cell("quadrature").end_row();
    primary = q;
  }
  if (est != "quadrature") {
    const auto n = static_cast<std::size_t>(get_int(p, "n_samples", "parameters", 20000));
    const auto m = flow::correlation_mc(s, g, e, f, t_grid, n, c.cfg.seed, c.threads);
    for (std::size_t i = 0; i < m.t_grid.size(); ++i)
      csv.cell(m.t_grid[i]).cell(m.rho[i].real()).cell(m.rho[i].imag()).cell(m.error_bars[i])
          .cell("monte_carlo").end_row();
    if (!primary) primary = m;
  }
  c.out.add("correlations.csv", csv.str());
  if (p.contains("fit_t_min")) {
    const auto fit = flow::fit_decay(*primary, get_number(p, "fit_t_min", "parameters"));
    c.out.add_json("decay_fit.json", {{"model", fit.model},
                                      {"order_or_rate", fit.order_or_rate},
                                      {"constant", fit.constant},
                                      {"r2", fit.r2},
                                      {"t_min", fit.t_min}});
  }
}

void run_dolgopyat(const Context& c) {
  const auto& p = c.cfg.parameters;
  check_keys(p, "parameters", {"irreps", "b_grid", "c25", "trials", "state_depth", "c16"});
  const auto& s = c.sys.system;
  const auto pis = parse_irreps(s.group, p, "irreps", "parameters");
  if (!p.contains("b_grid")) bad("parameters: missing 'b_grid'");
  const auto b_grid = parse_grid(p["b_grid"], "parameters.b_grid");
  const double c25 = get_number(p, "c25", "parameters", 1.0);
  const auto trials = static_cast<std::size_t>(get_int(p, "trials", "parameters", 16));
  const int state_depth = static_cast<int>(get_int(p, "state_depth", "parameters", 0));
  const auto params = twisted::default_bpi_params(s.group, get_number(p, "c16", "parameters", 0.0),
                                                  s.lam.value());
  const auto g = thermo::gibbs(s.shift, c.sys.potential, s.lam);
  const auto scan = twisted::dolgopyat_scan(s, g, pis, b_grid, params, c25, trials, c.cfg.seed,
                                            c.threads, state_depth);
  Csv csv({"group", "pi_label", "weight_norm", "b", "b_pi", "n", "kappa", "matrix_norm_proxy",
           "fitted_C"});
  double max_kappa = 0.0;
  for (const auto& r : scan.records) {
    csv.cell(r.group).cell(r.pi.label()).cell(r.weight_norm).cell(r.b).cell(r.b_pi).cell(r.n)
        .cell(r.kappa).cell(r.matrix_norm_proxy).cell(r.fitted_c).end_row();
    max_kappa = std::max(max_kappa, r.kappa);
  }
  c.out.add("dolgopyat.csv", csv.str());
  c.out.add_json("dolgopyat.json", {{"fitted_c", std::isfinite(scan.fitted_c)
                                                     ? json(scan.fitted_c)
                                                     : json("inf")},
                                    {"max_kappa", max_kappa},
                                    {"c15", params.c15},
                                    {"c18", params.c18}});
}

sft::TwoSidedPoint parse_point(const sft::Shift& shift, const json& j) {
  check_keys(j, "parameters.point", {"left", "core", "right", "offset"});
  auto word_of = [&](const char* key, bool required) {
    if (!j.contains(key)) {
      if (required) bad(std::string("parameters.point: missing '") + key + "'");
      return sft::Word{};
    }
    if (!j[key].is_string()) bad(std::string("parameters.point.") + key + " must be a string");
    const std::string text = j[key].get<std::string>();
    return text.empty() ? sft::Word{} : parse_word(text);
  };
  try {
    return sft::TwoSidedPoint(shift, word_of("left", true), word_of("core", false),
                              word_of("right", true), get_int(j, "offset", "parameters.point", 0));
  } catch (const Error& e) {
    bad(std::string("parameters.point: ") + e.what());
  }
}

cocycle::BrinSearch parse_brin_params(const json& p, const std::string& where) {
  cocycle::BrinSearch params;
  params.n0 = get_int(p, "n0", where, params.n0);
  params.p0 = static_cast<int>(get_int(p, "p0", where, params.p0));
  params.max_word = static_cast<int>(get_int(p, "max_word", where, params.max_word));
  params.budget =
      static_cast<std::size_t>(get_int(p, "budget", where, static_cast<long>(params.budget)));
  params.tol = get_number(p, "tol", where, params.tol);
  return params;
}

void run_diophantine(const Context& c) {
  const auto& p = c.cfg.parameters;
  check_keys(p, "parameters", {"gamma", "weight_cutoff", "restarts", "alpha", "q_max", "brin"});
  const auto& s = c.sys.system;
  std::vector<grp::GroupElement> gamma;
  if (!p.contains("gamma") || p["gamma"] == "cocycle") {
    for (const auto& v : s.cocycle.table()) gamma.push_back(v);
  } else if (p["gamma"] == "from_brin_set") {
    if (!p.contains("brin")) bad("parameters: gamma = from_brin_set needs a 'brin' object");
    const json& bp = p["brin"];
    check_keys(bp, "parameters.brin", {"point", "n0", "p0", "max_word", "budget", "tol"});
    if (!bp.contains("point")) bad("parameters.brin: missing 'point'");
    const auto twists = cocycle::brin_set(s, parse_point(s.shift, bp["point"]),
                                          parse_brin_params(bp, "parameters.brin"));
    gamma = cocycle::distinct_twists(s.group, twists);
  } else {
    if (!p["gamma"].is_array()) bad("parameters.gamma must be a list of elements or \"cocycle\"");
    for (const auto& j : p["gamma"]) gamma.push_back(parse_element(s.group, j));
  }
  const double cutoff = get_number(p, "weight_cutoff", "parameters", 4.0);
  const int restarts = static_cast<int>(get_int(p, "restarts", "parameters", 16));
  const auto rep = cocycle::diophantine_certify(s.group, gamma, cutoff, restarts, c.cfg.seed,
                                                c.threads);
  Csv csv({"pi", "weight_norm", "lower_bound", "minimax"});
  for (const auto& e : rep.entries)
    csv.cell(e.pi.label()).cell(e.weight_norm).cell(e.lower_bound).cell(e.minimax).end_row();
  c.out.add("diophantine.csv", csv.str());
  json summary = {{"fitted_c", rep.fitted_c}, {"delta", rep.delta}, {"fit_r2", rep.fit_r2},
                  {"weight_cutoff", rep.weight_cutoff}, {"gamma_size", gamma.size()}};
  if (p.contains("alpha")) {
    const auto ba = cocycle::badly_approximable(get_number(p, "alpha", "parameters"),
                                                get_int(p, "q_max", "parameters", 1000000));
    summary["badly_approximable"] = {{"delta", ba.delta},
                                     {"c5", ba.c5},
                                     {"fitted_exponent", ba.fitted_exponent},
                                     {"convergent_denominators", ba.convergent_denominators}};
  }
  c.out.add_json("diophantine.json", summary);
}

void run_brin(const Context& c) {
  const auto& p = c.cfg.parameters;
  check_keys(p, "parameters", {"point", "n0", "p0", "max_word", "budget", "tol"});
  const auto& s = c.sys.system;
  if (!p.contains("point")) bad("parameters: missing 'point'");
  const auto x = parse_point(s.shift, p["point"]);
  const cocycle::BrinSearch params = parse_brin_params(p, "parameters");
  const auto twists = cocycle::brin_set(s, x, params);
  Csv csv({"index", "sides", "chain", "twist", "displacement_sum"});
  for (std::size_t i = 0; i < twists.size(); ++i) {
    std::string sides;
    std::string chain;
    for (const auto& link : twists[i].chain) {
      sides += cocycle::side_char(link.side);
      chain += (chain.empty() ? "" : " ") + point_string(link.point);
    }
    csv.cell(i).cell(sides).cell(chain).cell(element_string(twists[i].twist))
        .cell(twists[i].displacement_sum).end_row();
  }
  c.out.add("brin.csv", csv.str());
  const auto distinct = cocycle::distinct_twists(s.group, twists);
  json elems = json::array();
  for (const auto& e : distinct) elems.push_back(element_string(e));
  c.out.add_json("brin.json", {{"chains", twists.size()},
                               {"distinct_twists", distinct.size()},
                               {"twists", elems}});
}

void write_ledger(const Context& c, const orbits::OrbitLedger& ledger) {
  std::size_t inv_len = 0;
  for (const auto& r : ledger.records) inv_len = std::max(inv_len, r.holonomy.size());
  std::vector<std::string> header{"necklace", "n", "ell"};
  for (std::size_t i = 0; i < inv_len; ++i) header.push_back("holonomy_" + std::to_string(i));
  Csv csv(header);
  for (const auto& r : ledger.records) {
    csv.cell(sft::word_to_string(r.necklace)).cell(r.n).cell(r.r_period);
    for (std::size_t i = 0; i < inv_len; ++i)
      csv.cell(i < r.holonomy.size() ? format_double(r.holonomy[i]) : std::string());
    csv.end_row();
  }
  c.out.add("ledger.csv", csv.str());
}

void run_equidistribution(const Context& c) {
  const auto& p = c.cfg.parameters;
  check_keys(p, "parameters", {"t_max", "t_grid", "irreps", "budget"});
  const auto& s = c.sys.system;
  const double t_max = get_number(p, "t_max", "parameters");
  const auto pis = parse_irreps(s.group, p, "irreps", "parameters");
  const auto t_grid = p.contains("t_grid") ? parse_grid(p["t_grid"], "parameters.t_grid")
                                           : std::vector<double>{t_max};
  const auto budget = static_cast<std::size_t>(get_int(p, "budget", "parameters", 5000000));
  const auto ledger = orbits::build_ledger(s, t_max, budget, c.threads);
  write_ledger(c, ledger);
  Csv csv({"pi_label", "T", "average_re", "average_im"});
  for (const auto& pi : pis) {
    const auto cf = orbits::character_fn(s.group, pi);
    for (double t : t_grid) {
      const Complex a = orbits::equi_average(ledger, cf, t);
      csv.cell(pi.label()).cell(t).cell(a.real()).cell(a.imag()).end_row();
    }
  }
  c.out.add("equidistribution.csv", csv.str());
  json summary = {{"h_top", ledger.h_top}, {"t_max", ledger.t_max},
                  {"orbits", ledger.records.size()}, {"n_max", ledger.n_max}};
  if (t_grid.size() >= 4) {
    try {
      const auto fit = orbits::equi_error_fit(ledger, pis, t_grid);
      json entries = json::array();
      for (const auto& e : fit.entries)
        entries.push_back({{"pi", e.pi.label()}, {"order", e.order}, {"constant", e.constant},
                           {"r2", e.r2}});
      summary["fit"] = {{"entries", entries},
                        {"c37", std::isfinite(fit.c37) ? json(fit.c37) : json(nullptr)}};
    } catch (const Error& e) {
      if (e.code() != ErrorCode::kInsufficientData) throw;
      summary["fit"] = {{"error", e.what()}};
    }
  }
  c.out.add_json("equidistribution.json", summary);
}

void run_lfunction(const Context& c) {
  const auto& p = c.cfg.parameters;
  check_keys(p, "parameters", {"t_max", "irrep", "s_grid", "T", "z_n", "k", "budget"});
  const auto& s = c.sys.system;
  const double t_max = get_number(p, "t_max", "parameters");
  if (!p.contains("irrep")) bad("parameters: missing 'irrep'");
  const grp::Irrep pi = parse_irrep(s.group, p["irrep"]);
  const double t = get_number(p, "T", "parameters", t_max);
  if (!p.contains("s_grid") || !p["s_grid"].is_array() || p["s_grid"].empty())
    bad("parameters.s_grid must be a nonempty list of [re, im] pairs");
  const auto budget = static_cast<std::size_t>(get_int(p, "budget", "parameters", 5000000));
  const auto ledger = orbits::build_ledger(s, t_max, budget, c.threads);
  Csv csv({"s_re", "s_im", "l_re", "l_im", "log_re", "log_im", "series_re", "series_im",
           "factors"});
  std::vector<Complex> s_values;
  for (const auto& j : p["s_grid"]) s_values.push_back(parse_complex(j, "parameters.s_grid"));
  for (const Complex& sv : s_values) {
    const auto l = orbits::l_function_partial(ledger, pi, sv, t);
    const Complex series = orbits::log_l_series(ledger, pi, sv, t);
    csv.cell(sv.real()).cell(sv.imag()).cell(l.value.real()).cell(l.value.imag())
        .cell(l.log_value.real()).cell(l.log_value.imag()).cell(series.real())
        .cell(series.imag()).cell(l.factors).end_row();
  }
  c.out.add("lfunction.csv", csv.str());
  const int z_n = static_cast<int>(get_int(p, "z_n", "parameters", 0));
  if (z_n > 0) {
    Csv z({"n", "s_re", "s_im", "brute_re", "brute_im", "trace_re", "trace_im"});
    for (int n = 1; n <= z_n; ++n) {
      for (const Complex& sv : s_values) {
        const Complex a = orbits::z_function(s, pi, n, sv, ledger.h_top);
        const Complex b = orbits::z_function_trace(s, pi, n, sv, ledger.h_top);
        z.cell(n).cell(sv.real()).cell(sv.imag()).cell(a.real()).cell(a.imag()).cell(b.real())
            .cell(b.imag()).end_row();
      }
    }
    c.out.add("zfunction.csv", z.str());
  }
  const int k = static_cast<int>(get_int(p, "k", "parameters", 0));
  const orbits::CountingFns counts(ledger, pi, k);
  Csv cnt({"T", "psi_re", "psi_im", "phi_re", "phi_im"});
  for (int i = 1; i <= 8; ++i) {
    const double ti = t * i / 8.0;
    const Complex ps = counts.psi(ti);
    const Complex ph = counts.phi(ti);
    cnt.cell(ti).cell(ps.real()).cell(ps.imag()).cell(ph.real()).cell(ph.imag()).end_row();
  }
  c.out.add("counting.csv", cnt.str());
  c.out.add_json("lfunction.json", {{"h_top", ledger.h_top},
                                    {"orbits", ledger.records.size()},
                                    {"pi", pi.label()},
                                    {"T", t}});
}

using Runner = void (*)(const Context&);

const std::map<std::string, Runner>& runners() {
  static const std::map<std::string, Runner> table = {
      {"pressure", run_pressure},       {"gibbs", run_gibbs},
      {"correlations", run_correlations}, {"dolgopyat", run_dolgopyat},
      {"diophantine", run_diophantine}, {"brin", run_brin},
      {"equidistribution", run_equidistribution}, {"lfunction", run_lfunction}};
  return table;
}

}  // namespace

const std::vector<ExperimentInfo>& experiments() {
  static const std::vector<ExperimentInfo> list = {
      {"pressure", "pressure and Perron eigendata of a locally constant potential"},
      {"gibbs", "cylinder measures of the equilibrium state and Gibbs-property ratios"},
      {"correlations", "correlation function of two test functions under the suspension flow"},
      {"dolgopyat", "contraction of twisted transfer operators over a frequency grid"},
      {"diophantine", "Diophantine certification of a finite subset of the group"},
      {"brin", "symbolic Brin twists around closed stable/unstable chains"},
      {"equidistribution", "holonomy averages over prime periodic orbits"},
      {"lfunction", "partial Euler products, Z-functions and orbit counting sums"},
  };
  return list;
}

void list_experiments(std::ostream& out, bool as_json) {
  if (as_json) {
    json arr = json::array();
    for (const auto& e : experiments())
      arr.push_back({{"name", e.name}, {"description", e.description}});
    out << arr.dump(2) << "\n";
    return;
  }
  for (const auto& e : experiments()) out << e.name << "  " << e.description << "\n";
}

sft::Word parse_word(const std::string& key) {
  sft::Word w;
  if (key.empty()) bad("empty word");
  if (key.find(',') != std::string::npos) {
    std::stringstream ss(key);
    std::string part;
    while (std::getline(ss, part, ',')) {
      int v = 0;
      const auto [ptr, ec] = std::from_chars(part.data(), part.data() + part.size(), v);
      if (ec != std::errc() || ptr != part.data() + part.size() || v < 0)
        bad("malformed word '" + key + "'");
      w.push_back(v);
    }
  } else {
    for (char ch : key) {
      if (ch < '0' || ch > '9') bad("malformed word '" + key + "'");
      w.push_back(ch - '0');
    }
  }
  return w;
}

grp::Group parse_group(const json& j) {
  if (j.is_object()) {
    check_keys(j, "system.group", {"kind", "d"});
    if (!j.contains("kind") || !j["kind"].is_string()) bad("system.group: missing 'kind'");
    const std::string kind = j["kind"].get<std::string>();
    if (kind == "su2") return grp::Group::su2();
    if (kind == "so3") return grp::Group::so3();
    if (kind != "torus") bad("system.group.kind must be torus, su2 or so3");
    const long d = get_int(j, "d", "system.group", 1);
    if (d < 1 || d > grp::kMaxTorusDim) bad("system.group.d must be between 1 and 4");
    return grp::Group::torus(static_cast<int>(d));
  }
  if (!j.is_string()) bad("system.group must be a string such as \"T1\", \"SU2\" or \"SO3\"");
  const std::string name = j.get<std::string>();
  if (name == "SU2") return grp::Group::su2();
  if (name == "SO3") return grp::Group::so3();
  if (name.size() == 2 && name[0] == 'T' && name[1] >= '1' && name[1] <= '4')
    return grp::Group::torus(name[1] - '0');
  bad("unknown group '" + name + "' (expected T1..T4, SU2 or SO3)");
}

grp::GroupElement parse_element(const grp::Group& g, const json& j) {
  if (j.is_string() && j.get<std::string>() == "identity") return grp::identity(g);
  if (g.kind() == grp::GroupKind::kTorus) {
    std::vector<double> angles;
    auto take = [&](const json& arr, double scale) {
      if (arr.is_number()) {
        angles.push_back(scale * arr.get<double>());
        return;
      }
      if (!arr.is_array()) bad("torus element must be an angle list");
      for (const auto& a : arr) {
        if (!a.is_number()) bad("torus angles must be numbers");
        angles.push_back(scale * a.get<double>());
      }
    };
    if (j.is_object()) {
      check_keys(j, "torus element", {"angles", "turns"});
      if (j.contains("angles")) take(j["angles"], 1.0);
      else if (j.contains("turns")) take(j["turns"], kTwoPi);
      else bad("torus element needs 'angles' or 'turns'");
    } else {
      take(j, 1.0);
    }
    if (static_cast<int>(angles.size()) != g.torus_dim())
      bad("torus element needs " + std::to_string(g.torus_dim()) + " angles");
    return grp::GroupElement::torus(angles);
  }
  if (!j.is_object()) bad("SU2/SO3 element must be {\"quaternion\": [...]} or {\"axis\", \"angle\"}");
  check_keys(j, "rotation element", {"quaternion", "axis", "angle"});
  if (j.contains("quaternion")) {
    const auto& q = j["quaternion"];
    if (!q.is_array() || q.size() != 4) bad("quaternion must have four components");
    for (const auto& v : q)
      if (!v.is_number()) bad("quaternion components must be numbers");
    const grp::Quaternion quat{q[0].get<double>(), q[1].get<double>(), q[2].get<double>(),
                               q[3].get<double>()};
    if (!(quat.norm() > 0.0)) bad("quaternion must be nonzero");
    return grp::GroupElement::quaternion(quat);
  }
  if (!j.contains("axis") || !j["axis"].is_array() || j["axis"].size() != 3)
    bad("rotation element needs a three-component 'axis'");
  const double angle = get_number(j, "angle", "rotation element");
  const auto& a = j["axis"];
  for (const auto& v : a)
    if (!v.is_number()) bad("axis components must be numbers");
  const double ax = a[0].get<double>();
  const double ay = a[1].get<double>();
  const double az = a[2].get<double>();
  const double n = std::sqrt(ax * ax + ay * ay + az * az);
  if (!(n > 0.0)) bad("axis must be nonzero");
  return grp::GroupElement::quaternion(grp::Quaternion::axis_angle(ax / n, ay / n, az / n, angle));
}

grp::Irrep parse_irrep(const grp::Group& g, const json& j) {
  try {
    if (j.is_string() && j.get<std::string>() == "trivial") return grp::Irrep::trivial(g);
    if (g.kind() == grp::GroupKind::kTorus) {
      std::vector<int> mode;
      const json& m = j.is_object() ? j.value("mode", json()) : j;
      if (j.is_object()) check_keys(j, "irrep", {"mode"});
      if (m.is_number_integer()) {
        mode.push_back(m.get<int>());
      } else if (m.is_array()) {
        for (const auto& v : m) {
          if (!v.is_number_integer()) bad("torus mode entries must be integers");
          mode.push_back(v.get<int>());
        }
      } else {
        bad("torus irrep must be an integer, an integer list or {\"mode\": [...]}");
      }
      if (static_cast<int>(mode.size()) != g.torus_dim())
        bad("torus irrep needs " + std::to_string(g.torus_dim()) + " mode entries");
      return grp::Irrep::torus_mode(mode);
    }
    if (!j.is_object()) bad("SU2/SO3 irrep must be {\"two_j\": n} or {\"j\": x}");
    check_keys(j, "irrep", {"two_j", "j"});
    int two_j = 0;
    if (j.contains("two_j")) {
      two_j = static_cast<int>(get_int(j, "two_j", "irrep"));
    } else {
      const double jj = get_number(j, "j", "irrep");
      two_j = static_cast<int>(std::lround(2.0 * jj));
      if (std::abs(2.0 * jj - two_j) > 1e-12) bad("j must be a half-integer");
    }
    return grp::Irrep::spin(g, two_j);
  } catch (const Error& e) {
    if (e.code() == ErrorCode::kConfigInvalid) throw;
    bad(std::string("irrep: ") + e.what());
  }
}

ExperimentConfig parse_config(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    bad(std::string("config is not valid JSON: ") + e.what());
  }
  check_keys(j, "config", {"experiment", "seed", "output_dir", "system", "parameters"});
  ExperimentConfig cfg;
  cfg.raw = text;
  if (!j.contains("experiment") || !j["experiment"].is_string()) bad("config: missing 'experiment'");
  cfg.experiment = j["experiment"].get<std::string>();
  if (!runners().count(cfg.experiment)) {
    std::string names;
    for (const auto& e : experiments()) names += (names.empty() ? "" : ", ") + e.name;
    bad("unknown experiment '" + cfg.experiment + "'; valid options: " + names);
  }
  if (j.contains("seed")) {
    if (!j["seed"].is_number_unsigned()) bad("config.seed must be a nonnegative integer");
    cfg.seed = j["seed"].get<std::uint64_t>();
  }
  if (j.contains("output_dir")) {
    if (!j["output_dir"].is_string()) bad("config.output_dir must be a string");
    cfg.output_dir = j["output_dir"].get<std::string>();
  }
  if (!j.contains("system")) bad("config: missing 'system'");
  cfg.system = j["system"];
  cfg.parameters = j.value("parameters", json::object());
  if (!cfg.parameters.is_object()) bad("config.parameters must be an object");
  return cfg;
}

SystemConfig build_system(const json& sys) {
  check_keys(sys, "system", {"transition", "lambda", "potential", "roof", "cocycle", "group"});
  if (!sys.contains("transition") || !sys["transition"].is_array())
    bad("system: missing 'transition' matrix");
  sft::Matrix01 t;
  for (const auto& row : sys["transition"]) {
    if (!row.is_array()) bad("system.transition rows must be arrays");
    std::vector<int> r;
    for (const auto& v : row) {
      if (!v.is_number_integer() || (v.get<int>() != 0 && v.get<int>() != 1))
        bad("system.transition entries must be 0 or 1");
      r.push_back(v.get<int>());
    }
    t.push_back(r);
  }
  try {
    const sft::Shift shift = sft::Shift::build(t);
    const sft::MetricConstant lam(get_number(sys, "lambda", "system", 0.5));
    const grp::Group group = sys.contains("group") ? parse_group(sys["group"]) : grp::Group::torus(1);
    const auto potential = sys.contains("potential")
                               ? parse_fn<double>(shift, sys["potential"], "potential", real_value)
                               : thermo::RealFn::constant(shift, 1, 0.0);
    if (!sys.contains("roof")) bad("system: missing 'roof'");
    const auto roof = parse_fn<double>(shift, sys["roof"], "roof", real_value);
    const auto cocycle =
        sys.contains("cocycle")
            ? parse_fn<grp::GroupElement>(shift, sys["cocycle"], "cocycle",
                                          [&](const json& v, const std::string&) {
                                            return parse_element(group, v);
                                          })
            : cocycle::constant_cocycle(shift, group, grp::identity(group));
    return SystemConfig{cocycle::SkewSystem(shift, lam, roof, cocycle, group), potential};
  } catch (const Error& e) {
    if (e.code() == ErrorCode::kConfigInvalid) throw;
    bad(std::string("system: ") + e.what());
  }
}

int exit_code(ErrorCode code) {
  switch (code) {
    case ErrorCode::kConfigInvalid: return 2;
    case ErrorCode::kSolverFailure: return 3;
    case ErrorCode::kBudgetExceeded:
    case ErrorCode::kDepthBudgetExceeded:
    case ErrorCode::kSearchBudgetExceeded: return 4;
    default: return 1;
  }
}

std::string format_double(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

std::uint64_t fnv1a(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

int run(const std::string& config_path, const RunOptions& options, std::ostream& err) {
  const auto start = std::chrono::steady_clock::now();
  try {
    std::ifstream in(config_path, std::ios::binary);
    if (!in) bad("cannot read config '" + config_path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    ExperimentConfig cfg = parse_config(ss.str());
    if (options.seed) cfg.seed = *options.seed;
    if (options.out_dir) cfg.output_dir = *options.out_dir;
    const int threads = options.threads ? *options.threads : default_threads();
    if (threads < 1) bad("threads must be >= 1");
    const SystemConfig sys = build_system(cfg.system);

    Output out;
    out.dir = cfg.output_dir;
    Context ctx{cfg, sys, threads, out};
    try {
      runners().at(cfg.experiment)(ctx);
    } catch (const json::exception& e) {
      bad(std::string("parameters: ") + e.what());
    }

    std::filesystem::create_directories(out.dir);
    json files = json::array();
    for (const auto& [name, body] : out.files) {
      std::ofstream f(out.dir / name, std::ios::binary);
      f << body;
      if (!f) throw Error(ErrorCode::kInvalidArgument, "cannot write " + (out.dir / name).string());
      char hash[17];
      std::snprintf(hash, sizeof(hash), "%016llx",
                    static_cast<unsigned long long>(fnv1a(body)));
      files.push_back({{"name", name}, {"bytes", body.size()}, {"fnv1a", hash}});
    }
    char cfg_hash[17];
    std::snprintf(cfg_hash, sizeof(cfg_hash), "%016llx",
                  static_cast<unsigned long long>(fnv1a(cfg.raw)));
    const double wall =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const json manifest = {
        {"experiment", cfg.experiment},
        {"config_path", config_path},
        {"config_fnv1a", cfg_hash},
        {"seed", cfg.seed},
        {"threads", threads},
        {"versions",
         {{"mixlab", kVersion},
          {"compiler", __VERSION__},
          {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) +
                        "." + std::to_string(EIGEN_MINOR_VERSION)},
          {"nlohmann_json", std::to_string(NLOHMANN_JSON_VERSION_MAJOR) + "." +
                                std::to_string(NLOHMANN_JSON_VERSION_MINOR) + "." +
                                std::to_string(NLOHMANN_JSON_VERSION_PATCH)}}},
        {"wall_time_s", wall},
        {"files", files}};
    std::ofstream mf(out.dir / "manifest.json", std::ios::binary);
    mf << manifest.dump(2) << "\n";
    return 0;
  } catch (const Error& e) {
    err << "mixlab: " << e.what() << "\n";
    return exit_code(e.code());
  } catch (const std::exception& e) {
    err << "mixlab: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace mixlab::cli
