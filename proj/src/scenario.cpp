#include "bh/scenario.hpp"

#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "json.hpp"

#include "bh/error.hpp"

namespace bh {

using json = nlohmann::json;

bool Scenario::operator==(const Scenario& o) const {
  return name == o.name && n == o.n && N == o.N && s == o.s && M == o.M && gamma1 == o.gamma1 && gamma2 == o.gamma2 &&
         widths == o.widths && base_A == o.base_A && base_q == o.base_q && pert_A == o.pert_A && pert_q == o.pert_q &&
         t == o.t && h == o.h && lambda == o.lambda && basis_modes == o.basis_modes && beta0 == o.beta0 &&
         mode == o.mode && solver.tol == o.solver.tol && solver.max_iter == o.solver.max_iter &&
         solver.direct_cap == o.solver.direct_cap && cgo.eps_reg_factor == o.cgo.eps_reg_factor &&
         cgo.neumann_tol == o.cgo.neumann_tol && cgo.neumann_max_iter == o.cgo.neumann_max_iter &&
         cgo.bloch_shift == o.cgo.bloch_shift && delta_threshold == o.delta_threshold;
}

Scenario calibration_scenario() {
  Scenario sc;
  sc.base_A = {{{0.45, 0.5, 0.55}, 0.25, {0.3, -0.2, 0.1}}};
  sc.base_q = {{{0.5, 0.45, 0.5}, 0.25, {0.5}}};
  sc.pert_A = {{{0.42, 0.55, 0.5}, 0.22, {0.4, 0.3, 0.0}}, {{0.58, 0.45, 0.52}, 0.22, {0.0, -0.3, 0.4}}};
  sc.pert_q = {{{0.5, 0.5, 0.46}, 0.24, {1.0}}};
  return sc;
}

double smooth_ramp(double t) {
  if (t <= 0.0) return 0.0;
  if (t >= 1.0) return 1.0;
  const double a = std::exp(-1.0 / t), b = std::exp(-1.0 / (1.0 - t));
  return a / (a + b);
}

std::vector<double> omega0_complement(const GridSpec& g, double w0) {
  std::vector<double> out(g.padded_size(), 1.0);
  std::vector<int> idx(g.n);
  for (std::size_t k = 0; k < g.padded_size(); ++k) {
    g.unflatten(k, idx.data());
    for (int d = 0; d < g.n; ++d) {
      const double x = g.coord(idx[d]);
      out[k] *= smooth_ramp((x - w0) / 0.1) * smooth_ramp((1.0 - x - w0) / 0.1);
    }
  }
  return out;
}

ScalarField bump_field(const GridSpec& g, const std::vector<Bump>& bumps, int component, const std::vector<double>& cutoff) {
  ScalarField f(g);
  std::vector<int> idx(g.n);
  for (const auto& b : bumps) {
    if (static_cast<int>(b.center.size()) != g.n) fail(ErrorCode::invalid_argument, "bump center has the wrong dimension");
    if (component >= static_cast<int>(b.amplitude.size())) fail(ErrorCode::invalid_argument, "bump amplitude has too few components");
    for (std::size_t k = 0; k < g.padded_size(); ++k) {
      g.unflatten(k, idx.data());
      double r2 = 0.0;
      for (int d = 0; d < g.n; ++d) r2 += std::pow(g.coord(idx[d]) - b.center[d], 2);
      const double t = 1.0 - r2 / (b.width * b.width);
      if (t > 0.0) f.v[k] += b.amplitude[component] * std::pow(t, 4);
    }
  }
  if (!cutoff.empty())
    for (std::size_t k = 0; k < g.padded_size(); ++k) f.v[k] *= cutoff[k];
  return f;
}

CoefficientPair build_pair(const Scenario& sc, const GridSpec& g, double t, bool a_zero) {
  const auto chi = omega0_complement(g, sc.widths[0]);
  CoefficientPair p{CoefficientSet::zero(g), CoefficientSet::zero(g)};
  for (int d = 0; d < g.n && !a_zero; ++d) {
    p.c1.A.c[d] = bump_field(g, sc.base_A, d, chi);
    p.c2.A.c[d] = p.c1.A.c[d] + cd(t) * bump_field(g, sc.pert_A, d, chi);
  }
  p.c1.q = bump_field(g, sc.base_q, 0, chi);
  p.c2.q = p.c1.q + cd(t) * bump_field(g, sc.pert_q, 0, chi);
  std::vector<std::uint8_t> mask(g.padded_size(), 0);
  for (std::size_t k = 0; k < g.padded_size(); ++k) mask[k] = g.dist(k) < sc.widths[0];
  p.c1.agreement_mask = mask;
  p.c2.agreement_mask = mask;
  return p;
}

// ---- config parsing ----

namespace {

[[noreturn]] void bad(const std::string& where, const std::string& what) {
  fail(ErrorCode::invalid_argument, "config " + where + ": " + what);
}

void check_keys(const json& j, const std::string& where, const std::set<std::string>& allowed) {
  if (!j.is_object()) bad(where, "expected an object");
  for (auto it = j.begin(); it != j.end(); ++it)
    if (!allowed.count(it.key())) fail(ErrorCode::unknown_key, "config " + where + ": unknown key \"" + it.key() + "\"");
}

double num(const json& j, const std::string& where) {
  if (!j.is_number()) bad(where, "expected a number");
  return j.get<double>();
}

int integer(const json& j, const std::string& where) {
  if (!j.is_number_integer()) bad(where, "expected an integer");
  return j.get<int>();
}

cd complex_value(const json& j, const std::string& where) {
  if (j.is_number()) return cd(j.get<double>());
  if (j.is_array() && j.size() == 2 && j[0].is_number() && j[1].is_number()) return cd(j[0].get<double>(), j[1].get<double>());
  bad(where, "expected a number or [re, im]");
}

std::vector<double> num_list(const json& j, const std::string& where) {
  if (!j.is_array()) bad(where, "expected an array");
  std::vector<double> v;
  for (std::size_t i = 0; i < j.size(); ++i) v.push_back(num(j[i], where + "[" + std::to_string(i) + "]"));
  return v;
}

std::vector<Bump> bumps(const json& j, const std::string& where, int comps) {
  if (!j.is_array()) bad(where, "expected an array of bumps");
  std::vector<Bump> out;
  for (std::size_t i = 0; i < j.size(); ++i) {
    const std::string w = where + "[" + std::to_string(i) + "]";
    check_keys(j[i], w, {"center", "width", "amplitude"});
    Bump b;
    std::vector<std::string> missing;
    for (const char* k : {"center", "width", "amplitude"})
      if (!j[i].contains(k)) missing.push_back(k);
    if (!missing.empty()) {
      std::string m;
      for (const auto& s : missing) m += (m.empty() ? "" : ", ") + s;
      bad(w, "missing required keys: " + m);
    }
    b.center = num_list(j[i]["center"], w + ".center");
    b.width = num(j[i]["width"], w + ".width");
    if (!(b.width > 0.0)) bad(w + ".width", "must be positive");
    const json& a = j[i]["amplitude"];
    if (comps == 1 && !(a.is_array() && a.size() != 2)) {
      b.amplitude = {complex_value(a, w + ".amplitude")};
    } else {
      if (!a.is_array()) bad(w + ".amplitude", "expected an array");
      for (std::size_t k = 0; k < a.size(); ++k) b.amplitude.push_back(complex_value(a[k], w + ".amplitude"));
    }
    if (static_cast<int>(b.amplitude.size()) != comps) bad(w + ".amplitude", "expected " + std::to_string(comps) + " components");
    out.push_back(b);
  }
  return out;
}

PatchSpec patch(const json& j, const std::string& where) {
  check_keys(j, where, {"face", "window"});
  PatchSpec p;
  if (j.contains("face")) {
    const json& f = j["face"];
    if (!f.is_array() || f.size() != 2) bad(where + ".face", "expected [axis, side]");
    p.axis = integer(f[0], where + ".face");
    p.side = integer(f[1], where + ".face");
  }
  if (j.contains("window")) {
    const json& w = j["window"];
    if (!w.is_array()) bad(where + ".window", "expected an array of [lo, hi] pairs");
    for (const auto& iv : w) {
      const auto v = num_list(iv, where + ".window");
      if (v.size() != 2) bad(where + ".window", "expected [lo, hi]");
      p.window.emplace_back(v[0], v[1]);
    }
  }
  return p;
}

void coeff_block(const json& j, const std::string& where, int n, std::vector<Bump>& A, std::vector<Bump>& q) {
  check_keys(j, where, {"A", "q"});
  if (j.contains("A")) A = bumps(j["A"], where + ".A", n);
  if (j.contains("q")) q = bumps(j["q"], where + ".q", 1);
}

Scenario scenario_from(const json& j, const std::string& where) {
  check_keys(j, where,
             {"name", "n", "N", "s", "M", "gamma1", "gamma2", "widths", "base", "perturbation", "t", "h", "lambda",
              "basis_modes", "beta0", "mode", "solver", "cgo", "delta_threshold"});
  std::vector<std::string> missing;
  for (const char* k : {"name"})
    if (!j.contains(k)) missing.push_back(k);
  if (!missing.empty()) {
    std::string m;
    for (const auto& s : missing) m += (m.empty() ? "" : ", ") + s;
    bad(where, "missing required keys: " + m);
  }
  Scenario sc = calibration_scenario();
  if (!j["name"].is_string()) bad(where + ".name", "expected a string");
  sc.name = j["name"].get<std::string>();
  if (j.contains("n")) sc.n = integer(j["n"], where + ".n");
  if (j.contains("N")) sc.N = integer(j["N"], where + ".N");
  if (j.contains("s")) sc.s = num(j["s"], where + ".s");
  if (j.contains("M")) sc.M = num(j["M"], where + ".M");
  if (j.contains("gamma1")) sc.gamma1 = patch(j["gamma1"], where + ".gamma1");
  if (j.contains("gamma2")) sc.gamma2 = patch(j["gamma2"], where + ".gamma2");
  if (j.contains("widths")) {
    const auto w = num_list(j["widths"], where + ".widths");
    if (w.size() != 4) bad(where + ".widths", "expected four widths");
    for (int i = 0; i < 4; ++i) sc.widths[i] = w[i];
  }
  if (sc.n != 3 && !(j.contains("base") && j.contains("perturbation")))
    bad(where, "n != 3 requires explicit base and perturbation bumps");
  if (j.contains("base")) {
    sc.base_A.clear();
    sc.base_q.clear();
    coeff_block(j["base"], where + ".base", sc.n, sc.base_A, sc.base_q);
  }
  if (j.contains("perturbation")) {
    sc.pert_A.clear();
    sc.pert_q.clear();
    coeff_block(j["perturbation"], where + ".perturbation", sc.n, sc.pert_A, sc.pert_q);
  }
  if (j.contains("t")) sc.t = num_list(j["t"], where + ".t");
  if (j.contains("h")) sc.h = num_list(j["h"], where + ".h");
  if (j.contains("lambda")) sc.lambda = num(j["lambda"], where + ".lambda");
  if (j.contains("basis_modes")) sc.basis_modes = integer(j["basis_modes"], where + ".basis_modes");
  if (j.contains("beta0")) sc.beta0 = num(j["beta0"], where + ".beta0");
  if (j.contains("mode")) {
    if (!j["mode"].is_string()) bad(where + ".mode", "expected a string");
    sc.mode = j["mode"].get<std::string>();
    if (sc.mode != "with_A" && sc.mode != "A_zero") bad(where + ".mode", "expected \"with_A\" or \"A_zero\"");
  }
  if (j.contains("solver")) {
    const json& s = j["solver"];
    check_keys(s, where + ".solver", {"tol", "max_iter", "direct_cap"});
    if (s.contains("tol")) sc.solver.tol = num(s["tol"], where + ".solver.tol");
    if (s.contains("max_iter")) sc.solver.max_iter = integer(s["max_iter"], where + ".solver.max_iter");
    if (s.contains("direct_cap")) sc.solver.direct_cap = integer(s["direct_cap"], where + ".solver.direct_cap");
  }
  if (j.contains("cgo")) {
    const json& c = j["cgo"];
    check_keys(c, where + ".cgo", {"eps_reg_factor", "neumann_tol", "neumann_max_iter", "bloch_shift"});
    if (c.contains("eps_reg_factor")) sc.cgo.eps_reg_factor = num(c["eps_reg_factor"], where + ".cgo.eps_reg_factor");
    if (c.contains("neumann_tol")) sc.cgo.neumann_tol = num(c["neumann_tol"], where + ".cgo.neumann_tol");
    if (c.contains("neumann_max_iter")) sc.cgo.neumann_max_iter = integer(c["neumann_max_iter"], where + ".cgo.neumann_max_iter");
    if (c.contains("bloch_shift")) {
      if (!c["bloch_shift"].is_boolean()) bad(where + ".cgo.bloch_shift", "expected true or false");
      sc.cgo.bloch_shift = c["bloch_shift"].get<bool>();
    }
  }
  if (j.contains("delta_threshold")) sc.delta_threshold = num(j["delta_threshold"], where + ".delta_threshold");
  if (sc.n < 3) fail(ErrorCode::precondition, "config " + where + ".n: dimension below model hypothesis (n >= 3 required)");
  if (sc.h.empty() || sc.t.empty()) bad(where, "t and h lists must be non-empty");
  for (double h : sc.h)
    if (!(h > 0.0)) bad(where + ".h", "entries must be positive");
  return sc;
}

json complex_json(cd z) { return z.imag() == 0.0 ? json(z.real()) : json::array({z.real(), z.imag()}); }

json bumps_json(const std::vector<Bump>& v, bool vector_amp) {
  json a = json::array();
  for (const auto& b : v) {
    json amp;
    if (vector_amp) {
      amp = json::array();
      for (const auto& z : b.amplitude) amp.push_back(complex_json(z));
    } else {
      amp = complex_json(b.amplitude[0]);
    }
    a.push_back({{"center", b.center}, {"width", b.width}, {"amplitude", amp}});
  }
  return a;
}

json patch_json(const PatchSpec& p) {
  json w = json::array();
  for (const auto& [lo, hi] : p.window) w.push_back({lo, hi});
  return {{"face", {p.axis, p.side}}, {"window", w}};
}

json scenario_json(const Scenario& sc) {
  return {{"name", sc.name},
          {"n", sc.n},
          {"N", sc.N},
          {"s", sc.s},
          {"M", sc.M},
          {"gamma1", patch_json(sc.gamma1)},
          {"gamma2", patch_json(sc.gamma2)},
          {"widths", sc.widths},
          {"base", {{"A", bumps_json(sc.base_A, true)}, {"q", bumps_json(sc.base_q, false)}}},
          {"perturbation", {{"A", bumps_json(sc.pert_A, true)}, {"q", bumps_json(sc.pert_q, false)}}},
          {"t", sc.t},
          {"h", sc.h},
          {"lambda", sc.lambda},
          {"basis_modes", sc.basis_modes},
          {"beta0", sc.beta0},
          {"mode", sc.mode},
          {"solver", {{"tol", sc.solver.tol}, {"max_iter", sc.solver.max_iter}, {"direct_cap", sc.solver.direct_cap}}},
          {"cgo",
           {{"eps_reg_factor", sc.cgo.eps_reg_factor},
            {"neumann_tol", sc.cgo.neumann_tol},
            {"neumann_max_iter", sc.cgo.neumann_max_iter},
            {"bloch_shift", sc.cgo.bloch_shift}}},
          {"delta_threshold", sc.delta_threshold}};
}

std::pair<int, int> line_col(const std::string& text, std::size_t byte) {
  int line = 1, col = 1;
  for (std::size_t i = 0; i < byte && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return {line, col};
}

} // namespace

std::vector<Scenario> parse_config(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    const auto [line, col] = line_col(text, e.byte > 0 ? e.byte - 1 : 0);
    fail(ErrorCode::parse, "config parse error at line " + std::to_string(line) + ", column " + std::to_string(col));
  }
  check_keys(j, "root", {"scenarios"});
  if (!j.contains("scenarios")) bad("root", "missing required keys: scenarios");
  if (!j["scenarios"].is_array() || j["scenarios"].empty()) bad("scenarios", "expected a non-empty array");
  std::vector<Scenario> out;
  for (std::size_t i = 0; i < j["scenarios"].size(); ++i)
    out.push_back(scenario_from(j["scenarios"][i], "scenarios[" + std::to_string(i) + "]"));
  return out;
}

std::vector<Scenario> load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::io, "cannot open config " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::string serialize_config(const std::vector<Scenario>& scenarios) {
  json a = json::array();
  for (const auto& s : scenarios) a.push_back(scenario_json(s));
  return json{{"scenarios", a}}.dump(2) + "\n";
}

void persist_config(const std::string& path, const std::vector<Scenario>& scenarios) {
  std::ofstream o(path);
  if (!o) fail(ErrorCode::io, "cannot open " + path + " for writing");
  o << serialize_config(scenarios);
}

std::string describe(const Scenario& sc) {
  std::ostringstream o;
  o.precision(10);
  auto list = [&](const std::vector<double>& v) {
    std::string s;
    for (double x : v) s += (s.empty() ? "" : " ") + std::to_string(x);
    return s;
  };
  o << "scenario " << sc.name << "\n"
    << "  n " << sc.n << "  N " << sc.N << "  s " << sc.s << "  M " << sc.M << "\n"
    << "  gamma1 face (" << sc.gamma1.axis << "," << sc.gamma1.side << ")  gamma2 face (" << sc.gamma2.axis << ","
    << sc.gamma2.side << ")\n"
    << "  widths " << sc.widths[0] << " " << sc.widths[1] << " " << sc.widths[2] << " " << sc.widths[3] << "\n"
    << "  bumps: base A " << sc.base_A.size() << ", base q " << sc.base_q.size() << ", perturbation A "
    << sc.pert_A.size() << ", perturbation q " << sc.pert_q.size() << "\n"
    << "  t " << list(sc.t) << "\n"
    << "  h " << list(sc.h) << "\n"
    << "  lambda " << sc.lambda << " (tau = lambda h)\n"
    << "  basis_modes " << sc.basis_modes << " per tangential axis, input weights (7/2, 3/2), output weights (5/2, 1/2)\n"
    << "  beta0 " << sc.beta0 << "\n"
    << "  mode " << sc.mode << "\n"
    << "  solver tol " << sc.solver.tol << "  max_iter " << sc.solver.max_iter << "  direct_cap " << sc.solver.direct_cap
    << "\n"
    << "  cgo eps_reg_factor " << sc.cgo.eps_reg_factor << "  neumann_tol " << sc.cgo.neumann_tol
    << "  neumann_max_iter " << sc.cgo.neumann_max_iter << "  bloch_shift " << (sc.cgo.bloch_shift ? "on" : "off")
    << "\n"
    << "  rho = h^(-1/(n+2)) clamped to the grid Nyquist limit\n"
    << "  delta_threshold " << sc.delta_threshold << "\n";
  return o.str();
}

} // namespace bh
