#include "bh/commands.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <random>
#include <sstream>

#include "json.hpp"

#include "bh/carleman_uc.hpp"
#include "bh/dtn.hpp"
#include "bh/error.hpp"
#include "bh/io.hpp"
#include "bh/norms.hpp"

namespace bh {

namespace {

constexpr double pi = std::numbers::pi;

std::string g17(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

struct Out {
  const Scenario& sc;
  const CommandOptions& opt;
  CommandReport rep;
  std::string path(const std::string& suffix) const {
    return (std::filesystem::path(opt.out_dir) / (sc.name + "_" + suffix)).string();
  }
  void text(const std::string& suffix, const std::string& body) {
    const std::string p = path(suffix);
    write_text(p, body);
    rep.files.push_back(p);
  }
  void field(const std::string& suffix, const std::vector<ScalarField>& comps) {
    const std::string p = path(suffix);
    write_fields(p, comps);
    rep.files.push_back(p);
  }
};

BoundaryBasis input_basis(const Scenario& sc, const GridSpec& g) {
  return make_boundary_basis(g, make_patch(g, Face{sc.gamma1.axis, sc.gamma1.side}, sc.gamma1.window), sc.basis_modes);
}

std::vector<SineBasis> output_basis(const Scenario& sc, const GridSpec& g) {
  std::vector<SineBasis> out;
  for (const auto& w : make_patch(g, Face{sc.gamma2.axis, sc.gamma2.side}, sc.gamma2.window).faces)
    out.push_back(make_sine_basis(g, w, sc.basis_modes));
  return out;
}

double h1_norm(const ScalarField& u) {
  double acc = std::pow(l2_norm(u), 2);
  for (int d = 0; d < u.grid.n; ++d) acc += std::pow(l2_norm(partial(u, d)), 2);
  return std::sqrt(acc);
}

void run_forward(Out& o) {
  const Scenario& sc = o.sc;
  const GridSpec g = build_grid(sc.n, sc.N);
  const double t = sc.t.back();
  const CoefficientPair p = build_pair(sc, g, t, sc.mode == "A_zero");
  const BoundaryBasis basis = input_basis(sc, g);
  std::mt19937_64 rng(o.opt.seed);
  std::normal_distribution<double> G;
  ScalarField f(g), gg(g), fj(g), gj(g);
  for (std::size_t j = 0; j < basis.count(); ++j) {
    basis_entry_data(basis, j, fj, gj);
    const cd c(G(rng), G(rng));
    f = f + c * fj;
    gg = gg + c * gj;
  }
  std::string csv = "which,iterations,residual,condition,used_direct,u_L2,u_H1,lap_L2\n";
  std::ostringstream s;
  s << "forward solves at t " << t << " with seeded random data on gamma1 (seed " << o.opt.seed << ", "
    << basis.count() << " basis entries), F = 0\n";
  int which = 1;
  for (const CoefficientSet* c : {&p.c1, &p.c2}) {
    const NavierSolution sol = solve_navier({*c, ScalarField(g), f, gg}, sc.solver);
    const bool ok = sol.report.condition_flag == ConditionFlag::ok;
    csv += std::to_string(which) + "," + std::to_string(sol.report.iterations) + "," + g17(sol.report.residual) + "," +
           (ok ? "ok" : "near_singular") + "," + (sol.report.used_direct ? "1" : "0") + "," + g17(l2_norm(sol.u)) +
           "," + g17(h1_norm(sol.u)) + "," + g17(l2_norm(sol.lap)) + "\n";
    s << "  u" << which << ": " << sol.report.iterations << " iterations, residual " << sol.report.residual << ", "
      << (ok ? "ok" : "near singular") << "\n";
    o.field("forward_u" + std::to_string(which) + ".bhfld", {sol.u, sol.lap});
    ++which;
  }
  o.text("forward.csv", csv);
  o.rep.summary = s.str();
}

void run_dtn(Out& o) {
  const Scenario& sc = o.sc;
  const GridSpec g = build_grid(sc.n, sc.N);
  const BoundaryBasis basis = input_basis(sc, g);
  const auto out = output_basis(sc, g);
  DtnOptions dopt;
  dopt.solver = sc.solver;
  dopt.threads = o.opt.threads;
  const bool a_zero = sc.mode == "A_zero";
  const PartialDtnMatrix ref = assemble_dtn(build_pair(sc, g, 0.0, a_zero).c1, basis, out, dopt);
  write_dtn(o.path("dtn_ref.bhdtn"), ref);
  o.rep.files.push_back(o.path("dtn_ref.bhdtn"));
  std::string csv = "t,delta,basis_size,rows,max_column_residual\n";
  std::ostringstream s;
  s << "partial DtN maps: " << basis.count() << " input entries, " << ref.matrix.rows() << " output coefficients\n";
  for (std::size_t i = 0; i < sc.t.size(); ++i) {
    const PartialDtnMatrix m = assemble_dtn(build_pair(sc, g, sc.t[i], a_zero).c2, basis, out, dopt);
    const double delta = dtn_difference_norm(ref, m);
    const double res = *std::max_element(m.column_residuals.begin(), m.column_residuals.end());
    csv += g17(sc.t[i]) + "," + g17(delta) + "," + std::to_string(basis.count()) + "," +
           std::to_string(m.matrix.rows()) + "," + g17(res) + "\n";
    const std::string name = "dtn_t" + std::to_string(i) + ".bhdtn";
    write_dtn(o.path(name), m);
    o.rep.files.push_back(o.path(name));
    s << "  t " << sc.t[i] << "  delta " << delta << "\n";
  }
  o.text("dtn.csv", csv);
  o.rep.summary = s.str();
}

double fit_slope(const std::vector<double>& x, const std::vector<double>& y) {
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= static_cast<double>(x.size());
  my /= static_cast<double>(y.size());
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
  }
  return sxy / sxx;
}

void run_cgo(Out& o) {
  const Scenario& sc = o.sc;
  const GridSpec g = build_grid(sc.n, sc.N);
  const CoefficientPair p = build_pair(sc, g, sc.t.back(), sc.mode == "A_zero");
  std::vector<double> xi(sc.n, 0.0), m1(sc.n, 0.0), m2(sc.n, 0.0);
  xi[sc.n - 1] = pi;
  m1[0] = 1.0;
  m2[1] = 1.0;
  std::string csv = "tau,remainder_h1_scl,iterations,periodic_residual,clamped_modes,stencil_residual\n";
  std::vector<double> lt, lr;
  CgoSolution last;
  for (double tau : {0.4, 0.2, 0.1, 0.05}) {
    const CgoSolution s = build_cgo(p.c2, make_directions(xi, m1, m2, tau), AmplitudeKind::one, CgoRole::direct_side,
                                    sc.cgo);
    const double rn = remainder_h1_scl(s, g);
    csv += g17(tau) + "," + g17(rn) + "," + std::to_string(s.iterations) + "," + g17(s.periodic_residual) + "," +
           std::to_string(s.clamped_modes) + "," + g17(stencil_residual(s, p.c2, g)) + "\n";
    lt.push_back(std::log(tau));
    lr.push_back(std::log(rn));
    last = s;
  }
  o.text("cgo.csv", csv);
  o.field("cgo_remainder.bhfld", {cgo_remainder(last, g)});
  std::ostringstream s;
  s << describe(last.directions) << "\nslope of log |r|_H1scl against log tau: " << fit_slope(lt, lr) << "\n";
  o.rep.summary = s.str();
}

void run_reconstruct(Out& o) {
  const Scenario& sc = o.sc;
  const GridSpec g = build_grid(sc.n, sc.N);
  const bool a_zero = sc.mode == "A_zero";
  const double t = sc.t.back();
  const double h = *std::min_element(sc.h.begin(), sc.h.end());
  const CoefficientPair p = build_pair(sc, g, t, a_zero);
  const ScalarField dq = p.c2.q - p.c1.q;
  const VectorField dA = p.c2.A - p.c1.A;
  const TwoFormField w = d_operator(dA);

  // the low-pass ball plus the first nonzero lattice frequencies
  const double rho_used = std::min(lowpass_radius(h, sc.n), pi / g.spacing);
  auto ks = lattice_ball(sc.n, rho_used, static_cast<int>(std::ceil(rho_used / pi)));
  const std::size_t in_ball = ks.size();
  int extra = 0;
  for (const auto& k : lattice_ball(sc.n, pi * 1.0000001, 1)) {
    if (extra == 4) break;
    if (std::find(ks.begin(), ks.end(), k) != ks.end()) continue;
    ks.push_back(k);
    ++extra;
  }
  ExtractOptions eo;
  eo.cgo = sc.cgo;
  eo.class_bound = sc.M;
  eo.threads = o.opt.threads;
  FourierSamples fs;
  fs.h_used = h;
  fs.lambda_used = sc.lambda;
  fs.tau_used = sc.lambda * h;
  std::string csv = "k,xi_norm,quantity,extracted_re,extracted_im,oracle_re,oracle_im,abs_error,budget\n";
  const auto pairs = two_form_pairs(sc.n);
  double worst_q = 0.0, worst_dA = 0.0;
  for (std::size_t i = 0; i < ks.size(); ++i) {
    std::vector<double> xi(sc.n);
    std::string kname;
    double xn = 0.0;
    for (int d = 0; d < sc.n; ++d) {
      xi[d] = pi * ks[i][d];
      xn += xi[d] * xi[d];
      kname += (d ? " " : "") + std::to_string(ks[i][d]);
    }
    xn = std::sqrt(xn);
    auto row = [&](const std::string& what, cd val, cd ora, double budget) {
      csv += kname + "," + g17(xn) + "," + what + "," + g17(val.real()) + "," + g17(val.imag()) + "," +
             g17(ora.real()) + "," + g17(ora.imag()) + "," + g17(std::abs(val - ora)) + "," + g17(budget) + "\n";
    };
    const QHat q = extract_q_hat(p.c1, p.c2, xi, h, sc.lambda, a_zero ? QMode::A_zero : QMode::with_A, eo);
    const cd qo = fourier_sample(dq, xi);
    row("q", q.value, qo, q.budget.total());
    if (xn > 0.0 && std::abs(qo) > 0.0) worst_q = std::max(worst_q, std::abs(q.value - qo) / std::abs(qo));
    std::vector<cd> dvals(pairs.size(), 0.0);
    if (!a_zero) {
      const DAHat a = extract_dA_hat(p.c1, p.c2, xi, h, sc.lambda, eo);
      dvals = a.values;
      for (std::size_t m = 0; m < pairs.size(); ++m) {
        const cd ora = fourier_sample(w.c[m], xi);
        row("dA_" + std::to_string(pairs[m].first + 1) + std::to_string(pairs[m].second + 1), a.values[m], ora,
            a.budgets[m].total());
        if (xn > 0.0 && std::abs(ora) > 1e-3) worst_dA = std::max(worst_dA, std::abs(a.values[m] - ora) / std::abs(ora));
      }
    }
    if (i < in_ball) {
      fs.k.push_back(ks[i]);
      fs.q_hat.push_back(q.value);
      fs.dA_hat.push_back(dvals);
    }
  }
  o.text("reconstruct.csv", csv);
  LowpassInfo info;
  const ScalarField q_rec = lowpass_invert_q(fs, g, &info);
  o.field("q_rec.bhfld", {q_rec});
  std::ostringstream s;
  s.precision(6);
  s << "reconstruction at t " << t << ", h " << h << ", tau " << sc.lambda * h << ", mode " << sc.mode << "\n"
    << "  low-pass radius " << info.rho << (info.clamped ? " (clamped)" : "") << ", " << info.used
    << " lattice frequencies inside, " << extra << " further frequencies extracted for comparison\n"
    << "  largest relative error at nonzero frequencies: q " << worst_q;
  if (!a_zero) {
    s << ", dA " << worst_dA;
    const TwoFormField dA_rec = lowpass_invert_dA(fs, g);
    o.field("dA_rec.bhfld", dA_rec.c);
    const DecompositionResult dec = decompose(dA);
    o.field("A_sol.bhfld", dec.A_sol.c);
    o.field("grad_phi.bhfld", dec.grad_phi.c);
    s << "\n  decomposition of A2 - A1: |A_sol|_inf " << linf_norm(dec.A_sol) << ", |grad phi|_inf "
      << linf_norm(dec.grad_phi) << ", boundary residual " << dec.boundary_residual;
  }
  s << "\n  err_q H^-1 " << sobolev_norm(dq - q_rec, -1.0) << "\n";
  o.rep.summary = s.str();
}

void run_carleman(Out& o) {
  const Scenario& sc = o.sc;
  const GridSpec g = build_grid(sc.n, sc.N);
  auto sines = [n = sc.n](const double* x) {
    double v = 1.0;
    for (int d = 0; d < n; ++d) v *= std::sin(pi * x[d]);
    return cd(v);
  };
  ScalarField u = sample(g, sines);
  ScalarField lap = sample(g, [&](const double* x) { return -static_cast<double>(sc.n) * pi * pi * sines(x); });
  zero_ring(u);
  zero_ring(lap);
  std::vector<std::pair<double, double>> whole(sc.n - 1, {0.0, 1.0});
  const auto gamma = make_patch(g, Face{0, 1}, whole);
  std::vector<double> betas{1.0, 2.0, 4.0};
  if (std::find(betas.begin(), betas.end(), sc.beta0) == betas.end()) betas.push_back(sc.beta0);
  std::string csv = "beta0,h,lhs,rhs,ratio,log_shift,layer_nodes\n";
  std::ostringstream s;
  s << "Carleman sweep on the sine test function, psi = x1, Gamma = {x1 = 1}\n";
  for (double b : betas) {
    const InequalityReport r = carleman_check(make_weight(g, gamma, b), u, lap, {0.2, 0.1, 0.05, 0.025});
    for (std::size_t i = 0; i < r.h_values.size(); ++i)
      csv += g17(b) + "," + g17(r.h_values[i]) + "," + g17(r.lhs[i]) + "," + g17(r.rhs[i]) + "," + g17(r.ratio[i]) +
             "," + g17(r.log_shift[i]) + "," + g17(r.layer_nodes[i]) + "\n";
    s << "  beta0 " << b << ": slope of log ratio against 1/h " << r.trend_slope << ", best constant "
      << r.best_constant << ", weight layer " << r.layer_nodes.back() << " grid spacings at h 0.025\n";
  }
  o.text("carleman.csv", csv);
  o.rep.summary = s.str();
}

void run_uc(Out& o) {
  const Scenario& sc = o.sc;
  const GridSpec g = build_grid(sc.n, sc.N);
  const CoefficientPair p = build_pair(sc, g, 0.0, sc.mode == "A_zero");
  const auto chain = make_neighborhoods(g, sc.widths[0], sc.widths[1], sc.widths[2], sc.widths[3]);
  const auto gamma0 = make_patch(g, Face{sc.gamma1.axis, sc.gamma1.side}, sc.gamma1.window);
  UcOptions uo;
  uo.solver = sc.solver;
  uo.boundary_modes = sc.basis_modes;
  const UcReport r = unique_continuation_experiment(p.c1, chain, gamma0, uc_catalog(g, sc.widths[0]), sc.h, uo);
  std::string csv = "scenario,h,lhs,interior,boundary,ratio\n";
  for (const auto& c : r.cells)
    csv += c.scenario + "," + g17(c.h) + "," + g17(c.lhs) + "," + g17(c.interior) + "," + g17(c.boundary) + "," +
           g17(c.ratio) + "\n";
  o.text("uc.csv", csv);
  const nlohmann::json fit = {{"alpha1", r.alpha1},   {"alpha2", r.alpha2},     {"alpha1_interior", r.alpha1_interior},
                              {"margin", r.margin},   {"constant", r.constant}, {"alpha1_capped", r.alpha1_capped},
                              {"feasible", r.feasible}, {"beta0", sc.beta0}};
  o.text("uc_fit.txt", fit.dump(2) + "\n");
  o.rep.summary = "unique continuation fit\n" + fit.dump(2) + "\n";
}

void run_sweep(Out& o) {
  const SweepResult r = run_scenario(o.sc, {o.opt.threads});
  o.text("records.csv", records_csv(r.records));
  o.text("aborted.csv", aborted_csv(r.aborted));
  o.rep.summary = sweep_summary(o.sc, r, o.opt.threads);
  o.text("summary.txt", o.rep.summary);
  o.rep.aborted = r.aborted.size();
}

} // namespace

bool parse_command(const std::string& name, Command& out) {
  static const std::pair<const char*, Command> table[] = {
      {"forward", Command::forward},   {"dtn", Command::dtn}, {"cgo", Command::cgo},     {"reconstruct", Command::reconstruct},
      {"carleman", Command::carleman}, {"uc", Command::uc},   {"sweep", Command::sweep}};
  for (const auto& [n, c] : table)
    if (name == n) {
      out = c;
      return true;
    }
  return false;
}

CommandReport run_command(Command cmd, const Scenario& sc, const CommandOptions& opt) {
  std::filesystem::create_directories(opt.out_dir);
  Out o{sc, opt, {}};
  switch (cmd) {
  case Command::forward:
    run_forward(o);
    break;
  case Command::dtn:
    run_dtn(o);
    break;
  case Command::cgo:
    run_cgo(o);
    break;
  case Command::reconstruct:
    run_reconstruct(o);
    break;
  case Command::carleman:
    run_carleman(o);
    break;
  case Command::uc:
    run_uc(o);
    break;
  case Command::sweep:
    run_sweep(o);
    break;
  }
  return o.rep;
}

std::vector<StabilityRecord> parse_records_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line.rfind("t,delta,h,", 0) != 0)
    fail(ErrorCode::parse, "records file: missing header line");
  std::vector<StabilityRecord> out;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::vector<std::string> cols;
    std::stringstream ss(line);
    for (std::string c; std::getline(ss, c, ',');) cols.push_back(c);
    if (cols.size() != 15) fail(ErrorCode::parse, "records file line " + std::to_string(lineno) + ": expected 15 columns");
    std::vector<double> v(15);
    for (int i = 0; i < 15; ++i) {
      try {
        std::size_t used = 0;
        v[i] = std::stod(cols[i], &used);
        if (used != cols[i].size()) throw std::invalid_argument(cols[i]);
      } catch (const std::exception&) {
        fail(ErrorCode::parse, "records file line " + std::to_string(lineno) + ", column " + std::to_string(i + 1) +
                                   ": not a number");
      }
    }
    StabilityRecord r;
    r.t = v[0];
    r.delta = v[1];
    r.h = v[2];
    r.rho = v[3];
    r.rho_clamped = v[4] != 0.0;
    r.lambda = v[5];
    r.tau = v[6];
    r.samples = static_cast<std::size_t>(v[7]);
    r.err_A_Linf = v[8];
    r.err_dA_Linf = v[9];
    r.err_q_Hminus1 = v[10];
    r.q_budget = v[11];
    r.above_threshold = v[12] != 0.0;
    r.fit_q = v[13];
    r.fit_A = v[14];
    out.push_back(r);
  }
  return out;
}

CommandReport run_fit(const std::string& records_path, FitModel model, FitTarget target, const CommandOptions& opt) {
  std::ifstream in(records_path);
  if (!in) fail(ErrorCode::io, "cannot open records file " + records_path);
  std::stringstream ss;
  ss << in.rdbuf();
  const auto recs = parse_records_csv(ss.str());
  std::vector<double> hs;
  for (const auto& r : recs)
    if (std::find(hs.begin(), hs.end(), r.h) == hs.end()) hs.push_back(r.h);
  const char* tname = target == FitTarget::q ? "err_q_Hminus1" : target == FitTarget::A ? "err_A_Linf" : "err_dA_Linf";
  std::ostringstream s;
  s << "model " << to_string(model) << ", target " << tname << "\n";
  std::string csv = "h,model,target,exponent,std_error,intercept,residual,points\n";
  CommandReport rep;
  for (double h : hs) {
    std::vector<StabilityRecord> sub;
    for (const auto& r : recs)
      if (r.h == h && !r.above_threshold) sub.push_back(r);
    const FitResult f = fit_stability_curve(sub, model, target);
    csv += g17(h) + "," + to_string(model) + "," + tname + "," + g17(f.exponent) + "," + g17(f.std_error) + "," +
           g17(f.intercept) + "," + g17(f.residual) + "," + std::to_string(f.points) + "\n";
    s << "  h " << h << ": exponent " << f.exponent << " +- " << f.std_error << " (" << f.points << " points)\n";
  }
  std::filesystem::create_directories(opt.out_dir);
  const std::string p = (std::filesystem::path(opt.out_dir) / "fit.csv").string();
  write_text(p, csv);
  rep.files.push_back(p);
  rep.summary = s.str();
  return rep;
}

} // namespace bh
