#include "bh/carleman_uc.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "bh/dtn.hpp"
#include "bh/error.hpp"

namespace bh {

namespace {

std::string node_text(const GridSpec& g, std::size_t k) {
  std::vector<int> idx(g.n);
  g.unflatten(k, idx.data());
  std::ostringstream os;
  os << "(";
  for (int d = 0; d < g.n; ++d) os << (d ? "," : "") << idx[d];
  os << ")";
  return os.str();
}

std::vector<std::uint8_t> patch_mask(const GridSpec& g, const BoundaryPatch& p) {
  std::vector<std::uint8_t> m(g.padded_size(), 0);
  for (const auto& w : p.faces) {
    const auto nodes = face_nodes(g, w.face);
    for (std::size_t i = 0; i < nodes.size(); ++i)
      if (w.mask[i]) m[nodes[i]] = 1;
  }
  return m;
}

double slope(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
    sxx += x[i] * x[i];
    sxy += x[i] * y[i];
  }
  const double den = n * sxx - sx * sx;
  return den > 0.0 ? (n * sxy - sx * sy) / den : 0.0;
}

ScalarField trace_field(const GridSpec& g, const std::vector<std::size_t>& nodes, const std::vector<cd>& vals) {
  ScalarField t(g);
  for (std::size_t i = 0; i < nodes.size(); ++i) t.v[nodes[i]] = vals[i];
  return t;
}

} // namespace

CarlemanWeight make_weight(const GridSpec& g, const BoundaryPatch& gamma, double beta0) {
  if (!(beta0 > 0.0)) fail(ErrorCode::invalid_argument, "β₀ must be positive");
  if (gamma.faces.size() != 1) fail(ErrorCode::invalid_argument, "Carleman weight needs Γ inside a single face");
  CarlemanWeight w;
  w.beta0 = beta0;
  w.gamma = gamma;
  w.face = gamma.faces[0].face;
  const int a = w.face.axis;
  const bool upper = w.face.side == 1;
  w.psi = sample(g, [a, upper](const double* x) { return cd(upper ? x[a] : 1.0 - x[a]); });
  w.phi = ScalarField(g);
  for (std::size_t k = 0; k < g.padded_size(); ++k) w.phi.v[k] = std::exp(beta0 * w.psi.v[k].real());

  for (std::size_t k = 0; k < g.padded_size(); ++k)
    if (w.psi.v[k].real() < 0.0) fail(ErrorCode::precondition, "weight psi negative at node " + node_text(g, k));
  const VectorField gp = gradient(w.psi);
  for (std::size_t k = 0; k < g.padded_size(); ++k) {
    double m = 0.0;
    for (const auto& c : gp.c) m += std::norm(c.v[k]);
    if (std::sqrt(m) < 1e-8) fail(ErrorCode::precondition, "weight gradient vanishes at node " + node_text(g, k));
  }
  const auto in_gamma = patch_mask(g, gamma);
  for (int axis = 0; axis < g.n; ++axis)
    for (int side = 0; side < 2; ++side) {
      const Face f{axis, side};
      const auto nodes = face_nodes(g, f);
      const auto dn = normal_derivative(w.psi, f, nodes);
      for (std::size_t i = 0; i < nodes.size(); ++i)
        if (!in_gamma[nodes[i]] && dn[i].real() > 1e-12)
          fail(ErrorCode::precondition, "weight has positive normal derivative outside Γ at node " + node_text(g, nodes[i]));
    }
  return w;
}

InequalityReport carleman_check(const CarlemanWeight& w, const ScalarField& u, const ScalarField& lap_u,
                                const std::vector<double>& h_values) {
  const GridSpec& g = u.grid;
  require(w.psi.grid == g && lap_u.grid == g, ErrorCode::invalid_argument, "weight and fields live on different grids");
  require(!h_values.empty(), ErrorCode::invalid_argument, "no h values");
  double umax = 0.0, lmax = 0.0, uring = 0.0, lring = 0.0;
  for (std::size_t k = 0; k < g.padded_size(); ++k) {
    umax = std::max(umax, std::abs(u.v[k]));
    lmax = std::max(lmax, std::abs(lap_u.v[k]));
  }
  for (std::size_t k : g.ring()) {
    uring = std::max(uring, std::abs(u.v[k]));
    lring = std::max(lring, std::abs(lap_u.v[k]));
  }
  if (uring > 1e-10 * std::max(umax, 1e-300)) fail(ErrorCode::precondition, "u does not vanish on the boundary");
  if (lring > 1e-10 * std::max(lmax, 1e-300)) fail(ErrorCode::precondition, "Delta u does not vanish on the boundary");

  const ScalarField lap = laplacian_with_ring(u, lap_u);
  const ScalarField bilap = laplacian(lap);
  const VectorField gu = gradient(u);
  const auto gamma_nodes = [&] {
    std::vector<std::size_t> nodes;
    const auto all = face_nodes(g, w.face);
    for (std::size_t i = 0; i < all.size(); ++i)
      if (w.gamma.faces[0].mask[i]) nodes.push_back(all[i]);
    return nodes;
  }();
  const auto dn_u = normal_derivative(u, w.face, gamma_nodes);
  const auto dn_lap = normal_derivative(lap, w.face, gamma_nodes);
  const double vol = std::pow(g.spacing, g.n), area = std::pow(g.spacing, g.n - 1);
  double phimax = 0.0, gradmax = 0.0;
  for (std::size_t k = 0; k < g.padded_size(); ++k) phimax = std::max(phimax, w.phi.v[k].real());
  gradmax = 2.0 * w.beta0 * phimax; // |grad psi| = 1 for the explicit weights

  InequalityReport r;
  r.h_values = h_values;
  for (double h : h_values) {
    require(h > 0.0, ErrorCode::invalid_argument, "h must be positive");
    const double shift = 2.0 * phimax / h;
    if (!std::isfinite(shift)) fail(ErrorCode::numeric, "Carleman weight exponent overflow; use a larger h floor");
    auto wgt = [&](std::size_t k) { return std::exp(2.0 * w.phi.v[k].real() / h - shift); };
    double lhs = 0.0, rhs = 0.0, lap_rhs = 0.0;
    for (std::size_t k : g.interior()) {
      double grad2 = 0.0;
      for (const auto& c : gu.c) grad2 += std::norm(c.v[k]);
      const double e = wgt(k);
      lhs += e * (std::norm(u.v[k]) + h * h * grad2);
      rhs += e * std::norm(std::pow(h, 4) * bilap.v[k]);
      lap_rhs += e * std::norm(h * h * lap.v[k]);
    }
    lhs *= h * vol;
    rhs *= vol;
    lap_rhs *= vol;
    double bnd = 0.0, lap_bnd = 0.0;
    for (std::size_t i = 0; i < gamma_nodes.size(); ++i) {
      const double e = wgt(gamma_nodes[i]);
      bnd += e * (std::norm(h * dn_u[i]) + std::norm(h * h * h * dn_lap[i]));
      lap_bnd += e * std::norm(h * dn_u[i]);
    }
    rhs += h * area * bnd;
    lap_rhs += h * area * lap_bnd;
    if (!std::isfinite(lhs) || !std::isfinite(rhs)) fail(ErrorCode::numeric, "Carleman quadrature not finite");
    r.lhs.push_back(lhs);
    r.rhs.push_back(rhs);
    r.log_shift.push_back(shift);
    r.ratio.push_back(lhs == 0.0 ? 0.0 : lhs / rhs);
    r.lap_ratio.push_back(lhs == 0.0 ? 0.0 : lhs / lap_rhs);
    r.layer_nodes.push_back(h / gradmax / g.spacing);
  }
  r.best_constant = *std::max_element(r.ratio.begin(), r.ratio.end());
  if (h_values.size() >= 2 && r.best_constant > 0.0) {
    std::vector<double> x, y;
    for (std::size_t i = 0; i < h_values.size(); ++i) {
      if (!(r.ratio[i] > 0.0)) continue;
      x.push_back(1.0 / h_values[i]);
      y.push_back(std::log(r.ratio[i]));
    }
    r.trend_slope = x.size() >= 2 ? slope(x, y) : std::numeric_limits<double>::quiet_NaN();
  }
  return r;
}

void fit_uc_alphas(UcReport& r, const UcOptions& opt) {
  r.alpha1 = r.alpha2 = 0.0;
  r.alpha1_capped = false;
  r.feasible = true;
  r.constant = 1.0;
  bool any = false;
  for (const auto& c : r.cells) any = any || c.lhs > 0.0;
  if (!any) {
    r.alpha1 = opt.alpha_cap;
    r.alpha1_capped = true;
    r.alpha1_interior = opt.alpha_cap;
    r.margin = 1.0;
    for (auto& c : r.cells) c.ratio = 0.0;
    return;
  }
  // smallest constant making the alpha1 = alpha2 = 0 bound feasible for cells without boundary data
  for (const auto& c : r.cells)
    if (c.lhs > 0.0 && c.boundary == 0.0) r.constant = std::max(r.constant, c.lhs / c.interior);
  if (!(r.constant <= opt.max_constant)) {
    r.feasible = false;
    r.margin = 1.0 - r.constant / opt.max_constant;
    return;
  }
  const double C = r.constant;
  for (const auto& c : r.cells) {
    const double need = c.lhs / C - c.interior;
    if (c.lhs > 0.0 && need > 0.0) r.alpha2 = std::max(r.alpha2, c.h * std::log(need / c.boundary));
  }
  double a1 = opt.alpha_cap, a1i = opt.alpha_cap;
  for (const auto& c : r.cells) {
    if (c.lhs == 0.0) continue;
    const double rest = c.lhs / C - std::exp(r.alpha2 / c.h) * c.boundary;
    if (rest > 0.0) a1 = std::min(a1, -c.h * std::log(rest / c.interior));
    a1i = std::min(a1i, -c.h * std::log(c.lhs / (C * c.interior)));
  }
  r.alpha1 = std::max(0.0, a1);
  r.alpha1_capped = a1 >= opt.alpha_cap;
  r.alpha1_interior = std::max(0.0, a1i);
  double worst = 0.0;
  for (auto& c : r.cells) {
    const double bound = C * (std::exp(-r.alpha1 / c.h) * c.interior + std::exp(r.alpha2 / c.h) * c.boundary);
    c.ratio = c.lhs == 0.0 ? 0.0 : c.lhs / bound;
    worst = std::max(worst, c.ratio);
  }
  // the binding cell sits at ratio 1 up to rounding
  r.margin = std::abs(1.0 - worst) < 1e-12 ? 0.0 : 1.0 - worst;
  r.feasible = r.margin >= 0.0;
}

UcReport unique_continuation_experiment(const CoefficientSet& c, const NeighborhoodChain& chain,
                                        const BoundaryPatch& gamma0, const std::vector<UcScenario>& scenarios,
                                        const std::vector<double>& h_values, const UcOptions& opt) {
  const GridSpec& g = c.grid();
  require(!h_values.empty(), ErrorCode::invalid_argument, "no h values");
  std::vector<std::uint8_t> shell(g.padded_size(), 0);
  for (std::size_t k = 0; k < g.padded_size(); ++k) shell[k] = chain.masks[2][k] && !chain.masks[3][k];
  std::vector<SineBasis> bases;
  for (const auto& w : gamma0.faces) bases.push_back(make_sine_basis(g, w, opt.boundary_modes));

  UcReport r;
  for (const auto& sc : scenarios) {
    require(sc.F.grid == g, ErrorCode::invalid_argument, "scenario source lives on another grid");
    const NavierSolution s = solve_navier({c, sc.F, ScalarField(g), ScalarField(g)}, opt.solver);
    if (s.report.condition_flag != ConditionFlag::ok)
      fail(ErrorCode::near_singular, "Navier solve near-singular in scenario " + sc.name);
    r.solves.push_back(s.report);
    const double lhs = h1_norm_masked(s.u, shell);
    const double u0 = l2_norm(s.u), u1 = l2_norm(gradient(s.u)), l0 = l2_norm(s.lap), l1 = l2_norm(gradient(s.lap));
    const double X = std::sqrt(u0 * u0 + u1 * u1 + l0 * l0 + l1 * l1) + l2_norm_masked(sc.F, chain.masks[0]);
    double B = 0.0;
    for (const auto& b : bases) {
      const auto cu = project(b, trace_field(g, b.nodes, normal_derivative(s.u, b.face, b.nodes)));
      const auto cl = project(b, trace_field(g, b.nodes, normal_derivative(s.lap, b.face, b.nodes)));
      B += boundary_norm(cu, b, 2.5) + boundary_norm(cl, b, 0.5);
    }
    for (double h : h_values) r.cells.push_back({sc.name, h, lhs, X, B, 0.0});
  }
  fit_uc_alphas(r, opt);
  return r;
}

std::vector<UcScenario> uc_catalog(const GridSpec& g, double w0) {
  struct Src {
    const char* name;
    double c[3];
    double width;
    double amp;
  };
  const Src srcs[3] = {{"center", {0.5, 0.5, 0.5}, 0.2, 1.0},
                       {"offset", {0.42, 0.6, 0.5}, 0.15, 2.0},
                       {"near_gamma", {0.35, 0.45, 0.4}, 0.12, -1.5}};
  std::vector<UcScenario> out;
  for (const auto& s : srcs) {
    UcScenario sc{s.name, sample(g, [&](const double* x) {
                    double r2 = 0.0;
                    for (int d = 0; d < g.n; ++d) r2 += std::pow(x[d] - s.c[d % 3], 2);
                    const double t = 1.0 - r2 / (s.width * s.width);
                    return cd(t > 0.0 ? s.amp * std::pow(t, 4) : 0.0);
                  })};
    for (std::size_t k = 0; k < g.padded_size(); ++k)
      if (g.dist(k) < w0 && sc.F.v[k] != cd(0.0)) fail(ErrorCode::internal, "catalog source reaches omega_0");
    out.push_back(std::move(sc));
  }
  return out;
}

} // namespace bh
