#include "bh/reconstruction.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>

#include "bh/error.hpp"
#include "bh/fft.hpp"
#include "bh/norms.hpp"
#include "bh/parallel.hpp"

namespace bh {

namespace {

constexpr double pi = std::numbers::pi;
const cd I(0.0, 1.0);

double cell_volume(const GridSpec& g) { return std::pow(g.spacing, g.n); }

cd inner(const ScalarField& f, const ScalarField& w) {
  cd acc = 0.0;
  for (std::size_t k : f.grid.interior()) acc += f.v[k] * std::conj(w.v[k]);
  return acc * cell_volume(f.grid);
}

int norm_sq(const std::vector<int>& k) {
  int s = 0;
  for (int v : k) s += v * v;
  return s;
}

double vnorm(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

// Orthonormal vectors completing `fixed` (already orthonormal), taken from the
// coordinate axes by Gram-Schmidt in axis order.
std::vector<std::vector<double>> complete_basis(const std::vector<std::vector<double>>& fixed, int n, int want) {
  std::vector<std::vector<double>> all = fixed, out;
  for (int e = 0; e < n && static_cast<int>(out.size()) < want; ++e) {
    std::vector<double> v(n, 0.0);
    v[e] = 1.0;
    for (const auto& b : all) {
      double p = 0.0;
      for (int d = 0; d < n; ++d) p += v[d] * b[d];
      for (int d = 0; d < n; ++d) v[d] -= p * b[d];
    }
    const double l = vnorm(v);
    if (l < 0.5) continue;
    for (double& x : v) {
      x /= l;
      if (std::abs(x) < 1e-14) x = 0.0;
    }
    all.push_back(v);
    out.push_back(v);
  }
  return out;
}

CoefficientSet difference(const CoefficientSet& c1, const CoefficientSet& c2) {
  if (c1.grid() != c2.grid()) fail(ErrorCode::invalid_argument, "coefficient sets live on different grids");
  CoefficientSet d = CoefficientSet::zero(c1.grid());
  for (int a = 0; a < c1.grid().n; ++a) d.A.c[a] = c2.A.c[a] - c1.A.c[a];
  d.q = c2.q - c1.q;
  return d;
}

struct ComboResult {
  cd tau_lhs = 0.0;  // tau * int (A.D u2 + q u2) conj(u1)
  cd tau_lhs_coarse = 0.0;
  double ra = 0.0, rq = 0.0, ta = 0.0; // budget integrals
  double du2_l2 = 0.0, u1_l2 = 0.0;
  double zeta2_norm = 0.0;
  double periodic_residual = 0.0;
};

ComboResult run_combo(const CoefficientSet& c1, const CoefficientSet& c2, const CoefficientSet& diff,
                      const CgoDirections& d, const CgoOptions& opt) {
  const GridSpec& g = c1.grid();
  const int n = g.n;
  const CgoSolution s2 = build_cgo(c2, d, AmplitudeKind::one, CgoRole::direct_side, opt);
  const CgoSolution s1 = build_cgo(c1, d, AmplitudeKind::one, CgoRole::adjoint_side, opt);
  const ScalarField p2 = cgo_factor(s2, g), p1 = cgo_factor(s1, g);
  const VectorField gp2 = cgo_factor_gradient(s2, g);
  const double tau = d.tau;

  ComboResult r;
  r.periodic_residual = std::max(s1.periodic_residual, s2.periodic_residual);
  for (const cd& z : d.zeta2) r.zeta2_norm += std::norm(z);
  r.zeta2_norm = std::sqrt(r.zeta2_norm);

  std::vector<int> idx(n);
  std::vector<double> x(n);
  double du2 = 0.0, u1 = 0.0;
  for (std::size_t k : g.interior()) {
    g.unflatten(k, idx.data());
    bool even = true;
    double xxi = 0.0, grow2 = 0.0, grow1 = 0.0;
    for (int a = 0; a < n; ++a) {
      x[a] = g.coord(idx[a]);
      even = even && idx[a] % 2 == 0;
      xxi += x[a] * d.xi[a];
      grow2 -= x[a] * d.zeta2[a].imag() / tau;
      grow1 -= x[a] * d.zeta1[a].imag() / tau;
    }
    cd first = 0.0;
    double a_abs = 0.0, gr2 = 0.0;
    double du2_node = 0.0;
    for (int a = 0; a < n; ++a) {
      const cd Aa = diff.A.c[a].v[k];
      first += Aa * (d.zeta2[a] * p2.v[k] - I * tau * gp2.c[a].v[k]);
      a_abs += std::norm(Aa);
      gr2 += std::norm(gp2.c[a].v[k]);
      du2_node += std::norm(d.zeta2[a] / tau * p2.v[k] - I * gp2.c[a].v[k]);
    }
    a_abs = std::sqrt(a_abs);
    const cd integrand = std::polar(1.0, -xxi) * (first + tau * diff.q.v[k] * p2.v[k]) * std::conj(p1.v[k]);
    r.tau_lhs += integrand;
    if (even) r.tau_lhs_coarse += integrand;
    const double r1 = std::abs(p1.v[k] - 1.0), r2 = std::abs(p2.v[k] - 1.0);
    const double cross = r1 + r2 + r1 * r2;
    r.ra += a_abs * cross;
    r.rq += std::abs(diff.q.v[k]) * cross;
    r.ta += a_abs * std::sqrt(gr2) * std::abs(p1.v[k]);
    du2 += std::exp(2.0 * grow2) * du2_node;
    u1 += std::exp(2.0 * grow1) * std::norm(p1.v[k]);
  }
  const double vol = cell_volume(g);
  r.tau_lhs *= vol;
  r.tau_lhs_coarse *= vol * std::pow(2.0, n);
  r.ra *= vol;
  r.rq *= vol;
  r.ta *= vol;
  r.du2_l2 = std::sqrt(du2 * vol);
  r.u1_l2 = std::sqrt(u1 * vol);
  return r;
}

// the four sign choices (s1, s2) for (mu1, mu2)
constexpr std::array<std::array<double, 2>, 4> kSigns{{{1.0, 1.0}, {1.0, -1.0}, {-1.0, 1.0}, {-1.0, -1.0}}};

std::array<ComboResult, 4> run_combos(const CoefficientSet& c1, const CoefficientSet& c2, const CoefficientSet& diff,
                                      const std::vector<double>& xi, const std::vector<double>& mu1,
                                      const std::vector<double>& mu2, double tau, const ExtractOptions& opt) {
  std::array<ComboResult, 4> out;
  parallel_for(4, opt.threads, [&](std::size_t i) {
    std::vector<double> m1 = mu1, m2 = mu2;
    for (double& v : m1) v *= kSigns[i][0];
    for (double& v : m2) v *= kSigns[i][1];
    out[i] = run_combo(c1, c2, diff, make_directions(xi, m1, m2, tau), opt.cgo);
  });
  return out;
}

void check_tau(const std::vector<double>& xi, double h, double lambda) {
  require(h > 0.0 && lambda > 0.0, ErrorCode::invalid_argument, "h and lambda must be positive");
  if (lambda * h * vnorm(xi) > 2.0)
    fail(ErrorCode::precondition, "tau |xi| > 2 for tau = lambda h; decrease h or lambda");
}

} // namespace

std::vector<double> mu_jk(const std::vector<double>& xi, int j, int k) {
  std::vector<double> m(xi.size(), 0.0);
  m[k] += xi[j];
  m[j] -= xi[k];
  return m;
}

Cutoff identity_cutoff(const GridSpec& g, const NeighborhoodChain& chain) {
  const double zero = std::max(chain.widths[3], 2.5 * g.spacing);
  const double one = std::max(chain.widths[2], zero + 2.0 * g.spacing);
  return make_cutoff(g, {CutoffRegion::deep, one}, {CutoffRegion::shell, zero});
}

IntegralEvidence evaluate_integral_identity(const CoefficientSet& c1, const CoefficientSet& c2, const CgoSolution& u1,
                                            const CgoSolution& u2, const NeighborhoodChain& chain, const Cutoff& chi,
                                            const IdentityOptions& opt) {
  const GridSpec& g = c1.grid();
  const CoefficientSet diff = difference(c1, c2);
  require(u1.role == CgoRole::adjoint_side && u2.role == CgoRole::direct_side, ErrorCode::invalid_argument,
          "integral identity needs an adjoint-side u1 and a direct-side u2");
  require(chi.values.size() == g.padded_size(), ErrorCode::invalid_argument, "cutoff does not match the grid");
  if (u1.periodic_residual > opt.cgo_residual_cap || u2.periodic_residual > opt.cgo_residual_cap)
    fail(ErrorCode::precondition, "CGO residual above threshold; refusing to evaluate the identity");
  // P u lives where chi ramps; the coefficient difference must vanish there
  for (std::size_t k = 0; k < g.padded_size(); ++k) {
    if (chi.values[k] == 1.0) continue;
    double m = std::abs(diff.q.v[k]);
    for (const auto& a : diff.A.c) m = std::max(m, std::abs(a.v[k]));
    if (m > 0.0) fail(ErrorCode::precondition, "coefficients differ where the cutoff is not one");
  }
  for (std::size_t k = 0; k < g.padded_size(); ++k) {
    const bool near = g.dist(k) < 2.5 * g.spacing || (chain.masks[3].size() == g.padded_size() && chain.masks[3][k]);
    if (near && chi.values[k] != 0.0)
      fail(ErrorCode::precondition, "cutoff must vanish on omega_3 and on the two node layers next to the boundary");
  }

  ScalarField U1 = cgo_field(u1, g), U2 = cgo_field(u2, g);
  const ScalarField ring1 = cgo_ring_laplacian(u1, g), ring2 = cgo_ring_laplacian(u2, g);

  IntegralEvidence ev;
  if (opt.project_cgo) {
    const NavierSolution p1 = solve_navier({adjoint_coefficients(c1), ScalarField(g), U1, ring1}, opt.solver);
    const NavierSolution p2 = solve_navier({c2, ScalarField(g), U2, ring2}, opt.solver);
    ev.projection_change1 = l2_norm(p1.u - U1) / l2_norm(U1);
    ev.projection_change2 = l2_norm(p2.u - U2) / l2_norm(U2);
    U1 = p1.u;
    U2 = p2.u;
  }
  ev.lhs = inner(apply_first_order(diff, U2), U1);

  NavierProblem prob{c1, ScalarField(g), U2, ring2};
  const NavierSolution v = solve_navier(prob, opt.solver);
  ev.solve = v.report;
  ScalarField u = v.u - U2;
  zero_ring(u);
  ScalarField chiu(g);
  for (std::size_t k = 0; k < g.padded_size(); ++k) chiu.v[k] = chi.values[k] * u.v[k];
  const ScalarField zero(g);
  const ScalarField Lchiu = apply_L(c1, chiu, zero);
  const ScalarField Lu = apply_L(c1, u, zero);
  ScalarField Pu(g);
  for (std::size_t k : g.interior()) Pu.v[k] = Lchiu.v[k] - chi.values[k] * Lu.v[k];
  ev.commutator_term = inner(Pu, U1);
  const double scale = std::abs(ev.lhs);
  ev.relative_residual = scale > 0.0 ? std::abs(ev.lhs + ev.commutator_term) / scale : std::abs(ev.commutator_term);

  ev.u1_l2 = l2_norm(U1);
  const double u0 = l2_norm(U2), g1 = l2_norm(gradient(U2));
  const ScalarField lap = laplacian_with_ring(U2, ring2);
  const double l0 = l2_norm(lap), l1 = l2_norm(gradient(lap)), l2 = l2_norm(laplacian(lap));
  ev.u2_h1 = std::sqrt(u0 * u0 + g1 * g1);
  ev.u2_h4 = std::sqrt(u0 * u0 + g1 * g1 + l0 * l0 + l1 * l1 + l2 * l2);
  ev.lap_u2_h2 = std::sqrt(l0 * l0 + l1 * l1 + l2 * l2);
  if (opt.delta >= 0.0) ev.dtn_bound = integral_estimate_bound(ev, opt.delta, opt.alpha1, opt.alpha2, opt.h);
  return ev;
}

double integral_estimate_bound(const IntegralEvidence& ev, double delta, double alpha1, double alpha2, double h) {
  require(h > 0.0, ErrorCode::invalid_argument, "h must be positive");
  require(delta >= 0.0 && alpha1 >= 0.0 && alpha2 >= 0.0, ErrorCode::invalid_argument,
          "delta and alphas must be nonnegative");
  const double decay = std::exp(-alpha1 / (3.0 * h)) * ev.u2_h1;
  const double growth = std::exp(alpha2 / (3.0 * h)) * std::pow(ev.u2_h1, 2.0 / 3.0) * std::cbrt(delta) *
                        (std::cbrt(ev.u2_h4) + std::cbrt(ev.lap_u2_h2));
  return ev.u1_l2 * (decay + growth);
}

DAHat extract_dA_hat(const CoefficientSet& c1, const CoefficientSet& c2, const std::vector<double>& xi, double h,
                     double lambda, const ExtractOptions& opt) {
  const GridSpec& g = c1.grid();
  const int n = g.n;
  require(static_cast<int>(xi.size()) == n, ErrorCode::invalid_argument, "xi has the wrong dimension");
  check_tau(xi, h, lambda);
  const CoefficientSet diff = difference(c1, c2);

  DAHat out;
  out.xi = xi;
  out.tau = lambda * h;
  out.pairs = two_form_pairs(n);
  out.values.assign(out.pairs.size(), 0.0);
  out.budgets.assign(out.pairs.size(), ErrorBudget{});
  const double xn = vnorm(xi);
  if (xn == 0.0) {
    out.degenerate = true;
    return out;
  }
  std::vector<double> xhat = xi;
  for (double& v : xhat) v /= xn;

  for (std::size_t p = 0; p < out.pairs.size(); ++p) {
    const auto [j, k] = out.pairs[p];
    std::vector<double> mu = mu_jk(xi, j, k);
    const double mn = vnorm(mu);
    if (mn == 0.0) continue;
    for (double& v : mu) v /= mn;
    const auto mu2 = complete_basis({xhat, mu}, n, 1).at(0);
    const auto res = run_combos(c1, c2, diff, xi, mu, mu2, out.tau, opt);
    const double c = std::sqrt(1.0 - out.tau * out.tau * xn * xn / 4.0);
    cd E = 0.0;
    ErrorBudget b;
    for (int i = 0; i < 4; ++i) {
      E += kSigns[i][0] * res[i].tau_lhs;
      b.remainder += res[i].zeta2_norm * res[i].ra + out.tau * res[i].rq;
      b.tau += out.tau * res[i].ta;
      b.quadrature += std::abs(res[i].tau_lhs - res[i].tau_lhs_coarse) / 3.0;
      out.max_periodic_residual = std::max(out.max_periodic_residual, res[i].periodic_residual);
    }
    E /= 4.0;
    const double f = mn / c;
    out.values[p] = I * f * E;
    out.budgets[p] = {b.remainder * f / 4.0, b.tau * f / 4.0, b.quadrature * f / 4.0, 0.0};
  }
  return out;
}

QHat extract_q_hat(const CoefficientSet& c1, const CoefficientSet& c2, const std::vector<double>& xi, double h,
                   double lambda, QMode mode, const ExtractOptions& opt) {
  const GridSpec& g = c1.grid();
  const int n = g.n;
  require(static_cast<int>(xi.size()) == n, ErrorCode::invalid_argument, "xi has the wrong dimension");
  check_tau(xi, h, lambda);
  if (mode == QMode::A_zero && (linf_norm(c1.A) > 0.0 || linf_norm(c2.A) > 0.0))
    fail(ErrorCode::precondition, "A_zero mode needs A1 = A2 = 0");
  const CoefficientSet diff = difference(c1, c2);

  QHat out;
  out.xi = xi;
  out.tau = lambda * h;
  const double xn = vnorm(xi);
  std::vector<std::vector<double>> mus;
  if (xn == 0.0) {
    mus = complete_basis({}, n, 2);
  } else {
    std::vector<double> xhat = xi;
    for (double& v : xhat) v /= xn;
    mus = complete_basis({xhat}, n, 2);
  }
  const auto res = run_combos(c1, c2, diff, xi, mus.at(0), mus.at(1), out.tau, opt);
  for (int i = 0; i < 4; ++i) {
    out.value += res[i].tau_lhs;
    out.budget.remainder += res[i].rq;
    out.budget.quadrature += std::abs(res[i].tau_lhs - res[i].tau_lhs_coarse) / (3.0 * out.tau);
    if (mode == QMode::with_A) out.budget.a_term += opt.class_bound * res[i].du2_l2 * res[i].u1_l2;
    out.max_periodic_residual = std::max(out.max_periodic_residual, res[i].periodic_residual);
  }
  out.value /= 4.0 * out.tau;
  out.budget.remainder /= 4.0;
  out.budget.quadrature /= 4.0;
  out.budget.a_term /= 4.0;
  return out;
}

cd fourier_sample(const ScalarField& f, const std::vector<double>& xi) {
  const GridSpec& g = f.grid;
  require(static_cast<int>(xi.size()) == g.n, ErrorCode::invalid_argument, "xi has the wrong dimension");
  std::vector<int> idx(g.n);
  cd acc = 0.0;
  for (std::size_t k = 0; k < g.padded_size(); ++k) {
    g.unflatten(k, idx.data());
    double ph = 0.0;
    for (int d = 0; d < g.n; ++d) ph += g.coord(idx[d]) * xi[d];
    acc += f.v[k] * std::polar(1.0, -ph);
  }
  return acc * cell_volume(g);
}

std::vector<std::vector<int>> lattice_ball(int n, double radius, int kmax) {
  std::vector<std::vector<int>> out;
  std::vector<int> k(n, -kmax);
  const double r2 = radius * radius * (1.0 + 1e-12);
  while (true) {
    double s = 0.0;
    for (int v : k) s += pi * pi * v * v;
    if (s <= r2) out.push_back(k);
    int d = n - 1;
    while (d >= 0 && k[d] == kmax) k[d--] = -kmax;
    if (d < 0) break;
    ++k[d];
  }
  std::stable_sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
    return norm_sq(a) < norm_sq(b);
  });
  return out;
}

double lowpass_radius(double h, int n) {
  require(h > 0.0, ErrorCode::invalid_argument, "h must be positive");
  return std::pow(h, -1.0 / (n + 2));
}

ScalarField lowpass_invert(const std::vector<std::vector<int>>& k, const std::vector<cd>& values, const GridSpec& g,
                           double h, LowpassInfo* info) {
  if (k.empty()) fail(ErrorCode::invalid_argument, "empty frequency set");
  require(k.size() == values.size(), ErrorCode::invalid_argument, "frequency and value counts differ");
  LowpassInfo li;
  li.rho = lowpass_radius(h, g.n);
  const double nyq = pi / g.spacing;
  li.rho_used = std::min(li.rho, nyq);
  li.clamped = li.rho > nyq;

  const BoxSpec box = make_box(g);
  BoxField B(box);
  for (std::size_t i = 0; i < k.size(); ++i) {
    require(static_cast<int>(k[i].size()) == g.n, ErrorCode::invalid_argument, "frequency has the wrong dimension");
    double r2 = 0.0, shift = 0.0;
    std::size_t bin = 0;
    bool fits = true;
    for (int d = 0; d < g.n; ++d) {
      const int kd = k[i][d];
      r2 += pi * pi * kd * kd;
      shift += pi * kd * box.offset * box.spacing;
      fits = fits && 2 * std::abs(kd) < box.M;
      bin += static_cast<std::size_t>(((kd % box.M) + box.M) % box.M) * box.stride(d);
    }
    if (!fits || r2 > li.rho_used * li.rho_used * (1.0 + 1e-12)) continue;
    B.v[bin] = values[i] * std::polar(1.0, -shift) / cell_volume(g);
    ++li.used;
  }
  if (li.used == 0) fail(ErrorCode::invalid_argument, "empty frequency set inside the low-pass ball");
  fft_backward(B.v, box.n, box.M);
  const double norm = static_cast<double>(box.size());
  for (cd& z : B.v) z /= norm;
  if (info) *info = li;
  return restrict_to_cube(B, g);
}

ScalarField lowpass_invert_q(const FourierSamples& s, const GridSpec& g, LowpassInfo* info) {
  return lowpass_invert(s.k, s.q_hat, g, s.h_used, info);
}

TwoFormField lowpass_invert_dA(const FourierSamples& s, const GridSpec& g, LowpassInfo* info) {
  TwoFormField out(g);
  for (std::size_t p = 0; p < out.c.size(); ++p) {
    std::vector<cd> vals(s.k.size());
    for (std::size_t i = 0; i < s.k.size(); ++i) vals[i] = s.dA_hat.at(i).at(p);
    out.c[p] = lowpass_invert(s.k, vals, g, s.h_used, info);
  }
  return out;
}

DecompositionResult decompose(const VectorField& A) {
  const GridSpec& g = A.grid();
  DecompositionResult r;
  r.phi = solve_poisson_dirichlet(divergence(A));
  r.grad_phi = gradient(r.phi);
  r.A_sol = A - r.grad_phi;
  r.div_residual = l2_norm(divergence(r.A_sol));
  for (std::size_t k : g.ring()) r.boundary_residual = std::max(r.boundary_residual, std::abs(r.phi.v[k]));
  return r;
}

StabilityExponents stability_exponents(int n, double s) {
  StabilityExponents e;
  e.eta = (s - n / 2.0) / 2.0;
  e.eta_tilde = (s - (n / 2.0 + 1.0)) / 2.0;
  e.mu1 = e.eta * e.eta_tilde / (6.0 * (1.0 + s) * (1.0 + s));
  e.mu2 = e.eta * e.eta * e.eta_tilde * e.eta_tilde / (3.0 * (n + 2.0) * (n + 2.0) * std::pow(1.0 + s, 4));
  e.mu_prime = std::min(2.0 / (n + 2.0), e.mu2 / 2.0);
  e.a_zero_rate = 2.0 / (n + 2.0);
  return e;
}

AEstimate assemble_A_estimate(const TwoFormField& dA, double dA_h, const DecompositionResult& dec, double dec_h,
                              int n, double s) {
  if (dA_h != dec_h) fail(ErrorCode::invalid_argument, "dA and decomposition come from runs with different h");
  AEstimate e;
  e.h = dA_h;
  e.dA_linf = linf_norm(dA);
  e.A_sol_bound = linf_norm(dec.A_sol);
  e.grad_phi_bound = linf_norm(dec.grad_phi);
  e.A_bound = linf_norm(dec.A_sol + dec.grad_phi);
  e.triangle_ok = e.A_bound <= (e.A_sol_bound + e.grad_phi_bound) * (1.0 + 1e-12);
  e.sol_to_dA_ratio = e.dA_linf > 0.0 ? e.A_sol_bound / e.dA_linf : 0.0;
  e.exponents = stability_exponents(n, s);
  return e;
}

} // namespace bh
