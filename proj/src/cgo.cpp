#include "bh/cgo.hpp"

#include <cmath>
#include <numbers>
#include <numeric>
#include <sstream>

#include "bh/error.hpp"
#include "bh/norms.hpp"

namespace bh {

namespace {

const cd I(0.0, 1.0);

double dot(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

// Walks every box node keeping the multi-index and physical coordinates.
struct BoxWalker {
  const BoxSpec& box;
  std::vector<int> j;
  std::vector<double> x;
  explicit BoxWalker(const BoxSpec& b) : box(b), j(b.n, 0), x(b.n) { sync(); }
  void sync() {
    for (int d = 0; d < box.n; ++d) x[d] = (j[d] - box.offset) * box.spacing;
  }
  void next() {
    for (int d = box.n - 1; d >= 0; --d) {
      if (++j[d] < box.M) break;
      j[d] = 0;
    }
    sync();
  }
};

double amplitude_at(const CgoDirections& d, AmplitudeKind kind, const double* x) {
  if (kind == AmplitudeKind::one) return 1.0;
  double s = 0.0;
  for (std::size_t i = 0; i < d.mu1.size(); ++i) s += d.mu1[i] * x[i];
  return s;
}

double amplitude_grad(const CgoDirections& d, AmplitudeKind kind, int axis) {
  return kind == AmplitudeKind::one ? 0.0 : d.mu1[axis];
}

double norm2(const std::vector<cd>& v) {
  double s = 0.0;
  for (const auto& z : v) s += std::norm(z);
  return std::sqrt(s);
}

// Per-axis shifted angular lattice pi (k + shift).
std::vector<std::vector<double>> shifted_kappa(const BoxSpec& box, const std::vector<double>& shift) {
  std::vector<std::vector<double>> k(box.n, std::vector<double>(box.M));
  for (int d = 0; d < box.n; ++d) {
    const double s = shift.empty() ? 0.0 : shift[d];
    for (int j = 0; j < box.M; ++j) k[d][j] = box.kappa(box.signed_index(j) + s);
  }
  return k;
}

std::vector<cd> symbol(const BoxSpec& box, const std::vector<std::vector<double>>& kap, const std::vector<cd>& zeta,
                       double tau) {
  std::vector<cd> p(box.size());
  std::vector<int> idx(box.n, 0);
  for (std::size_t m = 0; m < p.size(); ++m) {
    double k2 = 0.0;
    cd zk = 0.0;
    for (int d = 0; d < box.n; ++d) {
      const double kd = kap[d][idx[d]];
      k2 += kd * kd;
      zk += zeta[d] * kd;
    }
    const cd b = -tau * tau * k2 - 2.0 * tau * zk;
    p[m] = b * b;
    for (int d = box.n - 1; d >= 0; --d) {
      if (++idx[d] < box.M) break;
      idx[d] = 0;
    }
  }
  return p;
}

std::size_t regularize(std::vector<cd>& p, double eps) {
  std::size_t clamped = 0;
  for (auto& z : p) {
    const double a = std::abs(z);
    if (a < eps) {
      z = a > 0.0 ? eps * z / a : cd(eps);
      ++clamped;
    }
  }
  return clamped;
}

} // namespace

cd bilinear(const std::vector<cd>& a, const std::vector<cd>& b) {
  cd s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

CgoDirections make_directions(const std::vector<double>& xi, const std::vector<double>& mu1,
                              const std::vector<double>& mu2, double tau) {
  const std::size_t n = xi.size();
  if (n < 3 || mu1.size() != n || mu2.size() != n) fail(ErrorCode::invalid_argument, "direction vectors must share a dimension >= 3");
  const double xn = std::sqrt(dot(xi, xi));
  const double tol = 1e-12;
  if (std::abs(dot(mu1, mu1) - 1.0) > tol || std::abs(dot(mu2, mu2) - 1.0) > tol)
    fail(ErrorCode::invalid_argument, "mu1 and mu2 must be unit vectors");
  if (std::abs(dot(mu1, mu2)) > tol || std::abs(dot(mu1, xi)) > tol * std::max(1.0, xn) ||
      std::abs(dot(mu2, xi)) > tol * std::max(1.0, xn))
    fail(ErrorCode::invalid_argument, "mu1, mu2 and xi must be mutually orthogonal");
  if (!(tau > 0.0)) fail(ErrorCode::invalid_argument, "tau must be positive");
  const double disc = 1.0 - tau * tau * xn * xn / 4.0;
  if (disc < -1e-14) fail(ErrorCode::precondition, "tau too large: 1 - tau^2 |xi|^2 / 4 < 0");
  CgoDirections d;
  d.xi = xi;
  d.mu1 = mu1;
  d.mu2 = mu2;
  d.tau = tau;
  d.c = std::sqrt(std::max(disc, 0.0));
  d.zeta1.resize(n);
  d.zeta2.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    d.zeta1[i] = cd(tau * xi[i] / 2.0 + d.c * mu1[i], mu2[i]);
    d.zeta2[i] = cd(-tau * xi[i] / 2.0 + d.c * mu1[i], -mu2[i]);
  }
  if (std::abs(bilinear(d.zeta1, d.zeta1)) > 1e-13 || std::abs(bilinear(d.zeta2, d.zeta2)) > 1e-13)
    fail(ErrorCode::internal, "zeta . zeta != 0");
  for (std::size_t i = 0; i < n; ++i)
    if (std::abs((d.zeta2[i] - std::conj(d.zeta1[i])) / tau + xi[i]) > 1e-12 * std::max(1.0, xn))
      fail(ErrorCode::internal, "(zeta2 - conj zeta1)/tau != -xi");
  return d;
}

ScalarField make_amplitude(const GridSpec& g, const CgoDirections& d, AmplitudeKind kind) {
  if (static_cast<int>(d.mu1.size()) != g.n) fail(ErrorCode::invalid_argument, "directions do not match the grid dimension");
  return sample(g, [&](const double* x) { return cd(amplitude_at(d, kind, x)); });
}

BoxField faddeev_apply_inverse(const std::vector<cd>& zeta, double tau, const BoxField& rhs, const FaddeevOptions& opt,
                               std::size_t* clamped) {
  const BoxSpec& box = rhs.box;
  if (static_cast<int>(zeta.size()) != box.n) fail(ErrorCode::invalid_argument, "zeta does not match the box dimension");
  std::vector<cd> p = symbol(box, shifted_kappa(box, opt.shift), zeta, tau);
  const std::size_t nc = regularize(p, opt.eps_reg_factor * tau * tau * tau);
  if (nc == p.size()) fail(ErrorCode::precondition, "symbol floor dominates: every mode is clamped");
  if (clamped) *clamped = nc;
  BoxField out = rhs;
  fft_forward(out.v, box.n, box.M);
  const double inv = 1.0 / static_cast<double>(box.size());
  for (std::size_t m = 0; m < p.size(); ++m) out.v[m] *= inv / p[m];
  fft_backward(out.v, box.n, box.M);
  return out;
}

std::vector<double> bloch_shift_for(const std::vector<double>& mu2) {
  const int n = static_cast<int>(mu2.size());
  int big = 0;
  for (int i = 1; i < n; ++i)
    if (std::abs(mu2[i]) > std::abs(mu2[big])) big = i;
  if (mu2[big] == 0.0) return {};
  for (int den = 1; den <= 16; ++den) {
    std::vector<long> m(n);
    bool ok = true;
    for (int i = 0; i < n && ok; ++i) {
      const double v = den * mu2[i] / mu2[big];
      m[i] = std::lround(v);
      ok = std::abs(v - m[i]) < 1e-9;
    }
    if (!ok) continue;
    long gcd = 0;
    for (long v : m) gcd = std::gcd(gcd, std::abs(v));
    for (int i = 0; i < n; ++i)
      if ((m[i] / gcd) % 2 != 0) {
        std::vector<double> s(n, 0.0);
        s[i] = 0.5;
        return s;
      }
  }
  return {};
}

namespace {

struct CgoWork {
  const BoxSpec& box;
  const CgoDirections& dirs;
  const std::vector<cd>& zeta;
  AmplitudeKind kind;
  std::vector<BoxField> A;
  BoxField q;
  std::vector<std::vector<double>> kap;
  std::vector<double> beta;
  std::vector<cd> phase; // exp(i beta.x)
  std::vector<double> amp;

  CgoWork(const BoxSpec& b, const CgoDirections& d, const std::vector<cd>& z, AmplitudeKind k)
      : box(b), dirs(d), zeta(z), kind(k) {}

  // grad r on the box from the Fourier coefficients of w
  std::vector<std::vector<cd>> grad_r(const std::vector<cd>& what) const {
    std::vector<std::vector<cd>> out(box.n);
    const double inv = 1.0 / static_cast<double>(box.size());
    for (int d = 0; d < box.n; ++d) {
      std::vector<cd> t(what.size());
      std::vector<int> idx(box.n, 0);
      for (std::size_t m = 0; m < t.size(); ++m) {
        t[m] = I * kap[d][idx[d]] * what[m] * inv;
        for (int e = box.n - 1; e >= 0; --e) {
          if (++idx[e] < box.M) break;
          idx[e] = 0;
        }
      }
      fft_backward(t, box.n, box.M);
      for (std::size_t m = 0; m < t.size(); ++m) t[m] *= phase[m];
      out[d] = std::move(t);
    }
    return out;
  }

  // Fourier coefficients of exp(-i beta.x) tau^4 (A.(D + zeta/tau) + q)(a + r)
  std::vector<cd> source_hat(const std::vector<cd>& w, const std::vector<cd>& what) const {
    const double tau = dirs.tau;
    const double t4 = tau * tau * tau * tau;
    const auto gr = grad_r(what);
    std::vector<cd> f(box.size());
    BoxWalker it(box);
    for (std::size_t m = 0; m < f.size(); ++m, it.next()) {
      const cd phi = amp[m] + phase[m] * w[m];
      cd acc = q.v[m] * phi;
      for (int d = 0; d < box.n; ++d) {
        const cd a = A[d].v[m];
        if (a == 0.0) continue;
        const cd dphi = -I * (amplitude_grad(dirs, kind, d) + gr[d][m]);
        acc += a * (dphi + zeta[d] / tau * phi);
      }
      f[m] = t4 * acc * std::conj(phase[m]);
    }
    fft_forward(f, box.n, box.M);
    return f;
  }
};

} // namespace

CgoSolution build_cgo(const CoefficientSet& c, const CgoDirections& d, AmplitudeKind kind, CgoRole role,
                      const CgoOptions& opt) {
  const GridSpec& g = c.grid();
  if (static_cast<int>(d.mu1.size()) != g.n) fail(ErrorCode::invalid_argument, "directions do not match the grid dimension");
  const BoxSpec box = make_box(g);
  CgoSolution s;
  s.directions = d;
  s.kind = kind;
  s.role = role;
  s.zeta = role == CgoRole::adjoint_side ? d.zeta1 : d.zeta2;

  const CoefficientSet cc = role == CgoRole::adjoint_side ? adjoint_coefficients(c) : c;
  CgoWork wk(box, d, s.zeta, kind);
  for (int k = 0; k < g.n; ++k) wk.A.push_back(embed(cc.A.c[k], box));
  wk.q = embed(cc.q, box);

  std::vector<double> shift = opt.bloch_shift ? bloch_shift_for(d.mu2) : std::vector<double>{};
  s.beta.assign(g.n, 0.0);
  for (int k = 0; k < g.n && !shift.empty(); ++k) s.beta[k] = box.kappa(shift[k]);
  wk.kap = shifted_kappa(box, shift);
  wk.beta = s.beta;
  wk.phase.resize(box.size());
  wk.amp.resize(box.size());
  {
    BoxWalker it(box);
    for (std::size_t m = 0; m < box.size(); ++m, it.next()) {
      double ph = 0.0;
      for (int k = 0; k < g.n; ++k) ph += s.beta[k] * it.x[k];
      wk.phase[m] = std::polar(1.0, ph);
      wk.amp[m] = amplitude_at(d, kind, it.x.data());
    }
  }

  std::vector<cd> p = symbol(box, wk.kap, s.zeta, d.tau);
  s.clamped_modes = regularize(p, opt.eps_reg_factor * d.tau * d.tau * d.tau);
  if (s.clamped_modes == p.size()) fail(ErrorCode::precondition, "symbol floor dominates: every mode is clamped");

  const double inv = 1.0 / static_cast<double>(box.size());
  std::vector<cd> w(box.size(), 0.0), what(box.size(), 0.0);
  int rising = 0;
  double last_abs = 0.0;
  for (int it = 0; it < opt.neumann_max_iter; ++it) {
    std::vector<cd> next_hat = wk.source_hat(w, what);
    for (std::size_t m = 0; m < p.size(); ++m) next_hat[m] = -next_hat[m] / p[m];
    std::vector<cd> next = next_hat;
    fft_backward(next, box.n, box.M);
    for (auto& z : next) z *= inv;
    double diff = 0.0;
    for (std::size_t m = 0; m < next.size(); ++m) diff += std::norm(next[m] - w[m]);
    const double nn = norm2(next);
    const double upd = nn > 0.0 ? std::sqrt(diff) / nn : 0.0;
    w = std::move(next);
    what = std::move(next_hat);
    s.iterations = it + 1;
    s.update_norm = upd;
    // divergence is judged on the absolute update, which grows geometrically
    if (it > 0 && std::sqrt(diff) > last_abs) {
      if (++rising >= 3) fail(ErrorCode::divergent, "Neumann series divergent; decrease tau or coefficient magnitude");
    } else {
      rising = 0;
    }
    last_abs = std::sqrt(diff);
    s.update_history.push_back(upd);
    if (upd <= opt.neumann_tol) break;
  }

  // residual of p w + source(w) = 0 at the final iterate
  const std::vector<cd> src = wk.source_hat(w, what);
  double rn = 0.0, sn = 0.0;
  for (std::size_t m = 0; m < p.size(); ++m) {
    rn += std::norm(p[m] * what[m] + src[m]);
    sn += std::norm(src[m]);
  }
  s.periodic_residual = sn > 0.0 ? std::sqrt(rn / sn) : 0.0;
  s.w = BoxField(box);
  s.w.v = std::move(w);
  return s;
}

namespace {

std::size_t cube_to_box(const GridSpec& g, const BoxSpec& box, std::size_t k, std::vector<int>& idx) {
  g.unflatten(k, idx.data());
  std::size_t m = 0;
  for (int d = 0; d < g.n; ++d) m = m * box.M + static_cast<std::size_t>(idx[d] + box.offset);
  return m;
}

std::vector<std::vector<cd>> box_grad_r(const CgoSolution& s) {
  const BoxSpec& box = s.w.box;
  CgoWork wk(box, s.directions, s.zeta, s.kind);
  std::vector<double> shift(box.n, 0.0);
  for (int d = 0; d < box.n; ++d) shift[d] = s.beta[d] * box.side / (2.0 * std::numbers::pi);
  wk.kap = shifted_kappa(box, shift);
  wk.phase.resize(box.size());
  BoxWalker it(box);
  for (std::size_t m = 0; m < box.size(); ++m, it.next()) {
    double ph = 0.0;
    for (int d = 0; d < box.n; ++d) ph += s.beta[d] * it.x[d];
    wk.phase[m] = std::polar(1.0, ph);
  }
  std::vector<cd> what = s.w.v;
  fft_forward(what, box.n, box.M);
  return wk.grad_r(what);
}

cd phase_at(const std::vector<double>& beta, const double* x, int n) {
  double ph = 0.0;
  for (int d = 0; d < n; ++d) ph += beta[d] * x[d];
  return std::polar(1.0, ph);
}

cd exp_factor(const std::vector<cd>& zeta, double tau, const double* x, int n) {
  cd e = 0.0;
  for (int d = 0; d < n; ++d) e += zeta[d] * x[d];
  return std::exp(I * e / tau);
}

} // namespace

ScalarField cgo_remainder(const CgoSolution& s, const GridSpec& g) {
  const BoxSpec& box = s.w.box;
  ScalarField r(g);
  std::vector<int> idx(g.n);
  std::vector<double> x(g.n);
  for (std::size_t k = 0; k < g.padded_size(); ++k) {
    const std::size_t m = cube_to_box(g, box, k, idx);
    for (int d = 0; d < g.n; ++d) x[d] = g.coord(idx[d]);
    r.v[k] = phase_at(s.beta, x.data(), g.n) * s.w.v[m];
  }
  return r;
}

ScalarField cgo_factor(const CgoSolution& s, const GridSpec& g) {
  ScalarField f = cgo_remainder(s, g);
  std::vector<int> idx(g.n);
  std::vector<double> x(g.n);
  for (std::size_t k = 0; k < g.padded_size(); ++k) {
    g.unflatten(k, idx.data());
    for (int d = 0; d < g.n; ++d) x[d] = g.coord(idx[d]);
    f.v[k] += amplitude_at(s.directions, s.kind, x.data());
  }
  return f;
}

VectorField cgo_factor_gradient(const CgoSolution& s, const GridSpec& g) {
  const BoxSpec& box = s.w.box;
  const auto gr = box_grad_r(s);
  VectorField out(g);
  std::vector<int> idx(g.n);
  for (std::size_t k = 0; k < g.padded_size(); ++k) {
    const std::size_t m = cube_to_box(g, box, k, idx);
    for (int d = 0; d < g.n; ++d) out.c[d].v[k] = gr[d][m] + amplitude_grad(s.directions, s.kind, d);
  }
  return out;
}

ScalarField cgo_field(const CgoSolution& s, const GridSpec& g) {
  ScalarField u = cgo_factor(s, g);
  std::vector<int> idx(g.n);
  std::vector<double> x(g.n);
  for (std::size_t k = 0; k < g.padded_size(); ++k) {
    g.unflatten(k, idx.data());
    for (int d = 0; d < g.n; ++d) x[d] = g.coord(idx[d]);
    u.v[k] *= exp_factor(s.zeta, s.directions.tau, x.data(), g.n);
  }
  return u;
}

ScalarField cgo_ring_laplacian(const CgoSolution& s, const GridSpec& g) {
  const BoxSpec& box = s.w.box;
  if (box.offset < 1) fail(ErrorCode::internal, "box has no layer outside the cube");
  auto u_at = [&](const std::vector<int>& bj) {
    std::size_t m = 0;
    std::vector<double> x(g.n);
    for (int d = 0; d < g.n; ++d) {
      m = m * box.M + static_cast<std::size_t>(bj[d]);
      x[d] = (bj[d] - box.offset) * box.spacing;
    }
    const cd f = amplitude_at(s.directions, s.kind, x.data()) + phase_at(s.beta, x.data(), g.n) * s.w.v[m];
    return f * exp_factor(s.zeta, s.directions.tau, x.data(), g.n);
  };
  ScalarField lap(g);
  std::vector<int> idx(g.n), bj(g.n);
  const double ih2 = 1.0 / (g.spacing * g.spacing);
  for (std::size_t k : g.ring()) {
    g.unflatten(k, idx.data());
    for (int d = 0; d < g.n; ++d) bj[d] = idx[d] + box.offset;
    const cd c0 = u_at(bj);
    cd acc = -2.0 * g.n * c0;
    for (int d = 0; d < g.n; ++d) {
      bj[d] += 1;
      acc += u_at(bj);
      bj[d] -= 2;
      acc += u_at(bj);
      bj[d] += 1;
    }
    lap.v[k] = acc * ih2;
  }
  return lap;
}

double remainder_h1_scl(const CgoSolution& s, const GridSpec& g) {
  const ScalarField r = cgo_remainder(s, g);
  const BoxSpec& box = s.w.box;
  const auto gr = box_grad_r(s);
  const double tau = s.directions.tau;
  double acc = 0.0;
  std::vector<int> idx(g.n);
  for (std::size_t k : g.interior()) {
    const std::size_t m = cube_to_box(g, box, k, idx);
    acc += std::norm(r.v[k]);
    for (int d = 0; d < g.n; ++d) acc += tau * tau * std::norm(gr[d][m]);
  }
  return std::sqrt(acc * std::pow(g.spacing, g.n));
}

double stencil_residual(const CgoSolution& s, const CoefficientSet& c, const GridSpec& g) {
  const ScalarField u = cgo_field(s, g);
  ScalarField ring = cgo_ring_laplacian(s, g);
  const ScalarField Lu = s.role == CgoRole::adjoint_side ? apply_L_adjoint(c, u, ring) : apply_L(c, u, ring);
  const double un = l2_norm(u);
  return un > 0.0 ? l2_norm(Lu) / un : 0.0;
}

std::string describe(const CgoDirections& d) {
  std::ostringstream o;
  o.precision(17);
  auto vec = [&](const char* name, const std::vector<double>& v) {
    o << "  " << name << ": [";
    for (std::size_t i = 0; i < v.size(); ++i) o << (i ? ", " : "") << v[i];
    o << "]\n";
  };
  auto cvec = [&](const char* name, const std::vector<cd>& v) {
    o << "  " << name << ": [";
    for (std::size_t i = 0; i < v.size(); ++i) o << (i ? ", " : "") << v[i].real() << (v[i].imag() < 0 ? "-" : "+") << std::abs(v[i].imag()) << "i";
    o << "]\n";
  };
  o << "directions {\n";
  vec("xi", d.xi);
  vec("mu1", d.mu1);
  vec("mu2", d.mu2);
  o << "  tau: " << d.tau << "\n";
  cvec("zeta1", d.zeta1);
  cvec("zeta2", d.zeta2);
  o << "}\n";
  return o.str();
}

} // namespace bh
