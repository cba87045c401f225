#pragma once

#include <cmath>
#include <complex>
#include <vector>

namespace bh {

struct KrylovResult {
  int iterations = 0;
  double residual = 0.0; // relative, recomputed from the true residual
  bool converged = false;
  bool stagnated = false;
};

namespace krylov_detail {

inline std::complex<double> dot(const std::vector<std::complex<double>>& a, const std::vector<std::complex<double>>& b) {
  std::complex<double> s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += std::conj(a[i]) * b[i];
  return s;
}

inline double nrm(const std::vector<std::complex<double>>& a) { return std::sqrt(std::abs(dot(a, a))); }

} // namespace krylov_detail

// Right-preconditioned BiCGStab for complex non-symmetric systems.
// op(x, y) sets y = A x; prec(x, y) sets y = M^{-1} x.
template <class Op, class Prec>
KrylovResult bicgstab(const Op& op, const Prec& prec, const std::vector<std::complex<double>>& b,
                      std::vector<std::complex<double>>& x, double tol, int max_iter, int stall_window = 60) {
  using cvec = std::vector<std::complex<double>>;
  using krylov_detail::dot;
  using krylov_detail::nrm;
  KrylovResult res;
  const std::size_t n = b.size();
  const double bn = nrm(b);
  if (x.size() != n) x.assign(n, 0.0);
  if (bn == 0.0) {
    std::fill(x.begin(), x.end(), 0.0);
    res.converged = true;
    return res;
  }
  cvec r(n), rhat(n), p(n, 0.0), v(n, 0.0), s(n), t(n), ph(n), sh(n), tmp(n);
  op(x, tmp);
  for (std::size_t i = 0; i < n; ++i) r[i] = b[i] - tmp[i];
  rhat = r;
  std::complex<double> rho = 1.0, alpha = 1.0, omega = 1.0;
  double best = nrm(r) / bn;
  int best_it = 0;
  res.residual = best;
  if (best <= tol) {
    res.converged = true;
    return res;
  }
  for (int it = 1; it <= max_iter; ++it) {
    const std::complex<double> rho_new = dot(rhat, r);
    if (std::abs(rho_new) < 1e-300) {
      rhat = r; // breakdown: restart the shadow residual
      rho = 1.0; alpha = 1.0; omega = 1.0;
      std::fill(p.begin(), p.end(), 0.0);
      std::fill(v.begin(), v.end(), 0.0);
      continue;
    }
    const std::complex<double> beta = (rho_new / rho) * (alpha / omega);
    for (std::size_t i = 0; i < n; ++i) p[i] = r[i] + beta * (p[i] - omega * v[i]);
    prec(p, ph);
    op(ph, v);
    alpha = rho_new / dot(rhat, v);
    for (std::size_t i = 0; i < n; ++i) s[i] = r[i] - alpha * v[i];
    prec(s, sh);
    op(sh, t);
    const double tt = std::real(dot(t, t));
    omega = tt > 0.0 ? dot(t, s) / tt : 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      x[i] += alpha * ph[i] + omega * sh[i];
      r[i] = s[i] - omega * t[i];
    }
    rho = rho_new;
    res.iterations = it;
    const double rel = nrm(r) / bn;
    if (rel < 0.9 * best) {
      best = rel;
      best_it = it;
    }
    if (rel <= tol) break;
    if (it - best_it > stall_window) {
      res.stagnated = true;
      break;
    }
    if (omega == 0.0) break;
  }
  op(x, tmp);
  for (std::size_t i = 0; i < n; ++i) r[i] = b[i] - tmp[i];
  res.residual = nrm(r) / bn;
  res.converged = res.residual <= tol;
  return res;
}

} // namespace bh
