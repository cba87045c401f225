#include "bh/pde.hpp"

#include <cmath>
#include <numbers>

#include "bh/error.hpp"
#include "bh/fft.hpp"
#include "bh/norms.hpp"

namespace bh {

namespace {
const cd I(0.0, 1.0);
}

CoefficientSet CoefficientSet::zero(const GridSpec& g) {
  CoefficientSet c;
  c.A = VectorField(g);
  c.q = ScalarField(g);
  c.agreement_mask.assign(g.padded_size(), 1);
  return c;
}

AdmissibilityReport check_admissible(const CoefficientSet& c, const CoefficientSet& ref,
                                     const std::vector<std::uint8_t>& omega0, double s, double M) {
  AdmissibilityReport r;
  const GridSpec& g = c.grid();
  VectorField dA = c.A - ref.A;
  r.hs_norm_A = 0.0;
  for (const auto& comp : c.A.c) r.hs_norm_A += std::pow(box_sobolev_norm(embed(comp, make_box(g)), s), 2);
  r.hs_norm_A = std::sqrt(r.hs_norm_A);
  r.linf_q = linf_norm(c.q);
  for (std::size_t k = 0; k < g.padded_size(); ++k) {
    if (!omega0[k]) continue;
    double dev = std::abs(c.q.v[k] - ref.q.v[k]);
    for (int d = 0; d < g.n; ++d) dev = std::max(dev, std::abs(dA.c[d].v[k]));
    r.max_deviation_on_w0 = std::max(r.max_deviation_on_w0, dev);
  }
  r.ok = r.hs_norm_A <= M && r.linf_q <= M && r.max_deviation_on_w0 == 0.0;
  return r;
}

CoefficientSet adjoint_coefficients(const CoefficientSet& c) {
  CoefficientSet a;
  a.A = conj(c.A);
  const ScalarField div = divergence(a.A);
  a.q = conj(c.q);
  for (std::size_t k = 0; k < a.q.v.size(); ++k) a.q.v[k] -= I * div.v[k];
  a.agreement_mask = c.agreement_mask;
  return a;
}

ScalarField apply_first_order(const CoefficientSet& c, const ScalarField& u) {
  const GridSpec& g = u.grid;
  ScalarField out(g);
  const double inv2h = 1.0 / (2.0 * g.spacing);
  for (std::size_t k : g.interior()) {
    cd acc = c.q.v[k] * u.v[k];
    for (int d = 0; d < g.n; ++d) {
      const std::size_t s = g.stride(d);
      acc += c.A.c[d].v[k] * (-I) * (u.v[k + s] - u.v[k - s]) * inv2h;
    }
    out.v[k] = acc;
  }
  return out;
}

ScalarField apply_L(const CoefficientSet& c, const ScalarField& u, const ScalarField& lap_ring) {
  const ScalarField lap = laplacian_with_ring(u, lap_ring);
  ScalarField out = laplacian(lap);
  const ScalarField low = apply_first_order(c, u);
  for (std::size_t k : u.grid.interior()) out.v[k] += low.v[k];
  return out;
}

ScalarField apply_L_adjoint(const CoefficientSet& c, const ScalarField& v, const ScalarField& lap_ring) {
  const GridSpec& g = v.grid;
  const ScalarField lap = laplacian_with_ring(v, lap_ring);
  ScalarField out = laplacian(lap);
  const double inv2h = 1.0 / (2.0 * g.spacing);
  std::vector<ScalarField> Av;
  for (int d = 0; d < g.n; ++d) {
    ScalarField w(g);
    for (std::size_t k = 0; k < g.padded_size(); ++k) w.v[k] = std::conj(c.A.c[d].v[k]) * v.v[k];
    Av.push_back(std::move(w));
  }
  for (std::size_t k : g.interior()) {
    cd acc = std::conj(c.q.v[k]) * v.v[k];
    for (int d = 0; d < g.n; ++d) {
      const std::size_t s = g.stride(d);
      acc += -I * (Av[d].v[k + s] - Av[d].v[k - s]) * inv2h;
    }
    out.v[k] += acc;
  }
  return out;
}

GreenReport greens_identity_residual(const CoefficientSet& c, const ScalarField& u, const ScalarField& lap_u_ring,
                                     const ScalarField& v, const ScalarField& lap_v_ring) {
  if (lap_u_ring.v.empty() || lap_v_ring.v.empty())
    fail(ErrorCode::precondition, "missing boundary traces for Green's identity");
  const GridSpec& g = u.grid;
  const double vol_w = std::pow(g.spacing, g.n);
  GreenReport rep;
  const ScalarField Lu = apply_L(c, u, lap_u_ring);
  const ScalarField Lsv = apply_L_adjoint(c, v, lap_v_ring);
  const ScalarField Lpv = apply_L(adjoint_coefficients(c), v, lap_v_ring);
  cd vol = 0.0, defect = 0.0;
  for (std::size_t k : g.interior()) {
    vol += Lu.v[k] * std::conj(v.v[k]) - u.v[k] * std::conj(Lsv.v[k]);
    defect += u.v[k] * std::conj(Lsv.v[k] - Lpv.v[k]);
  }
  rep.volume = vol * vol_w;
  rep.adjoint_defect = std::abs(defect) * vol_w;

  // summation by parts leaves ring/first-layer products on each face
  const ScalarField Wu = laplacian_with_ring(u, lap_u_ring);
  const ScalarField Wv = laplacian_with_ring(v, lap_v_ring);
  const double ih2 = 1.0 / (g.spacing * g.spacing);
  const double inv2h = 1.0 / (2.0 * g.spacing);
  cd bnd = 0.0;
  for (int axis = 0; axis < g.n; ++axis) {
    const std::size_t s = g.stride(axis);
    for (int side = 0; side < 2; ++side) {
      const double sgn = normal_sign(Face{axis, side});
      for (std::size_t r : face_nodes(g, Face{axis, side})) {
        const std::size_t a = side == 0 ? r + s : r - s;
        bnd += ih2 * (Wu.v[r] * std::conj(v.v[a]) - Wu.v[a] * std::conj(v.v[r]));
        bnd += ih2 * (u.v[r] * std::conj(Wv.v[a]) - u.v[a] * std::conj(Wv.v[r]));
        const cd wr = c.A.c[axis].v[r] * std::conj(v.v[r]);
        const cd wa = c.A.c[axis].v[a] * std::conj(v.v[a]);
        bnd += -I * inv2h * sgn * (wr * u.v[a] + u.v[r] * wa);
      }
    }
  }
  rep.boundary = bnd * vol_w;
  rep.residual = std::abs(rep.volume - rep.boundary);
  return rep;
}

ScalarField solve_poisson_dirichlet(const ScalarField& rhs) {
  const GridSpec& g = rhs.grid;
  const auto& inner = g.interior();
  const std::size_t m = inner.size();
  std::vector<double> lam(g.N);
  for (int k = 0; k < g.N; ++k) {
    const double s = std::sin(std::numbers::pi * (k + 1) / (2.0 * (g.N + 1)));
    lam[k] = 4.0 * s * s / (g.spacing * g.spacing);
  }
  const double norm = std::pow(2.0 * (g.N + 1), g.n);
  ScalarField out(g);
  std::vector<double> re(m), im(m);
  for (std::size_t i = 0; i < m; ++i) {
    re[i] = rhs.v[inner[i]].real();
    im[i] = rhs.v[inner[i]].imag();
  }
  dst_all_axes(re, g.n, g.N);
  dst_all_axes(im, g.n, g.N);
  std::vector<int> idx(g.n, 0);
  for (std::size_t i = 0; i < m; ++i) {
    double l = 0.0;
    for (int d = 0; d < g.n; ++d) l += lam[idx[d]];
    const double f = -1.0 / (l * norm);
    re[i] *= f;
    im[i] *= f;
    for (int d = g.n - 1; d >= 0; --d) {
      if (++idx[d] < g.N) break;
      idx[d] = 0;
    }
  }
  dst_all_axes(re, g.n, g.N);
  dst_all_axes(im, g.n, g.N);
  for (std::size_t i = 0; i < m; ++i) out.v[inner[i]] = cd(re[i], im[i]);
  return out;
}

} // namespace bh
