#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <numbers>
#include <random>

#include "bh/error.hpp"
#include "bh/field.hpp"
#include "bh/norms.hpp"
#include "bh/pde.hpp"

using namespace bh;

namespace {

constexpr double pi = std::numbers::pi;
const cd I(0.0, 1.0);

CoefficientSet smooth_coeffs(const GridSpec& g) {
  CoefficientSet c = CoefficientSet::zero(g);
  c.A.c[0] = sample(g, [](const double* x) { return cd(0.3, 0.2 * std::sin(2 * x[1])); });
  c.A.c[1] = sample(g, [](const double* x) { return cd(0.1 * std::cos(x[0]), 0.0); });
  c.A.c[2] = sample(g, [](const double* x) { return cd(0.2 * x[2], 0.1 * x[0]); });
  c.q = sample(g, [](const double* x) { return cd(1.0, 0.5 * x[0]); });
  return c;
}

double max_diff(const ScalarField& a, const ScalarField& b) {
  double m = 0.0;
  for (std::size_t k : a.grid.interior()) m = std::max(m, std::abs(a.v[k] - b.v[k]));
  return m;
}

struct Poly {
  std::function<cd(const double*)> u, lap;
  std::function<void(const double*, cd*)> grad;
};

// F = A.Du + q u for biharmonic polynomials (Delta^2 u = 0)
ScalarField poly_rhs(const GridSpec& g, const CoefficientSet& c, const Poly& p) {
  ScalarField F(g);
  std::vector<double> x(g.n);
  std::vector<int> idx(g.n);
  for (std::size_t k : g.interior()) {
    g.unflatten(k, idx.data());
    for (int d = 0; d < g.n; ++d) x[d] = g.coord(idx[d]);
    cd gr[8];
    p.grad(x.data(), gr);
    cd acc = c.q.v[k] * p.u(x.data());
    for (int d = 0; d < g.n; ++d) acc += c.A.c[d].v[k] * (-I) * gr[d];
    F.v[k] = acc;
  }
  return F;
}

void check_poly_exact(const Poly& p, const CoefficientSet& c) {
  const GridSpec& g = c.grid();
  NavierProblem prob{c, poly_rhs(g, c, p), sample(g, p.u), sample(g, p.lap)};
  const NavierSolution s = solve_navier(prob);
  CHECK(s.report.condition_flag == ConditionFlag::ok);
  CHECK(max_diff(s.u, sample(g, p.u)) < 1e-8);
}

} // namespace

TEST_CASE("discrete bilaplacian of x1^4") {
  const GridSpec g = build_grid(3, 12);
  const double h = g.spacing;
  const ScalarField u = sample(g, [](const double* x) { return cd(std::pow(x[0], 4)); });
  const ScalarField ring = sample(g, [h](const double* x) { return cd(12 * x[0] * x[0] + 2 * h * h); });
  const ScalarField Lu = apply_L(CoefficientSet::zero(g), u, ring);
  for (std::size_t k : g.interior()) CHECK(std::abs(Lu.v[k] - cd(24.0)) < 1e-6);
}

TEST_CASE("first-order term on a linear function") {
  const GridSpec g = build_grid(3, 10);
  CoefficientSet c = CoefficientSet::zero(g);
  c.A.c[0] = sample(g, [](const double*) { return cd(1.0); });
  const ScalarField u = sample(g, [](const double* x) { return cd(x[0]); });
  const ScalarField out = apply_first_order(c, u);
  for (std::size_t k : g.interior()) CHECK(std::abs(out.v[k] - (-I)) < 1e-12);
}

TEST_CASE("adjoint coefficients") {
  const GridSpec g = build_grid(3, 10);
  CoefficientSet c = CoefficientSet::zero(g);
  c.A.c[1] = sample(g, [](const double* x) { return cd(x[1], 2 * x[1]); });
  c.q = sample(g, [](const double*) { return cd(0.5, 1.0); });
  const CoefficientSet a = adjoint_coefficients(c);
  for (std::size_t k : g.interior()) {
    CHECK(std::abs(a.A.c[1].v[k] - std::conj(c.A.c[1].v[k])) < 1e-15);
    // conj q - i div conj A = (0.5 - i) - i (1 - 2i)
    CHECK(std::abs(a.q.v[k] - (cd(0.5, -1.0) - I * cd(1.0, -2.0))) < 1e-10);
  }
}

TEST_CASE("Green identity is exact for vanishing traces") {
  const GridSpec g = build_grid(3, 31);
  const ScalarField u = sample(g, [](const double* x) {
    return cd(std::sin(pi * x[0]) * std::sin(pi * x[1]) * std::sin(pi * x[2]));
  });
  const ScalarField zero(g);
  const GreenReport r = greens_identity_residual(CoefficientSet::zero(g), u, zero, u, zero);
  CHECK(r.residual < 1e-6);
}

TEST_CASE("Green identity residual shrinks under refinement") {
  auto run = [](int N) {
    const GridSpec g = build_grid(3, N);
    const auto fu = [](const double* x) { return cd(std::cos(1.3 * x[0]) * std::exp(0.7 * x[1]), 0.2 * x[2]); };
    const auto fv = [](const double* x) { return cd(std::sin(x[0] + 2 * x[1]) + x[2] * x[2], std::cos(x[1])); };
    const ScalarField u = sample(g, fu), v = sample(g, fv);
    const ScalarField lu = sample(g, [](const double* x) {
      return cd((0.49 - 1.69) * std::cos(1.3 * x[0]) * std::exp(0.7 * x[1]), 0.0);
    });
    const ScalarField lv = sample(g, [](const double* x) {
      return cd(-5.0 * std::sin(x[0] + 2 * x[1]) + 2.0, -std::cos(x[1]));
    });
    const GreenReport r = greens_identity_residual(smooth_coeffs(g), u, lu, v, lv);
    CHECK(r.residual < 1e-8);
    return r.adjoint_defect;
  };
  const double r15 = run(15), r31 = run(31);
  MESSAGE("adjoint defect N=15 " << r15 << " N=31 " << r31);
  CHECK(r15 / r31 >= 3.0);
}

TEST_CASE("Green identity holds exactly for random data") {
  std::mt19937 rng(17);
  std::normal_distribution<double> G;
  for (int n : {3, 4}) {
    const GridSpec g = build_grid(n, 8);
    auto rnd = [&] {
      ScalarField f(g);
      for (auto& z : f.v) z = cd(G(rng), G(rng));
      return f;
    };
    CoefficientSet c = CoefficientSet::zero(g);
    for (auto& comp : c.A.c) comp = rnd();
    c.q = rnd();
    const ScalarField u = rnd(), v = rnd(), lu = rnd(), lv = rnd();
    const GreenReport r = greens_identity_residual(c, u, lu, v, lv);
    CHECK(r.residual < 1e-8 * std::max(1.0, std::abs(r.volume)));
  }
}

TEST_CASE("Green identity needs boundary traces") {
  const GridSpec g = build_grid(3, 10);
  const ScalarField u(g);
  CHECK_THROWS_AS(greens_identity_residual(CoefficientSet::zero(g), u, ScalarField{}, u, u), Error);
}

TEST_CASE("Poisson solve inverts the discrete Laplacian") {
  std::mt19937 rng(4);
  std::normal_distribution<double> G;
  for (int n : {3, 4}) {
    const GridSpec g = build_grid(n, n == 3 ? 13 : 8);
    ScalarField f(g);
    for (std::size_t k : g.interior()) f.v[k] = cd(G(rng), G(rng));
    const ScalarField u = solve_poisson_dirichlet(f);
    for (std::size_t k : g.ring()) CHECK(u.v[k] == cd(0.0));
    CHECK(max_diff(laplacian(u), f) < 1e-9);
  }
}

TEST_CASE("Navier solver reproduces biharmonic polynomials") {
  const GridSpec g = build_grid(3, 14);
  CoefficientSet c = CoefficientSet::zero(g);
  c.A.c[1] = sample(g, [](const double*) { return cd(0.4, 0.1); });
  c.A.c[2] = sample(g, [](const double*) { return cd(-0.2); });
  c.q = sample(g, [](const double*) { return cd(0.7, 0.3); });

  check_poly_exact({[](const double* x) { return cd(x[0] * x[1] * x[2]); },
                    [](const double*) { return cd(0.0); },
                    [](const double* x, cd* gr) {
                      gr[0] = x[1] * x[2];
                      gr[1] = x[0] * x[2];
                      gr[2] = x[0] * x[1];
                    }},
                   c);
  check_poly_exact({[](const double* x) { return cd(x[0] * x[0] * x[1] * x[2]); },
                    [](const double* x) { return cd(2 * x[1] * x[2]); },
                    [](const double* x, cd* gr) {
                      gr[0] = 2 * x[0] * x[1] * x[2];
                      gr[1] = x[0] * x[0] * x[2];
                      gr[2] = x[0] * x[0] * x[1];
                    }},
                   c);
  // cubic in x1 is only exact when the x1 component of A vanishes
  check_poly_exact({[](const double* x) { return cd(std::pow(x[0], 3) * x[1]); },
                    [](const double* x) { return cd(6 * x[0] * x[1]); },
                    [](const double* x, cd* gr) {
                      gr[0] = 3 * x[0] * x[0] * x[1];
                      gr[1] = std::pow(x[0], 3);
                      gr[2] = 0.0;
                    }},
                   c);
}

TEST_CASE("direct and iterative solves agree") {
  const GridSpec g = build_grid(3, 10);
  const CoefficientSet c = smooth_coeffs(g);
  std::mt19937 rng(8);
  std::normal_distribution<double> G;
  ScalarField F(g);
  for (std::size_t k : g.interior()) F.v[k] = cd(G(rng), G(rng));
  NavierProblem p{c, F, ScalarField(g), ScalarField(g)};
  const NavierSolution it = solve_navier(p);
  SolverOptions o;
  o.force_direct = true;
  const NavierSolution dr = solve_navier(p, o);
  CHECK(dr.report.used_direct);
  CHECK(it.report.condition_flag == ConditionFlag::ok);
  CHECK(max_diff(it.u, dr.u) < 1e-8 * linf_norm(dr.u));
}

TEST_CASE("second-order convergence of the forward solve") {
  auto err = [](int N) {
    const GridSpec g = build_grid(3, N);
    const CoefficientSet c = smooth_coeffs(g);
    const auto us = [](const double* x) {
      return cd(std::sin(pi * x[0]) * std::sin(pi * x[1]) * std::sin(pi * x[2]));
    };
    ScalarField F(g);
    std::vector<int> idx(3);
    for (std::size_t k : g.interior()) {
      g.unflatten(k, idx.data());
      double x[3];
      for (int d = 0; d < 3; ++d) x[d] = g.coord(idx[d]);
      const double s0 = std::sin(pi * x[0]), s1 = std::sin(pi * x[1]), s2 = std::sin(pi * x[2]);
      const double c0 = std::cos(pi * x[0]), c1 = std::cos(pi * x[1]), c2 = std::cos(pi * x[2]);
      const cd grad[3] = {pi * c0 * s1 * s2, pi * s0 * c1 * s2, pi * s0 * s1 * c2};
      cd acc = 9 * std::pow(pi, 4) * s0 * s1 * s2 + c.q.v[k] * s0 * s1 * s2;
      for (int d = 0; d < 3; ++d) acc += c.A.c[d].v[k] * (-I) * grad[d];
      F.v[k] = acc;
    }
    NavierProblem p{c, F, ScalarField(g), ScalarField(g)};
    const NavierSolution s = solve_navier(p);
    return l2_norm(s.u - sample(g, us));
  };
  const double ratio = err(15) / err(31);
  MESSAGE("convergence ratio " << ratio);
  CHECK(ratio >= 3.4);
  CHECK(ratio <= 4.6);
}
