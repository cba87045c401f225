#include <Eigen/Sparse>
#include <Eigen/SparseLU>

#include <cmath>

#include "bh/error.hpp"
#include "bh/krylov.hpp"
#include "bh/pde.hpp"

namespace bh {

namespace {

const cd I(0.0, 1.0);

// Block system [Delta, -I; A.D + q, Delta] acting on padded (u, v) with zero rings.
struct BlockOperator {
  const CoefficientSet& c;
  const GridSpec& g;
  std::size_t P;

  void operator()(const std::vector<cd>& x, std::vector<cd>& y) const {
    const cd* u = x.data();
    const cd* v = x.data() + P;
    y.assign(2 * P, cd(0.0));
    cd* yu = y.data();
    cd* yv = y.data() + P;
    const double ih2 = 1.0 / (g.spacing * g.spacing);
    const double inv2h = 1.0 / (2.0 * g.spacing);
    const double c0 = 2.0 * g.n;
    for (std::size_t k : g.interior()) {
      cd lu = -c0 * u[k], lv = -c0 * v[k], adu = 0.0;
      for (int d = 0; d < g.n; ++d) {
        const std::size_t s = g.stride(d);
        lu += u[k + s] + u[k - s];
        lv += v[k + s] + v[k - s];
        adu += c.A.c[d].v[k] * (u[k + s] - u[k - s]);
      }
      yu[k] = lu * ih2 - v[k];
      yv[k] = lv * ih2 - I * inv2h * adu + c.q.v[k] * u[k];
    }
  }
};

// Inverse of [Delta, -I; 0, Delta] through two sine-transform Poisson solves.
struct BlockPreconditioner {
  const GridSpec& g;
  std::size_t P;

  void operator()(const std::vector<cd>& x, std::vector<cd>& y) const {
    ScalarField a(g), b(g);
    for (std::size_t k : g.interior()) {
      a.v[k] = x[k];
      b.v[k] = x[P + k];
    }
    const ScalarField v = solve_poisson_dirichlet(b);
    for (std::size_t k : g.interior()) a.v[k] += v.v[k];
    const ScalarField u = solve_poisson_dirichlet(a);
    y.assign(2 * P, cd(0.0));
    for (std::size_t k : g.interior()) {
      y[k] = u.v[k];
      y[P + k] = v.v[k];
    }
  }
};

std::vector<cd> direct_solve(const CoefficientSet& c, const GridSpec& g, const std::vector<cd>& b, bool& ok) {
  const auto& inner = g.interior();
  const std::size_t m = inner.size();
  std::vector<long> pos(g.padded_size(), -1);
  for (std::size_t i = 0; i < m; ++i) pos[inner[i]] = static_cast<long>(i);
  using Trip = Eigen::Triplet<cd>;
  std::vector<Trip> t;
  t.reserve(m * (4 * g.n + 6));
  const double ih2 = 1.0 / (g.spacing * g.spacing);
  const double inv2h = 1.0 / (2.0 * g.spacing);
  for (std::size_t i = 0; i < m; ++i) {
    const std::size_t k = inner[i];
    const long r = static_cast<long>(i);
    t.emplace_back(r, r, -2.0 * g.n * ih2);
    t.emplace_back(r, r + m, -1.0);
    t.emplace_back(r + m, r + m, -2.0 * g.n * ih2);
    t.emplace_back(r + m, r, c.q.v[k]);
    for (int d = 0; d < g.n; ++d) {
      const std::size_t s = g.stride(d);
      for (int sg : {-1, 1}) {
        const long nb = pos[sg > 0 ? k + s : k - s];
        if (nb < 0) continue;
        t.emplace_back(r, nb, ih2);
        t.emplace_back(r + m, nb + m, ih2);
        t.emplace_back(r + m, nb, -I * inv2h * static_cast<double>(sg) * c.A.c[d].v[k]);
      }
    }
  }
  Eigen::SparseMatrix<cd> S(2 * m, 2 * m);
  S.setFromTriplets(t.begin(), t.end());
  Eigen::SparseLU<Eigen::SparseMatrix<cd>> lu;
  lu.compute(S);
  std::vector<cd> x(2 * g.padded_size(), cd(0.0));
  if (lu.info() != Eigen::Success) {
    ok = false;
    return x;
  }
  Eigen::VectorXcd rhs(2 * m);
  for (std::size_t i = 0; i < m; ++i) {
    rhs[i] = b[inner[i]];
    rhs[i + m] = b[g.padded_size() + inner[i]];
  }
  Eigen::VectorXcd sol = lu.solve(rhs);
  ok = lu.info() == Eigen::Success;
  for (std::size_t i = 0; i < m; ++i) {
    x[inner[i]] = sol[i];
    x[g.padded_size() + inner[i]] = sol[i + m];
  }
  return x;
}

} // namespace

NavierSolution solve_navier(const NavierProblem& p, const SolverOptions& opt) {
  const GridSpec& g = p.rhs.grid;
  const std::size_t P = g.padded_size();
  check_finite(p.rhs, "Navier right-hand side");
  check_finite(p.f, "Dirichlet datum f");
  check_finite(p.g, "Navier datum g");
  BlockOperator op{p.coeffs, g, P};
  BlockPreconditioner prec{g, P};

  // lift the boundary data and move it to the right-hand side
  std::vector<cd> lift(2 * P, cd(0.0)), Slift;
  for (std::size_t k : g.ring()) {
    lift[k] = p.f.v[k];
    lift[P + k] = p.g.v[k];
  }
  op(lift, Slift);
  std::vector<cd> b(2 * P, cd(0.0));
  for (std::size_t k : g.interior()) {
    b[k] = -Slift[k];
    b[P + k] = p.rhs.v[k] - Slift[P + k];
  }

  NavierSolution sol;
  std::vector<cd> x;
  KrylovResult kr;
  if (!opt.force_direct) {
    kr = bicgstab(op, prec, b, x, opt.tol, opt.max_iter);
    // restart once if the recurrence drifted just above the target
    for (int restart = 0; restart < 2 && !kr.converged && kr.residual < 1e-6; ++restart) {
      const int used = kr.iterations;
      kr = bicgstab(op, prec, b, x, opt.tol, opt.max_iter);
      kr.iterations += used;
    }
    sol.report.iterations = kr.iterations;
    sol.report.residual = kr.residual;
  }
  if ((opt.force_direct || !kr.converged) && g.N <= opt.direct_cap) {
    bool ok = false;
    std::vector<cd> xd = direct_solve(p.coeffs, g, b, ok);
    if (ok) {
      std::vector<cd> r;
      op(xd, r);
      double rn = 0.0, bn = 0.0;
      for (std::size_t i = 0; i < b.size(); ++i) {
        rn += std::norm(b[i] - r[i]);
        bn += std::norm(b[i]);
      }
      const double rel = bn > 0.0 ? std::sqrt(rn / bn) : 0.0;
      if (opt.force_direct || rel < sol.report.residual || x.empty()) {
        x = xd;
        sol.report.residual = rel;
        sol.report.used_direct = true;
      }
    }
  }
  if (x.empty()) x.assign(2 * P, cd(0.0));
  sol.report.condition_flag = sol.report.residual <= opt.tol ? ConditionFlag::ok : ConditionFlag::near_singular;

  sol.u = ScalarField(g);
  sol.lap = ScalarField(g);
  for (std::size_t k : g.interior()) {
    sol.u.v[k] = x[k];
    sol.lap.v[k] = x[P + k];
  }
  copy_ring(p.f, sol.u);
  copy_ring(p.g, sol.lap);
  return sol;
}

} // namespace bh
