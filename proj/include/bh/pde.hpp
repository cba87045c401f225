#pragma once

#include <vector>

#include "bh/field.hpp"
#include "bh/grid.hpp"

namespace bh {

struct CoefficientSet {
  VectorField A;
  ScalarField q;
  std::vector<std::uint8_t> agreement_mask; // padded; 1 where equal to the reference pair

  static CoefficientSet zero(const GridSpec& g);
  const GridSpec& grid() const { return q.grid; }
};

struct AdmissibilityReport {
  double hs_norm_A = 0.0;
  double linf_q = 0.0;
  double max_deviation_on_w0 = 0.0;
  bool ok = false;
};

// Checks |A|_{H^s} <= M, |q|_inf <= M and agreement with the reference on omega_0.
AdmissibilityReport check_admissible(const CoefficientSet& c, const CoefficientSet& ref,
                                     const std::vector<std::uint8_t>& omega0, double s, double M);

// Coefficients of the formal L^2 adjoint: (conj A, conj q - i div conj A).
CoefficientSet adjoint_coefficients(const CoefficientSet& c);

// A.D_h u + q u on interior nodes, D = -i grad with central differences.
ScalarField apply_first_order(const CoefficientSet& c, const ScalarField& u);
// Delta_h^2 u + A.D_h u + q u on interior nodes; the inner Laplacian takes its
// boundary ring from lap_ring (the Navier datum Delta u on the boundary).
ScalarField apply_L(const CoefficientSet& c, const ScalarField& u, const ScalarField& lap_ring);
// Exact discrete adjoint: Delta_h^2 v - i div_h(conj(A) v) + conj(q) v.
ScalarField apply_L_adjoint(const CoefficientSet& c, const ScalarField& v, const ScalarField& lap_ring);

struct GreenReport {
  cd volume = 0.0;   // <L u, v> - <u, L* v>
  cd boundary = 0.0; // discrete boundary form: sums over ring and first layer of each face
  double residual = 0.0;
  // |<u, L*v> - <u, L_{adj coeffs} v>|: conservative versus pointwise adjoint, O(spacing^2)
  double adjoint_defect = 0.0;
};

// lap rings must be supplied (non-empty fields); they carry Delta u, Delta v on the boundary.
GreenReport greens_identity_residual(const CoefficientSet& c, const ScalarField& u, const ScalarField& lap_u_ring,
                                     const ScalarField& v, const ScalarField& lap_v_ring);

struct NavierProblem {
  CoefficientSet coeffs;
  ScalarField rhs; // F on interior nodes
  ScalarField f;   // u on the boundary ring
  ScalarField g;   // Delta u on the boundary ring
};

struct SolverOptions {
  double tol = 1e-10;
  int max_iter = 400;
  int direct_cap = 24;       // direct sparse fallback allowed for N <= direct_cap
  double stagnation = 1e-6;  // residual above this after the cap is near-singular
  bool force_direct = false;
};

enum class ConditionFlag { ok, near_singular };

struct SolveReport {
  int iterations = 0;
  double residual = 0.0;
  ConditionFlag condition_flag = ConditionFlag::ok;
  bool used_direct = false;
};

struct NavierSolution {
  ScalarField u;   // interior solution, ring = f
  ScalarField lap; // Delta_h u on interior, ring = g
  SolveReport report;
};

NavierSolution solve_navier(const NavierProblem& p, const SolverOptions& opt = {});

// Exact inverse of the discrete Dirichlet Laplacian by sine-transform diagonalization.
// Uses interior values of rhs; the result has a zero boundary ring.
ScalarField solve_poisson_dirichlet(const ScalarField& rhs);

} // namespace bh
