#pragma once

#include <string>
#include <vector>

#include "bh/cgo.hpp"
#include "bh/pde.hpp"

namespace bh {

struct IntegralEvidence {
  cd lhs = 0.0;             // int (A.D u2 + q u2) conj(u1), A = A2 - A1, q = q2 - q1
  cd commutator_term = 0.0; // int conj(u1) P u, P = [Delta^2, chi] + A1.[D, chi]
  double relative_residual = 0.0; // |lhs + commutator_term| / |lhs|
  double u1_l2 = 0.0, u2_h1 = 0.0, u2_h4 = 0.0, lap_u2_h2 = 0.0;
  double dtn_bound = 0.0; // right side of the integral estimate, constant 1
  // |u_h - u_cgo| / |u_cgo| for each CGO when projected onto discrete solutions (0 otherwise)
  double projection_change1 = 0.0, projection_change2 = 0.0;
  SolveReport solve;
};

struct IdentityOptions {
  SolverOptions solver;
  double cgo_residual_cap = 1e-6; // periodic residual above this rejects the CGO input
  // replace each CGO by the discrete solution with the same Navier traces
  // (u1 for the adjoint coefficients of c1, u2 for c2)
  bool project_cgo = true;
  // inputs of the integral estimate; dtn_bound is left 0 when delta < 0
  double delta = -1.0, alpha1 = 0.0, alpha2 = 0.0, h = 0.0;
};

// Cutoff for the identity: one from dist >= w2, zero on omega_3. On coarse grids
// the zero plateau is widened to cover the two node layers next to the boundary
// (needed for the discrete boundary form to vanish) and the ramp kept >= 2 spacings.
Cutoff identity_cutoff(const GridSpec& g, const NeighborhoodChain& chain);

IntegralEvidence evaluate_integral_identity(const CoefficientSet& c1, const CoefficientSet& c2, const CgoSolution& u1,
                                            const CgoSolution& u2, const NeighborhoodChain& chain, const Cutoff& chi,
                                            const IdentityOptions& opt = {});

double integral_estimate_bound(const IntegralEvidence& ev, double delta, double alpha1, double alpha2, double h);

struct ExtractOptions {
  CgoOptions cgo;
  int threads = 1;
  // a priori bound on |A2 - A1|_inf used by the with_A budget (class bound M)
  double class_bound = 10.0;
};

// Budget terms of one extracted value; total = remainder + tau + quadrature (+ a_term).
struct ErrorBudget {
  double remainder = 0.0;  // r1, r2 cross terms
  double tau = 0.0;        // tau A.grad r2 term
  double quadrature = 0.0; // node sum against the even-node subgrid
  double a_term = 0.0;     // with_A only: |A| |D u2| |u1|
  double total() const { return remainder + tau + quadrature + a_term; }
};

struct DAHat {
  std::vector<double> xi;
  double tau = 0.0;
  bool degenerate = false; // xi = 0
  std::vector<std::pair<int, int>> pairs;
  std::vector<cd> values;  // F(dA)_{jk}(xi) per pair
  std::vector<ErrorBudget> budgets;
  double max_periodic_residual = 0.0;
};

// mu_jk(xi) = xi_j e_k - xi_k e_j
std::vector<double> mu_jk(const std::vector<double>& xi, int j, int k);

DAHat extract_dA_hat(const CoefficientSet& c1, const CoefficientSet& c2, const std::vector<double>& xi, double h,
                     double lambda, const ExtractOptions& opt = {});

enum class QMode { with_A, A_zero };

struct QHat {
  std::vector<double> xi;
  double tau = 0.0;
  cd value = 0.0;
  ErrorBudget budget;
  double max_periodic_residual = 0.0;
};

QHat extract_q_hat(const CoefficientSet& c1, const CoefficientSet& c2, const std::vector<double>& xi, double h,
                   double lambda, QMode mode, const ExtractOptions& opt = {});

// F(f)(xi) = int_Omega f exp(-i x.xi) dx by grid quadrature over all padded nodes.
cd fourier_sample(const ScalarField& f, const std::vector<double>& xi);

// Lattice indices k of the side-2 box (xi = pi k) with |xi| <= radius and |k_d| <= kmax,
// ordered by |k|^2 then lexicographically.
std::vector<std::vector<int>> lattice_ball(int n, double radius, int kmax);

// h^(-1/(n+2))
double lowpass_radius(double h, int n);

struct FourierSamples {
  std::vector<std::vector<int>> k; // lattice indices, xi = pi k
  std::vector<std::vector<cd>> dA_hat; // per frequency, per pair (may be empty)
  std::vector<cd> q_hat;               // per frequency (may be empty)
  std::vector<double> dA_budget, q_budget;
  double tau_used = 0.0, h_used = 0.0, lambda_used = 0.0;
};

struct LowpassInfo {
  double rho = 0.0;      // h^(-1/(n+2))
  double rho_used = 0.0; // after the Nyquist clamp pi/spacing
  bool clamped = false;
  std::size_t used = 0;  // samples inside the ball
};

// Inverse transform of values at lattice frequencies k with |pi k| <= rho_used.
ScalarField lowpass_invert(const std::vector<std::vector<int>>& k, const std::vector<cd>& values, const GridSpec& g,
                           double h, LowpassInfo* info = nullptr);
ScalarField lowpass_invert_q(const FourierSamples& s, const GridSpec& g, LowpassInfo* info = nullptr);
TwoFormField lowpass_invert_dA(const FourierSamples& s, const GridSpec& g, LowpassInfo* info = nullptr);

struct DecompositionResult {
  ScalarField phi;
  VectorField A_sol;
  VectorField grad_phi;
  double div_residual = 0.0;
  double boundary_residual = 0.0;
};

DecompositionResult decompose(const VectorField& A);

struct StabilityExponents {
  double eta = 0.0, eta_tilde = 0.0, mu1 = 0.0, mu2 = 0.0, mu_prime = 0.0, a_zero_rate = 0.0;
};

StabilityExponents stability_exponents(int n, double s);

struct AEstimate {
  double h = 0.0;
  double dA_linf = 0.0;
  double A_sol_bound = 0.0;
  double grad_phi_bound = 0.0;
  double A_bound = 0.0;
  double sol_to_dA_ratio = 0.0;
  bool triangle_ok = false;
  StabilityExponents exponents;
};

AEstimate assemble_A_estimate(const TwoFormField& dA, double dA_h, const DecompositionResult& dec, double dec_h,
                              int n, double s);

} // namespace bh
