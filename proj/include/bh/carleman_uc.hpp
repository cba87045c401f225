#pragma once

#include <string>
#include <vector>

#include "bh/norms.hpp"
#include "bh/pde.hpp"

namespace bh {

struct CarlemanWeight {
  ScalarField psi; // real values
  ScalarField phi; // exp(beta0 psi)
  double beta0 = 0.0;
  BoundaryPatch gamma;
  Face face; // face carrying gamma
};

// psi = x_a for gamma on {x_a = 1}, psi = 1 - x_a for gamma on {x_a = 0}.
// Checks psi >= 0, |grad psi| > 0 and d_nu psi <= 1e-12 on the boundary outside gamma.
CarlemanWeight make_weight(const GridSpec& g, const BoundaryPatch& gamma, double beta0);

struct InequalityReport {
  std::vector<double> h_values;
  std::vector<double> lhs, rhs;    // scaled by exp(-log_shift) per h
  std::vector<double> log_shift;   // max exponent 2 phi / h over the samples
  std::vector<double> ratio;
  std::vector<double> lap_ratio;   // second-order building block, same shift
  std::vector<double> layer_nodes; // weight e-folding length h / max|2 grad phi| in grid spacings
  double best_constant = 0.0;
  // least-squares slope of log ratio against 1/h over the h values with a
  // nonzero ratio (ratios can underflow for large beta0); NaN if fewer than two
  double trend_slope = 0.0;
};

// u and lap_u carry u and Delta u on every padded node (ring included); both must
// vanish on the boundary ring to 1e-10 relative.
InequalityReport carleman_check(const CarlemanWeight& w, const ScalarField& u, const ScalarField& lap_u,
                                const std::vector<double>& h_values);

struct UcCell {
  std::string scenario;
  double h = 0.0;
  double lhs = 0.0;      // |w|_{H1(omega_2 \ omega_3)}
  double interior = 0.0; // |w|_{H3(Omega)} + |F|_{L2(omega_0)}
  double boundary = 0.0; // |d_nu w|_{H5/2(Gamma_0)} + |d_nu Delta w|_{H1/2(Gamma_0)}
  double ratio = 0.0;    // lhs / bound at the fitted alphas
};

struct UcScenario {
  std::string name;
  ScalarField F;
};

struct UcReport {
  std::vector<UcCell> cells;
  double alpha1 = 0.0, alpha2 = 0.0;
  double alpha1_interior = 0.0; // largest alpha1 with the boundary term dropped (alpha2 irrelevant)
  bool alpha1_capped = false;
  double constant = 1.0;
  double margin = 0.0; // 1 - max ratio
  bool feasible = true;
  std::vector<SolveReport> solves;
};

struct UcOptions {
  SolverOptions solver;
  int boundary_modes = 8;
  double alpha_cap = 10.0;
  double max_constant = 1e3;
};

// Solves w: L w = F, w = Delta w = 0 on the boundary for each scenario and fits
// |w|_{H1(omega_2\omega_3)} <= C (exp(-a1/h) X + exp(a2/h) B): a2 is the smallest
// nonnegative value that makes every cell feasible with a1 = 0, then a1 the largest
// value (<= alpha_cap) compatible with that a2.
UcReport unique_continuation_experiment(const CoefficientSet& c, const NeighborhoodChain& chain,
                                        const BoundaryPatch& gamma0, const std::vector<UcScenario>& scenarios,
                                        const std::vector<double>& h_values, const UcOptions& opt = {});

// Fit stage alone, on measured (lhs, interior, boundary) triples.
void fit_uc_alphas(UcReport& r, const UcOptions& opt = {});

// Three interior sources supported away from omega_0 (dist >= w0).
std::vector<UcScenario> uc_catalog(const GridSpec& g, double w0);

} // namespace bh
