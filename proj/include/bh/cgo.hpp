#pragma once

#include <string>
#include <vector>

#include "bh/fft.hpp"
#include "bh/pde.hpp"

namespace bh {

struct CgoDirections {
  std::vector<double> mu1, mu2, xi;
  double tau = 0.0;
  double c = 1.0; // sqrt(1 - tau^2 |xi|^2 / 4)
  std::vector<cd> zeta1, zeta2;
};

// zeta1 = tau xi/2 + c mu1 + i mu2, zeta2 = -tau xi/2 + c mu1 - i mu2.
CgoDirections make_directions(const std::vector<double>& xi, const std::vector<double>& mu1,
                              const std::vector<double>& mu2, double tau);

// Complex bilinear dot product (no conjugation).
cd bilinear(const std::vector<cd>& a, const std::vector<cd>& b);

enum class AmplitudeKind { one, linear_transport };

ScalarField make_amplitude(const GridSpec& g, const CgoDirections& d, AmplitudeKind kind);

struct FaddeevOptions {
  double eps_reg_factor = 1e-2;  // floor = factor * tau^3
  std::vector<double> shift;     // Bloch offset in lattice units (empty: none)
};

// Multiplies the Fourier coefficients of rhs by 1/p_reg on the lattice
// kappa = 2 pi (k + shift) / L, p = (-tau^2 |kappa|^2 - 2 tau zeta.kappa)^2.
// clamped (optional) receives the number of floored modes.
BoxField faddeev_apply_inverse(const std::vector<cd>& zeta, double tau, const BoxField& rhs,
                               const FaddeevOptions& opt = {}, std::size_t* clamped = nullptr);

enum class CgoRole { adjoint_side, direct_side };

struct CgoOptions {
  double eps_reg_factor = 1e-2;
  double neumann_tol = 1e-10;
  int neumann_max_iter = 50;
  bool bloch_shift = true; // use a half-lattice shift when mu2 has a rational direction
};

struct CgoSolution {
  CgoDirections directions;
  std::vector<cd> zeta; // zeta1 on the adjoint side, zeta2 on the direct side
  AmplitudeKind kind = AmplitudeKind::one;
  CgoRole role = CgoRole::direct_side;
  BoxField w;                // r = exp(i beta.x) w on the box
  std::vector<double> beta;  // angular Bloch shift (zero vector when unshifted)
  int iterations = 0;
  double update_norm = 0.0;       // relative size of the last Neumann update
  double periodic_residual = 0.0; // residual of the regularized periodic equation
  std::size_t clamped_modes = 0;
  std::vector<double> update_history;
};

// Lattice shift used by build_cgo for these directions: half a lattice step
// along an axis where the primitive integer direction of mu2 is odd.
std::vector<double> bloch_shift_for(const std::vector<double>& mu2);

// Solves for r with r = -G[tau^4 (A.(D + zeta/tau) + q)(a + r)] by Neumann iteration.
// The adjoint side uses the adjoint coefficients of c.
CgoSolution build_cgo(const CoefficientSet& c, const CgoDirections& d, AmplitudeKind kind, CgoRole role,
                      const CgoOptions& opt = {});

// a + r on the padded cube nodes.
ScalarField cgo_factor(const CgoSolution& s, const GridSpec& g);
// grad(a + r) on the padded cube nodes (spectral for r, exact for a).
VectorField cgo_factor_gradient(const CgoSolution& s, const GridSpec& g);
// r alone on the padded cube nodes.
ScalarField cgo_remainder(const CgoSolution& s, const GridSpec& g);
// u = exp(i x.zeta/tau)(a + r) on the padded cube nodes.
ScalarField cgo_field(const CgoSolution& s, const GridSpec& g);
// Discrete Laplacian of u on the boundary ring, using box values just outside the cube.
ScalarField cgo_ring_laplacian(const CgoSolution& s, const GridSpec& g);
// (|r|^2 + |tau grad r|^2)^(1/2) over Omega.
double remainder_h1_scl(const CgoSolution& s, const GridSpec& g);
// |L_h u| / |u| over interior nodes with the role-appropriate operator.
double stencil_residual(const CgoSolution& s, const CoefficientSet& c, const GridSpec& g);

std::string describe(const CgoDirections& d);

} // namespace bh
