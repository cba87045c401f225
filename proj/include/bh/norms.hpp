#pragma once

#include <optional>
#include <vector>

#include "bh/fft.hpp"
#include "bh/field.hpp"

namespace bh {

struct SobolevIndex {
  double s = 0.0;
  std::optional<double> scl; // semiclassical parameter h for H^1_scl
};

// Plain grid quadrature over interior nodes.
double l2_norm(const ScalarField& f);
double l2_norm(const VectorField& A);
double l2_norm(const TwoFormField& w);
double l2_norm_masked(const ScalarField& f, const std::vector<std::uint8_t>& mask);
double linf_norm(const ScalarField& f);
double linf_norm(const VectorField& A);
double linf_norm(const TwoFormField& w);
// (|f|^2 + |h D f|^2)^(1/2) over interior nodes.
double h1_scl_norm(const ScalarField& f, double h);
// Grid H^1 over a node mask: (|f|^2 + |grad f|^2)^(1/2).
double h1_norm_masked(const ScalarField& f, const std::vector<std::uint8_t>& mask);

// Spectral H^s on the periodic box, weight (1+|xi|^2)^(s/2).
double box_sobolev_norm(const BoxField& b, double s);
// H^s of the zero extension of a cube field into the box.
double sobolev_norm(const ScalarField& f, double s);
double sobolev_norm(const VectorField& A, double s);
double sobolev_norm(const TwoFormField& w, double s);

// Dispatch on the index: scl set -> H^1_scl, s == 0 -> L^2, otherwise spectral H^s.
double norm(const ScalarField& f, const SobolevIndex& idx);
double norm(const VectorField& A, const SobolevIndex& idx);
double norm(const TwoFormField& w, const SobolevIndex& idx);

// True when the field and its first interior layer vanish (zero extension is smooth).
bool supported_away_from_boundary(const ScalarField& f);

struct InterpolationReport {
  double lhs = 0.0;
  double rhs = 0.0;
  double ratio = 1.0;
  double theta = 0.0;
};

InterpolationReport check_interpolation(const BoxField& f, double s_low, double s_mid, double s_high);
InterpolationReport check_interpolation(const ScalarField& f, double s_low, double s_mid, double s_high);

// Dirichlet sine modes on the rectangular node block of a face window.
struct SineBasis {
  int n = 0;        // ambient dimension
  double spacing = 0.0;
  Face face;
  std::vector<int> first, count;         // node block per tangential axis
  std::vector<std::vector<int>> modes;   // 1-based mode multi-indices
  std::vector<double> eigenvalues;       // discrete Dirichlet Laplacian eigenvalues
  std::vector<std::size_t> nodes;        // padded flat indices of the block, row-major
  std::size_t size() const { return modes.size(); }
  // L^2(face)-orthonormal mode value at the local node position
  double value(std::size_t mode, std::size_t node) const;
};

SineBasis make_sine_basis(const GridSpec& g, const FaceWindow& w, int modes_per_axis);
// Coefficients of a ring trace (values at the block nodes of f) in the basis.
std::vector<cd> project(const SineBasis& b, const ScalarField& trace);
// Writes sum_k c_k phi_k into the block nodes of out (other nodes untouched).
void synthesize(const SineBasis& b, const std::vector<cd>& c, ScalarField& out);

// sum over faces of (sum_k (1+lambda_k)^t |c_k|^2)^(1/2)
double boundary_norm(const std::vector<std::vector<cd>>& coeffs, const std::vector<const SineBasis*>& bases, double t);
double boundary_norm(const std::vector<cd>& coeffs, const SineBasis& basis, double t);

} // namespace bh
