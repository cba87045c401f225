#pragma once

#include <Eigen/Dense>
#include <vector>

#include "bh/norms.hpp"
#include "bh/pde.hpp"

namespace bh {

// Lowest face-sine modes on the input patch, once for the Dirichlet slot (f)
// and once for the Navier slot (g).
struct BoundaryBasis {
  struct Entry {
    int slot = 0; // 0: f = u on the boundary, 1: g = Delta u on the boundary
    int face = 0; // index into faces
    int mode = 0; // index into faces[face]
  };
  std::vector<SineBasis> faces;
  std::vector<Entry> entries;
  std::size_t count() const { return entries.size(); }
};

BoundaryBasis make_boundary_basis(const GridSpec& g, const BoundaryPatch& gamma1, int modes_per_axis);

// Boundary data of one basis entry: f and g as ring fields.
void basis_entry_data(const BoundaryBasis& b, std::size_t j, ScalarField& f, ScalarField& g);

struct PartialDtnMatrix {
  Eigen::MatrixXcd matrix;     // rows: output face-sine coefficients, cols: basis entries
  Eigen::VectorXd weights_in;  // per column (1 + lambda)^(t/2), t = 7/2 (f) or 3/2 (g)
  Eigen::VectorXd weights_out; // per row, t = 5/2 (normal u) or 1/2 (normal Delta u)
  std::vector<double> column_residuals;
};

struct DtnOptions {
  SolverOptions solver;
  int threads = 1;
};

// One-sided second-order outward normal derivative at ring nodes of a face.
std::vector<cd> normal_derivative(const ScalarField& f, const Face& face, const std::vector<std::size_t>& nodes);

// Output rows are ordered: per gamma2 face, first the normal-u coefficients, then the normal-Delta-u ones.
PartialDtnMatrix assemble_dtn(const CoefficientSet& c, const BoundaryBasis& basis, const std::vector<SineBasis>& gamma2,
                              const DtnOptions& opt = {});

// Largest singular value of diag(w_out) D diag(w_in)^-1 by power iteration on the
// normal operator with a fixed start vector; relative tolerance tol on sigma^2.
double weighted_operator_norm(const Eigen::MatrixXcd& D, const Eigen::VectorXd& w_in, const Eigen::VectorXd& w_out,
                              double tol = 1e-8, int max_iter = 20000);
double dtn_difference_norm(const PartialDtnMatrix& a, const PartialDtnMatrix& b);

// Binary persistence with header "BHDTN1".
void write_dtn(const std::string& path, const PartialDtnMatrix& m);
PartialDtnMatrix read_dtn(const std::string& path);

} // namespace bh
