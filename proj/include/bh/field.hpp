#pragma once

#include <functional>
#include <vector>

#include "bh/grid.hpp"

namespace bh {

// Complex grid function on the padded grid (interior nodes plus boundary ring).
struct ScalarField {
  GridSpec grid;
  std::vector<cd> v;

  ScalarField() = default;
  explicit ScalarField(const GridSpec& g) : grid(g), v(g.padded_size(), cd(0.0)) {}
  cd& operator[](std::size_t i) { return v[i]; }
  const cd& operator[](std::size_t i) const { return v[i]; }
};

struct VectorField {
  std::vector<ScalarField> c;

  VectorField() = default;
  explicit VectorField(const GridSpec& g) : c(g.n, ScalarField(g)) {}
  const GridSpec& grid() const { return c.at(0).grid; }
  int dim() const { return static_cast<int>(c.size()); }
};

// Components (j,k), j<k, stored in lexicographic pair order.
struct TwoFormField {
  int n = 0;
  std::vector<ScalarField> c;

  TwoFormField() = default;
  explicit TwoFormField(const GridSpec& g) : n(g.n), c(g.n * (g.n - 1) / 2, ScalarField(g)) {}
  const GridSpec& grid() const { return c.at(0).grid; }
  static int pair_index(int n, int j, int k); // requires j < k
};

std::vector<std::pair<int, int>> two_form_pairs(int n);

using PointFn = std::function<cd(const double* x)>;

// Samples fn at every padded node (boundary ring included).
ScalarField sample(const GridSpec& g, const PointFn& fn);

void check_finite(const ScalarField& f, const char* what);

// Derivative along axis d: central inside, one-sided 3-point at index 0 and N+1.
ScalarField partial(const ScalarField& f, int d);
VectorField gradient(const ScalarField& f);
ScalarField divergence(const VectorField& A);
TwoFormField d_operator(const VectorField& A);

// Standard (2n+1)-point Laplacian on interior nodes; ring of the result is zero.
ScalarField laplacian(const ScalarField& f);
// Laplacian on interior nodes, ring filled from ring_values.
ScalarField laplacian_with_ring(const ScalarField& f, const ScalarField& ring_values);

// Copies the ring values of src into dst (interior untouched).
void copy_ring(const ScalarField& src, ScalarField& dst);
void zero_ring(ScalarField& f);

ScalarField operator+(const ScalarField& a, const ScalarField& b);
ScalarField operator-(const ScalarField& a, const ScalarField& b);
ScalarField operator*(cd s, const ScalarField& a);
VectorField operator-(const VectorField& a, const VectorField& b);
VectorField operator+(const VectorField& a, const VectorField& b);
ScalarField conj(const ScalarField& a);
VectorField conj(const VectorField& a);

} // namespace bh
