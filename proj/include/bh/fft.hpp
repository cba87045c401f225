#pragma once

#include <vector>

#include "bh/field.hpp"

namespace bh {

// Periodic box of side 2 enclosing the unit cube. Same spacing as the cube grid,
// M = 2(N+1) points per axis; cube index i sits at box index i + offset.
// Physical coordinate of box index j is (j - offset) * spacing.
struct BoxSpec {
  int n = 0;
  int M = 0;
  int offset = 0;
  double spacing = 0.0;
  double side = 2.0;
  std::size_t size() const;
  std::size_t stride(int d) const;
  // signed lattice index of FFT bin j along one axis
  int signed_index(int j) const { return j <= M / 2 ? j : j - M; }
  // angular frequency 2*pi*k/side of signed lattice index k
  double kappa(double k) const;
};

BoxSpec make_box(const GridSpec& g);

struct BoxField {
  BoxSpec box;
  std::vector<cd> v;
  BoxField() = default;
  explicit BoxField(const BoxSpec& b) : box(b), v(b.size(), cd(0.0)) {}
};

// Zero extension of the padded cube field (interior and ring) into the box.
BoxField embed(const ScalarField& f, const BoxSpec& box);
// Restriction of a box field to the padded cube grid.
ScalarField restrict_to_cube(const BoxField& b, const GridSpec& g);

// Unnormalized n-D DFT on an M^n array, forward kernel exp(-i x.xi).
void fft_forward(std::vector<cd>& data, int n, int M);
// Unnormalized inverse (kernel exp(+i x.xi)); caller divides by M^n.
void fft_backward(std::vector<cd>& data, int n, int M);
// In-place type-I DST along every axis of an N^n real array (unnormalized).
void dst_all_axes(std::vector<double>& data, int n, int N);

} // namespace bh
