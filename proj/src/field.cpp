#include "bh/field.hpp"

#include <cmath>
#include <string>

#include "bh/error.hpp"

namespace bh {

int TwoFormField::pair_index(int n, int j, int k) {
  int idx = 0;
  for (int a = 0; a < n; ++a)
    for (int b = a + 1; b < n; ++b) {
      if (a == j && b == k) return idx;
      ++idx;
    }
  fail(ErrorCode::invalid_argument, "two-form pair index out of range");
}

std::vector<std::pair<int, int>> two_form_pairs(int n) {
  std::vector<std::pair<int, int>> p;
  for (int a = 0; a < n; ++a)
    for (int b = a + 1; b < n; ++b) p.emplace_back(a, b);
  return p;
}

ScalarField sample(const GridSpec& g, const PointFn& fn) {
  ScalarField f(g);
  std::vector<int> idx(g.n);
  std::vector<double> x(g.n);
  for (std::size_t k = 0; k < g.padded_size(); ++k) {
    g.unflatten(k, idx.data());
    for (int d = 0; d < g.n; ++d) x[d] = g.coord(idx[d]);
    f.v[k] = fn(x.data());
  }
  return f;
}

void check_finite(const ScalarField& f, const char* what) {
  for (const auto& z : f.v)
    if (!std::isfinite(z.real()) || !std::isfinite(z.imag()))
      fail(ErrorCode::numeric, std::string("non-finite entry in ") + what);
}

ScalarField partial(const ScalarField& f, int d) {
  const GridSpec& g = f.grid;
  ScalarField out(g);
  const std::size_t s = g.stride(d);
  const double inv2h = 1.0 / (2.0 * g.spacing);
  const int last = g.N + 1;
  for (std::size_t k = 0; k < g.padded_size(); ++k) {
    const int i = static_cast<int>((k / s) % static_cast<std::size_t>(g.P()));
    if (i == 0)
      out.v[k] = (-3.0 * f.v[k] + 4.0 * f.v[k + s] - f.v[k + 2 * s]) * inv2h;
    else if (i == last)
      out.v[k] = (3.0 * f.v[k] - 4.0 * f.v[k - s] + f.v[k - 2 * s]) * inv2h;
    else
      out.v[k] = (f.v[k + s] - f.v[k - s]) * inv2h;
  }
  return out;
}

VectorField gradient(const ScalarField& f) {
  VectorField g;
  for (int d = 0; d < f.grid.n; ++d) g.c.push_back(partial(f, d));
  return g;
}

ScalarField divergence(const VectorField& A) {
  ScalarField out(A.grid());
  for (int d = 0; d < A.dim(); ++d) {
    const ScalarField p = partial(A.c[d], d);
    for (std::size_t k = 0; k < out.v.size(); ++k) out.v[k] += p.v[k];
  }
  return out;
}

TwoFormField d_operator(const VectorField& A) {
  const GridSpec& g = A.grid();
  TwoFormField w(g);
  int idx = 0;
  for (auto [j, k] : two_form_pairs(g.n)) {
    const ScalarField a = partial(A.c[k], j);
    const ScalarField b = partial(A.c[j], k);
    for (std::size_t m = 0; m < a.v.size(); ++m) w.c[idx].v[m] = a.v[m] - b.v[m];
    ++idx;
  }
  return w;
}

ScalarField laplacian(const ScalarField& f) {
  const GridSpec& g = f.grid;
  ScalarField out(g);
  const double ih2 = 1.0 / (g.spacing * g.spacing);
  const double c0 = 2.0 * g.n;
  for (std::size_t k : g.interior()) {
    cd acc = -c0 * f.v[k];
    for (int d = 0; d < g.n; ++d) acc += f.v[k + g.stride(d)] + f.v[k - g.stride(d)];
    out.v[k] = acc * ih2;
  }
  return out;
}

ScalarField laplacian_with_ring(const ScalarField& f, const ScalarField& ring_values) {
  ScalarField out = laplacian(f);
  copy_ring(ring_values, out);
  return out;
}

void copy_ring(const ScalarField& src, ScalarField& dst) {
  for (std::size_t k : dst.grid.ring()) dst.v[k] = src.v[k];
}

void zero_ring(ScalarField& f) {
  for (std::size_t k : f.grid.ring()) f.v[k] = 0.0;
}

ScalarField operator+(const ScalarField& a, const ScalarField& b) {
  ScalarField o(a.grid);
  for (std::size_t k = 0; k < o.v.size(); ++k) o.v[k] = a.v[k] + b.v[k];
  return o;
}

ScalarField operator-(const ScalarField& a, const ScalarField& b) {
  ScalarField o(a.grid);
  for (std::size_t k = 0; k < o.v.size(); ++k) o.v[k] = a.v[k] - b.v[k];
  return o;
}

ScalarField operator*(cd s, const ScalarField& a) {
  ScalarField o(a.grid);
  for (std::size_t k = 0; k < o.v.size(); ++k) o.v[k] = s * a.v[k];
  return o;
}

VectorField operator-(const VectorField& a, const VectorField& b) {
  VectorField o;
  for (int d = 0; d < a.dim(); ++d) o.c.push_back(a.c[d] - b.c[d]);
  return o;
}

VectorField operator+(const VectorField& a, const VectorField& b) {
  VectorField o;
  for (int d = 0; d < a.dim(); ++d) o.c.push_back(a.c[d] + b.c[d]);
  return o;
}

ScalarField conj(const ScalarField& a) {
  ScalarField o(a.grid);
  for (std::size_t k = 0; k < o.v.size(); ++k) o.v[k] = std::conj(a.v[k]);
  return o;
}

VectorField conj(const VectorField& a) {
  VectorField o;
  for (const auto& c : a.c) o.c.push_back(conj(c));
  return o;
}

} // namespace bh
