#include "bh/norms.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "bh/error.hpp"

namespace bh {

namespace {

double cell_volume(const GridSpec& g) { return std::pow(g.spacing, g.n); }

bool is_integer(double s) { return std::abs(s - std::round(s)) < 1e-14; }

} // namespace

double l2_norm(const ScalarField& f) {
  double acc = 0.0;
  for (std::size_t k : f.grid.interior()) acc += std::norm(f.v[k]);
  return std::sqrt(acc * cell_volume(f.grid));
}

double l2_norm(const VectorField& A) {
  double acc = 0.0;
  for (const auto& c : A.c) acc += std::pow(l2_norm(c), 2);
  return std::sqrt(acc);
}

double l2_norm(const TwoFormField& w) {
  double acc = 0.0;
  for (const auto& c : w.c) acc += std::pow(l2_norm(c), 2);
  return std::sqrt(acc);
}

double l2_norm_masked(const ScalarField& f, const std::vector<std::uint8_t>& mask) {
  double acc = 0.0;
  for (std::size_t k : f.grid.interior())
    if (mask[k]) acc += std::norm(f.v[k]);
  return std::sqrt(acc * cell_volume(f.grid));
}

double linf_norm(const ScalarField& f) {
  double m = 0.0;
  for (std::size_t k : f.grid.interior()) m = std::max(m, std::abs(f.v[k]));
  return m;
}

double linf_norm(const VectorField& A) {
  double m = 0.0;
  for (std::size_t k : A.grid().interior()) {
    double s = 0.0;
    for (const auto& c : A.c) s += std::norm(c.v[k]);
    m = std::max(m, std::sqrt(s));
  }
  return m;
}

double linf_norm(const TwoFormField& w) {
  double m = 0.0;
  for (std::size_t k : w.grid().interior()) {
    double s = 0.0;
    for (const auto& c : w.c) s += std::norm(c.v[k]);
    m = std::max(m, std::sqrt(s));
  }
  return m;
}

double h1_scl_norm(const ScalarField& f, double h) {
  double acc = std::pow(l2_norm(f), 2);
  for (int d = 0; d < f.grid.n; ++d) acc += h * h * std::pow(l2_norm(partial(f, d)), 2);
  return std::sqrt(acc);
}

double h1_norm_masked(const ScalarField& f, const std::vector<std::uint8_t>& mask) {
  double acc = std::pow(l2_norm_masked(f, mask), 2);
  for (int d = 0; d < f.grid.n; ++d) acc += std::pow(l2_norm_masked(partial(f, d), mask), 2);
  return std::sqrt(acc);
}

double box_sobolev_norm(const BoxField& b, double s) {
  if (std::abs(s) > 8.0) fail(ErrorCode::invalid_argument, "Sobolev index outside |s| <= 8");
  const BoxSpec& box = b.box;
  std::vector<cd> F = b.v;
  fft_forward(F, box.n, box.M);
  std::vector<double> k2(box.M);
  for (int j = 0; j < box.M; ++j) k2[j] = std::pow(box.kappa(box.signed_index(j)), 2);
  double acc = 0.0;
  std::vector<int> idx(box.n, 0);
  for (std::size_t m = 0; m < F.size(); ++m) {
    double xi2 = 0.0;
    for (int d = 0; d < box.n; ++d) xi2 += k2[idx[d]];
    acc += std::pow(1.0 + xi2, s) * std::norm(F[m]);
    for (int d = box.n - 1; d >= 0; --d) {
      if (++idx[d] < box.M) break;
      idx[d] = 0;
    }
  }
  const double scale = std::pow(box.spacing, box.n) / static_cast<double>(box.size());
  return std::sqrt(acc * scale);
}

bool supported_away_from_boundary(const ScalarField& f) {
  const GridSpec& g = f.grid;
  double peak = 0.0;
  for (const auto& z : f.v) peak = std::max(peak, std::abs(z));
  if (peak == 0.0) return true;
  const double tol = 1e-14 * peak;
  for (std::size_t k = 0; k < g.padded_size(); ++k)
    if (g.dist(k) <= g.spacing && std::abs(f.v[k]) > tol) return false;
  return true;
}

double sobolev_norm(const ScalarField& f, double s) {
  if (!is_integer(s) && !supported_away_from_boundary(f))
    fail(ErrorCode::precondition, "zero-extension invalid: field does not vanish near the boundary");
  return box_sobolev_norm(embed(f, make_box(f.grid)), s);
}

double sobolev_norm(const VectorField& A, double s) {
  double acc = 0.0;
  for (const auto& c : A.c) acc += std::pow(sobolev_norm(c, s), 2);
  return std::sqrt(acc);
}

double sobolev_norm(const TwoFormField& w, double s) {
  double acc = 0.0;
  for (const auto& c : w.c) acc += std::pow(sobolev_norm(c, s), 2);
  return std::sqrt(acc);
}

double norm(const ScalarField& f, const SobolevIndex& idx) {
  if (idx.scl) {
    if (idx.s != 1.0) fail(ErrorCode::invalid_argument, "semiclassical norm is defined for s = 1 only");
    return h1_scl_norm(f, *idx.scl);
  }
  if (idx.s == 0.0) return l2_norm(f);
  return sobolev_norm(f, idx.s);
}

double norm(const VectorField& A, const SobolevIndex& idx) {
  double acc = 0.0;
  for (const auto& c : A.c) acc += std::pow(norm(c, idx), 2);
  return std::sqrt(acc);
}

double norm(const TwoFormField& w, const SobolevIndex& idx) {
  double acc = 0.0;
  for (const auto& c : w.c) acc += std::pow(norm(c, idx), 2);
  return std::sqrt(acc);
}

InterpolationReport check_interpolation(const BoxField& f, double s_low, double s_mid, double s_high) {
  if (!(s_low < s_mid && s_mid < s_high)) fail(ErrorCode::invalid_argument, "interpolation indices must satisfy s_low < s_mid < s_high");
  InterpolationReport r;
  r.theta = (s_high - s_mid) / (s_high - s_low);
  r.lhs = box_sobolev_norm(f, s_mid);
  r.rhs = std::pow(box_sobolev_norm(f, s_low), r.theta) * std::pow(box_sobolev_norm(f, s_high), 1.0 - r.theta);
  r.ratio = r.rhs == 0.0 ? 1.0 : r.lhs / r.rhs;
  return r;
}

InterpolationReport check_interpolation(const ScalarField& f, double s_low, double s_mid, double s_high) {
  if (!(s_low < s_mid && s_mid < s_high)) fail(ErrorCode::invalid_argument, "interpolation indices must satisfy s_low < s_mid < s_high");
  if (!supported_away_from_boundary(f))
    fail(ErrorCode::precondition, "zero-extension invalid: field does not vanish near the boundary");
  return check_interpolation(embed(f, make_box(f.grid)), s_low, s_mid, s_high);
}

double SineBasis::value(std::size_t mode, std::size_t node) const {
  const int t = n - 1;
  double v = 1.0;
  std::size_t rem = node;
  for (int d = t - 1; d >= 0; --d) {
    const int j = static_cast<int>(rem % static_cast<std::size_t>(count[d])) + 1;
    rem /= static_cast<std::size_t>(count[d]);
    const int m = count[d] + 1;
    v *= std::sqrt(2.0 / (m * spacing)) * std::sin(std::numbers::pi * modes[mode][d] * j / m);
  }
  return v;
}

SineBasis make_sine_basis(const GridSpec& g, const FaceWindow& w, int modes_per_axis) {
  if (modes_per_axis < 1) fail(ErrorCode::invalid_argument, "need at least one mode per axis");
  SineBasis b;
  b.n = g.n;
  b.spacing = g.spacing;
  b.face = w.face;
  b.first = w.first;
  b.count = w.count;
  const int t = g.n - 1;
  std::vector<int> K(t);
  for (int d = 0; d < t; ++d) K[d] = std::min(modes_per_axis, w.count[d]);
  std::vector<int> k(t, 1);
  while (true) {
    b.modes.push_back(k);
    double lam = 0.0;
    for (int d = 0; d < t; ++d)
      lam += (2.0 - 2.0 * std::cos(std::numbers::pi * k[d] / (w.count[d] + 1))) / (g.spacing * g.spacing);
    b.eigenvalues.push_back(lam);
    int d = t - 1;
    while (d >= 0 && ++k[d] > K[d]) k[d--] = 1;
    if (d < 0) break;
  }
  std::vector<int> loc(t, 0);
  std::vector<int> idx(g.n);
  while (true) {
    int a = 0;
    for (int d = 0; d < g.n; ++d) {
      if (d == w.face.axis) idx[d] = w.face.side == 0 ? 0 : g.N + 1;
      else { idx[d] = w.first[a] + loc[a]; ++a; }
    }
    b.nodes.push_back(g.flatten(idx.data()));
    int d = t - 1;
    while (d >= 0 && ++loc[d] >= w.count[d]) loc[d--] = 0;
    if (d < 0) break;
  }
  return b;
}

std::vector<cd> project(const SineBasis& b, const ScalarField& trace) {
  const double da = std::pow(b.spacing, b.n - 1);
  std::vector<cd> c(b.size(), cd(0.0));
  for (std::size_t m = 0; m < b.size(); ++m) {
    cd acc = 0.0;
    for (std::size_t j = 0; j < b.nodes.size(); ++j) acc += trace.v[b.nodes[j]] * b.value(m, j);
    c[m] = acc * da;
  }
  return c;
}

void synthesize(const SineBasis& b, const std::vector<cd>& c, ScalarField& out) {
  if (c.size() != b.size()) fail(ErrorCode::invalid_argument, "coefficient vector does not match basis size");
  for (std::size_t j = 0; j < b.nodes.size(); ++j) {
    cd acc = 0.0;
    for (std::size_t m = 0; m < b.size(); ++m) acc += c[m] * b.value(m, j);
    out.v[b.nodes[j]] = acc;
  }
}

double boundary_norm(const std::vector<cd>& coeffs, const SineBasis& basis, double t) {
  if (coeffs.size() != basis.size()) fail(ErrorCode::invalid_argument, "mismatched basis size in boundary norm");
  double acc = 0.0;
  for (std::size_t k = 0; k < coeffs.size(); ++k) acc += std::pow(1.0 + basis.eigenvalues[k], t) * std::norm(coeffs[k]);
  return std::sqrt(acc);
}

double boundary_norm(const std::vector<std::vector<cd>>& coeffs, const std::vector<const SineBasis*>& bases, double t) {
  if (coeffs.size() != bases.size()) fail(ErrorCode::invalid_argument, "mismatched face count in boundary norm");
  double s = 0.0;
  for (std::size_t f = 0; f < coeffs.size(); ++f) s += boundary_norm(coeffs[f], *bases[f], t);
  return s;
}

} // namespace bh
