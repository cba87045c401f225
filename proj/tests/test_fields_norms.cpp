#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <numbers>
#include <random>

#include "bh/error.hpp"
#include "bh/fft.hpp"
#include "bh/field.hpp"
#include "bh/norms.hpp"

using namespace bh;

namespace {

constexpr double pi = std::numbers::pi;

double max_interior_diff(const ScalarField& a, const ScalarField& b) {
  double m = 0.0;
  for (std::size_t k : a.grid.interior()) m = std::max(m, std::abs(a.v[k] - b.v[k]));
  return m;
}

// brute-force periodic H^s norm with an explicit DFT sum
double dense_box_norm(const BoxField& b, double s) {
  const BoxSpec& box = b.box;
  const std::size_t S = box.size();
  std::vector<std::vector<int>> idx(S, std::vector<int>(box.n));
  for (std::size_t m = 0; m < S; ++m) {
    std::size_t r = m;
    for (int d = box.n - 1; d >= 0; --d) {
      idx[m][d] = static_cast<int>(r % box.M);
      r /= box.M;
    }
  }
  double acc = 0.0;
  for (std::size_t kk = 0; kk < S; ++kk) {
    cd F = 0.0;
    for (std::size_t jj = 0; jj < S; ++jj) {
      double ph = 0.0;
      for (int d = 0; d < box.n; ++d) ph += static_cast<double>(idx[kk][d]) * idx[jj][d];
      F += b.v[jj] * std::polar(1.0, -2.0 * pi * ph / box.M);
    }
    double xi2 = 0.0;
    for (int d = 0; d < box.n; ++d) {
      const int k = idx[kk][d] <= box.M / 2 ? idx[kk][d] : idx[kk][d] - box.M;
      xi2 += std::pow(2.0 * pi * k / box.side, 2);
    }
    acc += std::pow(1.0 + xi2, s) * std::norm(F);
  }
  return std::sqrt(acc * std::pow(box.spacing, box.n) / static_cast<double>(S));
}

ScalarField bump(const GridSpec& g, const double* c, double w) {
  return sample(g, [&](const double* x) {
    double r2 = 0.0;
    for (int d = 0; d < g.n; ++d) r2 += (x[d] - c[d]) * (x[d] - c[d]);
    const double t = 1.0 - r2 / (w * w);
    return cd(t > 0 ? std::pow(t, 4) : 0.0);
  });
}

} // namespace

TEST_CASE("gradient is exact on bilinear functions") {
  const GridSpec g = build_grid(3, 12);
  const ScalarField u = sample(g, [](const double* x) { return cd(x[0] * x[1]); });
  const VectorField gu = gradient(u);
  const ScalarField ex0 = sample(g, [](const double* x) { return cd(x[1]); });
  const ScalarField ex1 = sample(g, [](const double* x) { return cd(x[0]); });
  for (std::size_t k = 0; k < g.padded_size(); ++k) {
    CHECK(std::abs(gu.c[0].v[k] - ex0.v[k]) < 1e-12);
    CHECK(std::abs(gu.c[1].v[k] - ex1.v[k]) < 1e-12);
    CHECK(std::abs(gu.c[2].v[k]) < 1e-12);
  }
}

TEST_CASE("exterior derivative of a shear field") {
  const GridSpec g = build_grid(3, 10);
  VectorField A(g);
  A.c[0] = sample(g, [](const double* x) { return cd(x[1]); });
  const TwoFormField w = d_operator(A);
  const int i01 = TwoFormField::pair_index(3, 0, 1);
  for (std::size_t k : g.interior()) {
    CHECK(std::abs(w.c[i01].v[k] - cd(-1.0)) < 1e-12);
    CHECK(std::abs(w.c[TwoFormField::pair_index(3, 0, 2)].v[k]) < 1e-12);
    CHECK(std::abs(w.c[TwoFormField::pair_index(3, 1, 2)].v[k]) < 1e-12);
  }
}

TEST_CASE("d of a gradient vanishes for random fields") {
  std::mt19937 rng(11);
  std::normal_distribution<double> G;
  for (int n : {3, 4}) {
    const GridSpec g = build_grid(n, 8);
    ScalarField phi(g);
    for (auto& z : phi.v) z = cd(G(rng), G(rng));
    const TwoFormField w = d_operator(gradient(phi));
    double worst = 0.0;
    for (const auto& c : w.c)
      for (const auto& z : c.v) worst = std::max(worst, std::abs(z));
    CHECK(worst < 1e-9 * linf_norm(gradient(phi)));
  }
}

TEST_CASE("Laplacian of a quadratic and ring handling") {
  const GridSpec g = build_grid(3, 9);
  const ScalarField u = sample(g, [](const double* x) { return cd(x[0] * x[0] + 2 * x[1] * x[2]); });
  const ScalarField lu = laplacian(u);
  for (std::size_t k : g.interior()) CHECK(std::abs(lu.v[k] - cd(2.0)) < 1e-10);
  for (std::size_t k : g.ring()) CHECK(lu.v[k] == cd(0.0));
  const ScalarField ring = sample(g, [](const double*) { return cd(5.0); });
  const ScalarField lr = laplacian_with_ring(u, ring);
  for (std::size_t k : g.ring()) CHECK(lr.v[k] == cd(5.0));
}

TEST_CASE("Parseval on the periodic box") {
  const GridSpec g = build_grid(3, 9);
  std::mt19937 rng(5);
  std::normal_distribution<double> G;
  ScalarField f(g);
  for (std::size_t k : g.interior()) f.v[k] = cd(G(rng), G(rng));
  // embedded ring is zero, so interior L2 equals the box L2
  CHECK(box_sobolev_norm(embed(f, make_box(g)), 0.0) == doctest::Approx(l2_norm(f)).epsilon(1e-12));
}

TEST_CASE("single Fourier mode ratio") {
  const GridSpec g = build_grid(3, 15);
  const BoxSpec box = make_box(g);
  const int kv[3] = {1, 2, 0}; // frequencies 2*pi*k
  BoxField b(box);
  std::vector<int> j(3, 0);
  for (std::size_t m = 0; m < box.size(); ++m) {
    std::size_t r = m;
    double ph = 0.0;
    for (int d = 2; d >= 0; --d) {
      const double x = (static_cast<int>(r % box.M) - box.offset) * box.spacing;
      r /= box.M;
      ph += 2.0 * pi * kv[d] * x;
    }
    b.v[m] = std::polar(1.0, ph);
  }
  const double ratio = box_sobolev_norm(b, -1.0) / box_sobolev_norm(b, 0.0);
  CHECK(ratio == doctest::Approx(1.0 / std::sqrt(1.0 + 4 * pi * pi * 5.0)).epsilon(1e-12));
}

TEST_CASE("spectral norm agrees with a dense DFT") {
  const GridSpec g = build_grid(3, 8);
  const BoxSpec box = make_box(g);
  std::mt19937 rng(7);
  std::normal_distribution<double> G;
  BoxField b(box);
  for (auto& z : b.v) z = cd(G(rng), G(rng));
  for (double s : {2.0, -1.5}) {
    const double fast = box_sobolev_norm(b, s);
    CHECK(std::abs(fast - dense_box_norm(b, s)) <= 1e-10 * fast);
  }
}

TEST_CASE("norms are monotone in s and satisfy interpolation") {
  const GridSpec g = build_grid(3, 15);
  std::mt19937 rng(21);
  std::uniform_real_distribution<double> U(0.3, 0.7);
  for (int trial = 0; trial < 6; ++trial) {
    const double c[3] = {U(rng), U(rng), U(rng)};
    const ScalarField f = bump(g, c, 0.25);
    double prev = 0.0;
    for (double s : {-1.0, 0.0, 0.5, 1.0, 2.0, 3.5}) {
      const double v = sobolev_norm(f, s);
      CHECK(v >= prev);
      prev = v;
    }
    const auto rep = check_interpolation(f, 0.0, 1.5, 4.0);
    CHECK(rep.ratio <= 1.0 + 1e-10);
    CHECK(rep.theta == doctest::Approx(2.5 / 4.0));
  }
}

TEST_CASE("fractional index needs a field vanishing near the boundary") {
  const GridSpec g = build_grid(3, 12);
  const ScalarField one = sample(g, [](const double*) { return cd(1.0); });
  CHECK_THROWS_AS(sobolev_norm(one, 0.5), Error);
  try {
    sobolev_norm(one, 0.5);
  } catch (const Error& e) {
    CHECK(std::string(e.what()).find("zero-extension invalid") != std::string::npos);
  }
  CHECK_NOTHROW(sobolev_norm(one, 1.0));
  CHECK_THROWS_AS(box_sobolev_norm(embed(one, make_box(g)), 9.0), Error);
  CHECK(norm(one, SobolevIndex{0.0, {}}) == doctest::Approx(l2_norm(one)));
  CHECK_THROWS_AS(norm(one, SobolevIndex{2.0, 0.1}), Error);
}

TEST_CASE("semiclassical H1 of a plane wave") {
  const GridSpec g = build_grid(3, 20);
  const ScalarField f = sample(g, [](const double* x) { return cd(std::sin(pi * x[0])); });
  const double h = 0.1;
  double expect = std::pow(l2_norm(f), 2) + h * h * std::pow(l2_norm(partial(f, 0)), 2);
  CHECK(h1_scl_norm(f, h) == doctest::Approx(std::sqrt(expect)).epsilon(1e-13));
}

TEST_CASE("sine basis on a face window") {
  const GridSpec g = build_grid(3, 16);
  const auto patch = make_patch(g, Face{0, 0}, {{0.0, 1.0}, {0.0, 0.5}});
  const SineBasis b = make_sine_basis(g, patch.faces[0], 4);
  CHECK(b.size() == 16u);
  CHECK(b.nodes.size() == patch.faces[0].node_count());

  // a single mode has norm (1 + lambda)^(t/2)
  std::vector<cd> c(b.size(), 0.0);
  c[5] = 1.0;
  ScalarField tr(g);
  synthesize(b, c, tr);
  const auto back = project(b, tr);
  for (std::size_t m = 0; m < b.size(); ++m) CHECK(std::abs(back[m] - c[m]) < 1e-12);
  CHECK(boundary_norm(back, b, 2.5) == doctest::Approx(std::pow(1.0 + b.eigenvalues[5], 1.25)).epsilon(1e-12));

  // brute force against direct eigenvalue evaluation on random traces
  std::mt19937 rng(9);
  std::normal_distribution<double> G;
  for (std::size_t k : b.nodes) tr.v[k] = cd(G(rng), G(rng));
  const auto coef = project(b, tr);
  double acc = 0.0;
  for (std::size_t m = 0; m < b.size(); ++m) {
    double lam = 0.0;
    for (int d = 0; d < 2; ++d) {
      const double M = b.count[d] + 1;
      lam += 4.0 * std::pow(std::sin(pi * b.modes[m][d] / (2.0 * M)), 2) / (g.spacing * g.spacing);
    }
    acc += std::pow(1.0 + lam, 0.5) * std::norm(coef[m]);
  }
  CHECK(boundary_norm(coef, b, 0.5) == doctest::Approx(std::sqrt(acc)).epsilon(1e-12));

  std::vector<cd> wrong(3, 0.0);
  CHECK_THROWS_AS(boundary_norm(wrong, b, 0.5), Error);
  const std::vector<std::vector<cd>> two{coef, coef};
  CHECK(boundary_norm(two, {&b, &b}, 0.5) == doctest::Approx(2.0 * std::sqrt(acc)));
}

TEST_CASE("FFT round trip") {
  std::mt19937 rng(2);
  std::normal_distribution<double> G;
  const int n = 3, M = 10;
  std::vector<cd> a(M * M * M);
  for (auto& z : a) z = cd(G(rng), G(rng));
  auto b = a;
  fft_forward(b, n, M);
  fft_backward(b, n, M);
  for (std::size_t i = 0; i < a.size(); ++i) CHECK(std::abs(b[i] / double(M * M * M) - a[i]) < 1e-12);
}
