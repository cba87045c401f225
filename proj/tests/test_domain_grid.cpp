#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <random>

#include "bh/error.hpp"
#include "bh/grid.hpp"

using namespace bh;

TEST_CASE("build_grid spacing and node count") {
  const GridSpec g = build_grid(3, 16);
  CHECK(g.spacing == doctest::Approx(1.0 / 17.0).epsilon(1e-15));
  CHECK(std::abs(g.spacing * (g.N + 1) - g.box_side) <= 1e-15);
  CHECK(g.coord(1) == doctest::Approx(1.0 / 17.0));

  const GridSpec h = build_grid(3, 31);
  CHECK(h.interior_size() == 29791u);
  CHECK(h.padded_size() == 33u * 33u * 33u);
  CHECK(h.ring().size() + h.interior_size() == h.padded_size());
}

TEST_CASE("build_grid rejects low dimension and coarse grids") {
  CHECK_THROWS_AS(build_grid(2, 16), Error);
  try {
    build_grid(2, 16);
  } catch (const Error& e) {
    CHECK(std::string(e.what()).find("dimension below model hypothesis") != std::string::npos);
    CHECK(e.code() == ErrorCode::precondition);
  }
  CHECK_THROWS_AS(build_grid(3, 7), Error);
  CHECK_NOTHROW(build_grid(4, 8));
}

TEST_CASE("make_patch counts") {
  for (int N : {16, 24, 31}) {
    const GridSpec g = build_grid(3, N);
    const auto full = make_patch(g, Face{0, 0}, {{0.0, 1.0}, {0.0, 1.0}});
    CHECK(full.node_count() == static_cast<std::size_t>(N * N));
    const auto quarter = make_patch(g, Face{0, 1}, {{0.0, 0.5}, {0.0, 0.5}});
    CHECK(quarter.node_count() == static_cast<std::size_t>((N / 2) * (N / 2)));
    const auto upper = make_patch(g, Face{1, 1}, {{0.0, 1.0}, {0.5, 1.0}});
    CHECK(upper.node_count() == static_cast<std::size_t>(N * (N / 2)));
  }
  const GridSpec g = build_grid(3, 16);
  CHECK_THROWS_AS(make_patch(g, Face{0, 1}, {{0.5, 1.5}, {0.0, 0.5}}), Error);
  CHECK_THROWS_AS(make_patch(g, Face{0, 1}, {{0.3, 0.3}, {0.0, 0.5}}), Error);
  CHECK_THROWS_AS(make_patch(g, Face{0, 1}, {{0.30, 0.31}, {0.0, 0.5}}), Error); // no node inside
  CHECK_THROWS_AS(make_patch(g, Face{3, 0}, {{0.0, 1.0}, {0.0, 1.0}}), Error);
}

TEST_CASE("make_patch is idempotent") {
  const GridSpec g = build_grid(3, 20);
  const auto a = make_patch(g, Face{2, 0}, {{0.1, 0.7}, {0.2, 0.9}});
  const auto b = make_patch(g, Face{2, 0}, {{0.1, 0.7}, {0.2, 0.9}});
  CHECK(a.faces[0].mask == b.faces[0].mask);
  CHECK(a.faces[0].first == b.faces[0].first);
}

TEST_CASE("neighborhood chain nesting") {
  const GridSpec g = build_grid(3, 31);
  const auto c = make_neighborhoods(g, 0.20, 0.15, 0.10, 0.05);
  std::size_t shell = 0;
  for (std::size_t k = 0; k < g.padded_size(); ++k) {
    for (int j = 1; j < 4; ++j)
      if (c.masks[j][k]) CHECK(c.masks[j - 1][k]);
    if (c.masks[2][k] && !c.masks[3][k] && g.is_interior(k)) ++shell;
  }
  CHECK(shell > 0);
  CHECK_THROWS_AS(make_neighborhoods(g, 0.1, 0.1, 0.05, 0.02), Error);
  try {
    make_neighborhoods(g, 0.1, 0.1, 0.05, 0.02);
  } catch (const Error& e) {
    CHECK(std::string(e.what()).find("not strictly decreasing") != std::string::npos);
  }
}

TEST_CASE("neighborhood widths must clear the stencil") {
  const GridSpec g = build_grid(3, 16);
  CHECK_THROWS_AS(make_neighborhoods(g, 0.4, 0.3, 0.2, 0.05), Error); // 0.05 < 1/17
  CHECK_NOTHROW(make_neighborhoods(build_grid(3, 24), 0.20, 0.15, 0.10, 0.05));
}

TEST_CASE("cutoff plateaus are exact") {
  const GridSpec g = build_grid(3, 31);
  const auto chain = make_neighborhoods(g, 0.20, 0.15, 0.10, 0.05);
  const Cutoff chi = make_cutoff(g, {CutoffRegion::deep, 0.10}, {CutoffRegion::shell, 0.05});
  for (std::size_t k = 0; k < g.padded_size(); ++k) {
    CHECK(chi.values[k] >= 0.0);
    CHECK(chi.values[k] <= 1.0);
    if (!chain.masks[2][k]) CHECK(chi.values[k] == 1.0);
    if (chain.masks[3][k]) CHECK(chi.values[k] == 0.0);
  }
  // multiplying a coefficient difference supported off omega_0 leaves it unchanged
  std::mt19937 rng(3);
  std::uniform_real_distribution<double> U(-1, 1);
  for (std::size_t k = 0; k < g.padded_size(); ++k) {
    const double diff = chain.masks[0][k] ? 0.0 : U(rng);
    CHECK(chi.values[k] * diff == diff);
  }
}

TEST_CASE("cutoff errors and shell orientation") {
  const GridSpec g = build_grid(3, 31);
  CHECK_THROWS_AS(make_cutoff(g, {CutoffRegion::deep, 0.05}, {CutoffRegion::shell, 0.10}), Error);
  CHECK_THROWS_AS(make_cutoff(g, {CutoffRegion::deep, 0.06}, {CutoffRegion::shell, 0.05}), Error); // no ramp node
  CHECK_NOTHROW(make_cutoff(build_grid(3, 24), {CutoffRegion::deep, 0.10}, {CutoffRegion::shell, 0.05}));
  CHECK_THROWS_AS(make_cutoff(g, {CutoffRegion::deep, 0.0}, {CutoffRegion::shell, 0.0}), Error);
  CHECK_NOTHROW(make_cutoff(g, {CutoffRegion::deep, 0.0}, {CutoffRegion::shell, 0.0}, true));
  const Cutoff theta = make_cutoff(g, {CutoffRegion::shell, 0.20}, {CutoffRegion::deep, 0.30});
  for (std::size_t k = 0; k < g.padded_size(); ++k) {
    CHECK(theta.values[k] >= 0.0);
    CHECK(theta.values[k] <= 1.0);
    if (g.dist(k) < 0.20) CHECK(theta.values[k] == 1.0);
  }
}

TEST_CASE("cutoff gradient is bounded by the ramp width") {
  const GridSpec g = build_grid(3, 31);
  const double a = 0.10, b = 0.05;
  const Cutoff chi = make_cutoff(g, {CutoffRegion::deep, a}, {CutoffRegion::shell, b});
  double worst = 0.0;
  for (std::size_t k : g.interior())
    for (int d = 0; d < g.n; ++d) {
      const double diff = (chi.values[k + g.stride(d)] - chi.values[k - g.stride(d)]) / (2 * g.spacing);
      worst = std::max(worst, std::abs(diff));
    }
  CHECK(worst <= 2.0 / (a - b));
}

TEST_CASE("smoothstep profile") {
  CHECK(smoothstep5(0.0) == 0.0);
  CHECK(smoothstep5(1.0) == 1.0);
  CHECK(smoothstep5(0.5) == doctest::Approx(0.5));
  CHECK(smoothstep5(-3.0) == 0.0);
  CHECK(smoothstep5(7.0) == 1.0);
}
