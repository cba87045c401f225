#pragma once

#include <array>
#include <string>
#include <vector>

#include "bh/cgo.hpp"
#include "bh/pde.hpp"

namespace bh {

// Coefficient bump (1 - r^2/w^2)^4 for r < w. amplitude holds n entries for a
// vector coefficient and one entry for a scalar coefficient.
struct Bump {
  std::vector<double> center;
  double width = 0.2;
  std::vector<cd> amplitude;
  bool operator==(const Bump&) const = default;
};

struct PatchSpec {
  int axis = 0;
  int side = 0;
  std::vector<std::pair<double, double>> window;
  bool operator==(const PatchSpec&) const = default;
};

struct Scenario {
  std::string name = "calibration";
  int n = 3;
  int N = 24;
  double s = 4.0;
  double M = 10.0;
  PatchSpec gamma1{0, 0, {{0.0, 1.0}, {0.0, 0.5}}};
  PatchSpec gamma2{1, 1, {{0.0, 1.0}, {0.5, 1.0}}};
  std::array<double, 4> widths{0.20, 0.15, 0.10, 0.05};
  std::vector<Bump> base_A, base_q, pert_A, pert_q;
  std::vector<double> t{0.0, 0.0625, 0.125, 0.25, 0.5, 1.0};
  std::vector<double> h{0.2, 0.1, 0.05};
  double lambda = 4.0;
  int basis_modes = 8;
  double beta0 = 2.0;
  std::string mode = "with_A"; // or "A_zero"
  SolverOptions solver;
  CgoOptions cgo;
  double delta_threshold = 1.0;

  bool operator==(const Scenario& o) const;
};

// The default calibration scenario (n = 3, N = 24, s = 4, M = 10).
Scenario calibration_scenario();

// Smooth (C-infinity) step: 0 for t <= 0, 1 for t >= 1.
double smooth_ramp(double t);

// Product of smooth steps in each coordinate: zero on omega_0 (dist < w0),
// one where dist >= w0 + 0.1.
std::vector<double> omega0_complement(const GridSpec& g, double w0);

ScalarField bump_field(const GridSpec& g, const std::vector<Bump>& bumps, int component, const std::vector<double>& cutoff);

struct CoefficientPair {
  CoefficientSet c1, c2;
};

// (A1, q1) from the base bumps; (A2, q2) = base + t * perturbation. With
// a_zero both vector potentials are zero.
CoefficientPair build_pair(const Scenario& sc, const GridSpec& g, double t, bool a_zero = false);

std::vector<Scenario> load_config(const std::string& path);
std::vector<Scenario> parse_config(const std::string& text);
std::string serialize_config(const std::vector<Scenario>& scenarios);
void persist_config(const std::string& path, const std::vector<Scenario>& scenarios);

// Plain-text listing of every parameter actually used.
std::string describe(const Scenario& sc);

} // namespace bh
