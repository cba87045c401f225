#pragma once

#include <array>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <utility>
#include <vector>

namespace bh {

using cd = std::complex<double>;

// Unit cube (0,1)^n sampled with N interior points per axis. Storage is padded:
// index 0 and N+1 along each axis are boundary nodes, 1..N are interior.
struct GridSpec {
  int n = 0;
  int N = 0;
  double spacing = 0.0;
  double box_origin = 0.0;
  double box_side = 1.0;

  int P() const { return N + 2; }
  std::size_t padded_size() const { return padded_size_; }
  std::size_t interior_size() const { return interior_->size(); }
  std::size_t stride(int d) const { return strides_[d]; }
  const std::vector<std::size_t>& interior() const { return *interior_; }
  const std::vector<std::size_t>& ring() const { return *ring_; }
  double coord(int i) const { return box_origin + i * spacing; }
  void unflatten(std::size_t flat, int* idx) const;
  std::size_t flatten(const int* idx) const;
  // L-infinity distance to the cube boundary
  double dist(std::size_t flat) const;
  bool is_interior(std::size_t flat) const;

  bool operator==(const GridSpec& o) const { return n == o.n && N == o.N; }
  bool operator!=(const GridSpec& o) const { return !(*this == o); }

  std::vector<std::size_t> strides_;
  std::size_t padded_size_ = 0;
  std::shared_ptr<const std::vector<std::size_t>> interior_;
  std::shared_ptr<const std::vector<std::size_t>> ring_;
};

GridSpec build_grid(int n, int N);

struct Face {
  int axis = 0;
  int side = 0; // 0: x_axis = 0, 1: x_axis = 1
  bool operator==(const Face& o) const { return axis == o.axis && side == o.side; }
};

// Outward normal sign along the face axis.
inline double normal_sign(const Face& f) { return f.side == 0 ? -1.0 : 1.0; }

// Padded flat indices of the N^(n-1) face nodes, tangential axes ascending, last fastest.
std::vector<std::size_t> face_nodes(const GridSpec& g, const Face& f);

struct FaceWindow {
  Face face;
  std::vector<double> lo, hi;  // window in face coordinates (n-1 intervals)
  std::vector<int> first;      // first padded node index per tangential axis
  std::vector<int> count;      // node count per tangential axis
  std::vector<std::uint8_t> mask; // per face node, same order as face_nodes
  std::size_t node_count() const;
};

struct BoundaryPatch {
  std::vector<FaceWindow> faces;
  std::size_t node_count() const;
};

BoundaryPatch make_patch(const GridSpec& g, const Face& face,
                         const std::vector<std::pair<double, double>>& window);

struct NeighborhoodChain {
  std::array<double, 4> widths{};
  std::array<std::vector<std::uint8_t>, 4> masks; // padded, true iff dist < w_j
};

NeighborhoodChain make_neighborhoods(const GridSpec& g, double w0, double w1, double w2, double w3);

struct CutoffRegion {
  enum Kind { deep, shell };
  Kind kind = deep;
  double d = 0.0; // deep: dist >= d, shell: dist < d
};

struct Cutoff {
  std::vector<double> values; // padded
  double inner_width = 0.0;
  double outer_width = 0.0;
};

double smoothstep5(double t);

Cutoff make_cutoff(const GridSpec& g, CutoffRegion one, CutoffRegion zero, bool allow_trivial = false);

} // namespace bh
