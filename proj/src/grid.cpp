#include "bh/grid.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "bh/error.hpp"

namespace bh {

GridSpec build_grid(int n, int N) {
  if (n < 3) fail(ErrorCode::precondition, "dimension below model hypothesis (n >= 3 required)");
  if (n > 8) fail(ErrorCode::invalid_argument, "dimension above supported maximum of 8");
  if (N < 8) fail(ErrorCode::precondition, "N must be at least 8 interior points per axis");
  GridSpec g;
  g.n = n;
  g.N = N;
  g.spacing = 1.0 / (N + 1);
  g.strides_.assign(n, 1);
  for (int d = n - 2; d >= 0; --d) g.strides_[d] = g.strides_[d + 1] * static_cast<std::size_t>(N + 2);
  g.padded_size_ = g.strides_[0] * static_cast<std::size_t>(N + 2);

  auto inner = std::make_shared<std::vector<std::size_t>>();
  std::size_t count = 1;
  for (int d = 0; d < n; ++d) count *= static_cast<std::size_t>(N);
  inner->reserve(count);
  std::vector<int> idx(n, 1);
  while (true) {
    std::size_t f = 0;
    for (int d = 0; d < n; ++d) f += idx[d] * g.strides_[d];
    inner->push_back(f);
    int d = n - 1;
    while (d >= 0 && ++idx[d] > N) idx[d--] = 1;
    if (d < 0) break;
  }
  g.interior_ = inner;
  auto ring = std::make_shared<std::vector<std::size_t>>();
  for (std::size_t f = 0; f < g.padded_size_; ++f)
    if (!g.is_interior(f)) ring->push_back(f);
  g.ring_ = ring;
  return g;
}

void GridSpec::unflatten(std::size_t flat, int* idx) const {
  for (int d = 0; d < n; ++d) {
    idx[d] = static_cast<int>(flat / strides_[d]);
    flat %= strides_[d];
  }
}

std::size_t GridSpec::flatten(const int* idx) const {
  std::size_t f = 0;
  for (int d = 0; d < n; ++d) f += idx[d] * strides_[d];
  return f;
}

double GridSpec::dist(std::size_t flat) const {
  int idx[16];
  unflatten(flat, idx);
  int m = N + 1;
  for (int d = 0; d < n; ++d) m = std::min({m, idx[d], N + 1 - idx[d]});
  return m * spacing;
}

bool GridSpec::is_interior(std::size_t flat) const {
  int idx[16];
  unflatten(flat, idx);
  for (int d = 0; d < n; ++d)
    if (idx[d] < 1 || idx[d] > N) return false;
  return true;
}

std::vector<std::size_t> face_nodes(const GridSpec& g, const Face& f) {
  if (f.axis < 0 || f.axis >= g.n || (f.side != 0 && f.side != 1))
    fail(ErrorCode::invalid_argument, "face identifier out of range");
  std::vector<std::size_t> out;
  std::vector<int> idx(g.n, 1);
  idx[f.axis] = f.side == 0 ? 0 : g.N + 1;
  while (true) {
    out.push_back(g.flatten(idx.data()));
    int d = g.n - 1;
    while (d >= 0) {
      if (d == f.axis) { --d; continue; }
      if (++idx[d] <= g.N) break;
      idx[d--] = 1;
    }
    if (d < 0) break;
  }
  return out;
}

std::size_t FaceWindow::node_count() const {
  std::size_t c = 0;
  for (auto m : mask) c += m;
  return c;
}

std::size_t BoundaryPatch::node_count() const {
  std::size_t c = 0;
  for (const auto& f : faces) c += f.node_count();
  return c;
}

BoundaryPatch make_patch(const GridSpec& g, const Face& face,
                         const std::vector<std::pair<double, double>>& window) {
  if (face.axis < 0 || face.axis >= g.n || (face.side != 0 && face.side != 1))
    fail(ErrorCode::invalid_argument, "face identifier out of range");
  if (static_cast<int>(window.size()) != g.n - 1)
    fail(ErrorCode::invalid_argument, "patch window needs one interval per tangential axis");
  FaceWindow fw;
  fw.face = face;
  for (const auto& [lo, hi] : window) {
    if (!(lo < hi)) fail(ErrorCode::invalid_argument, "empty patch window");
    if (lo < 0.0 || hi > 1.0) fail(ErrorCode::invalid_argument, "patch window outside face bounds");
    // open window: lo < x < hi
    int first = static_cast<int>(std::floor(lo / g.spacing)) + 1;
    while (first * g.spacing <= lo) ++first;
    first = std::max(first, 1);
    int last = static_cast<int>(std::ceil(hi / g.spacing)) - 1;
    while (last * g.spacing >= hi) --last;
    last = std::min(last, g.N);
    if (last < first) fail(ErrorCode::invalid_argument, "patch window contains no grid nodes");
    fw.lo.push_back(lo);
    fw.hi.push_back(hi);
    fw.first.push_back(first);
    fw.count.push_back(last - first + 1);
  }
  const auto nodes = face_nodes(g, face);
  fw.mask.assign(nodes.size(), 0);
  std::vector<int> idx(g.n);
  for (std::size_t k = 0; k < nodes.size(); ++k) {
    g.unflatten(nodes[k], idx.data());
    bool in = true;
    int t = 0;
    for (int d = 0; d < g.n; ++d) {
      if (d == face.axis) continue;
      in = in && idx[d] >= fw.first[t] && idx[d] < fw.first[t] + fw.count[t];
      ++t;
    }
    fw.mask[k] = in ? 1 : 0;
  }
  BoundaryPatch p;
  p.faces.push_back(std::move(fw));
  return p;
}

NeighborhoodChain make_neighborhoods(const GridSpec& g, double w0, double w1, double w2, double w3) {
  if (!(w0 > w1 && w1 > w2 && w2 > w3)) fail(ErrorCode::invalid_argument, "neighborhood widths not strictly decreasing");
  if (!(w3 > g.spacing)) fail(ErrorCode::invalid_argument, "neighborhood widths too small for the grid");
  if (w0 >= 0.5) fail(ErrorCode::invalid_argument, "outer neighborhood covers the whole cube");
  NeighborhoodChain c;
  c.widths = {w0, w1, w2, w3};
  for (int j = 0; j < 4; ++j) c.masks[j].assign(g.padded_size(), 0);
  for (std::size_t f = 0; f < g.padded_size(); ++f) {
    const double d = g.dist(f);
    for (int j = 0; j < 4; ++j) c.masks[j][f] = d < c.widths[j] ? 1 : 0;
  }
  for (int j = 1; j < 4; ++j) {
    std::size_t layer = 0;
    for (std::size_t f = 0; f < g.padded_size(); ++f) {
      if (c.masks[j][f] && !c.masks[j - 1][f]) fail(ErrorCode::internal, "neighborhood nesting violated");
      if (c.masks[j - 1][f] && !c.masks[j][f]) ++layer;
    }
    if (layer == 0) {
      std::ostringstream os;
      os << "no grid layer between neighborhoods " << j - 1 << " and " << j;
      fail(ErrorCode::invalid_argument, os.str());
    }
  }
  return c;
}

double smoothstep5(double t) {
  if (t <= 0.0) return 0.0;
  if (t >= 1.0) return 1.0;
  return t * t * t * (t * (6.0 * t - 15.0) + 10.0);
}

Cutoff make_cutoff(const GridSpec& g, CutoffRegion one, CutoffRegion zero, bool allow_trivial) {
  const bool zero_empty = (zero.kind == CutoffRegion::shell && zero.d <= 0.0) ||
                          (zero.kind == CutoffRegion::deep && zero.d > 0.5);
  Cutoff c;
  c.values.assign(g.padded_size(), 1.0);
  if (zero_empty) {
    if (!allow_trivial) fail(ErrorCode::invalid_argument, "cutoff with empty zero region is only allowed in test mode");
    return c;
  }
  if (one.kind == zero.kind) fail(ErrorCode::invalid_argument, "cutoff regions overlap");
  double a = one.d, b = zero.d;
  const bool rising = one.kind == CutoffRegion::deep; // 0 near the boundary, 1 deep inside
  if (rising ? !(b < a) : !(a < b)) fail(ErrorCode::invalid_argument, "cutoff regions overlap");
  const double gap = std::abs(a - b);
  // the ramp must hold at least one node level strictly between the plateaus,
  // so the transition spans three layers counting the two plateau edges
  bool ramp_node = false;
  for (int i = 0; i <= g.N / 2 + 1 && !ramp_node; ++i) {
    const double d = i * g.spacing;
    ramp_node = d >= std::min(a, b) && d < std::max(a, b) && smoothstep5((rising ? d - b : b - d) / gap) > 0.0 &&
                smoothstep5((rising ? d - b : b - d) / gap) < 1.0;
  }
  if (!ramp_node) fail(ErrorCode::invalid_argument, "cutoff transition narrower than 3 grid layers");
  c.inner_width = std::min(a, b);
  c.outer_width = std::max(a, b);
  for (std::size_t f = 0; f < g.padded_size(); ++f) {
    const double d = g.dist(f);
    const double t = rising ? (d - b) / gap : (b - d) / gap;
    c.values[f] = smoothstep5(t);
  }
  return c;
}

} // namespace bh
