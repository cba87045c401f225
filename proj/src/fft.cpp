#include "bh/fft.hpp"

#include <fftw3.h>

#include <cmath>
#include <map>
#include <mutex>
#include <numbers>
#include <tuple>

#include "bh/error.hpp"

namespace bh {

std::size_t BoxSpec::size() const {
  std::size_t s = 1;
  for (int d = 0; d < n; ++d) s *= static_cast<std::size_t>(M);
  return s;
}

std::size_t BoxSpec::stride(int d) const {
  std::size_t s = 1;
  for (int e = n - 1; e > d; --e) s *= static_cast<std::size_t>(M);
  return s;
}

double BoxSpec::kappa(double k) const { return 2.0 * std::numbers::pi * k / side; }

BoxSpec make_box(const GridSpec& g) {
  BoxSpec b;
  b.n = g.n;
  b.M = 2 * (g.N + 1);
  b.offset = (g.N + 1) / 2;
  b.spacing = g.spacing;
  b.side = b.M * g.spacing;
  return b;
}

BoxField embed(const ScalarField& f, const BoxSpec& box) {
  const GridSpec& g = f.grid;
  BoxField out(box);
  std::vector<int> idx(g.n);
  for (std::size_t k = 0; k < g.padded_size(); ++k) {
    g.unflatten(k, idx.data());
    std::size_t j = 0;
    for (int d = 0; d < g.n; ++d) j += static_cast<std::size_t>(idx[d] + box.offset) * box.stride(d);
    out.v[j] = f.v[k];
  }
  return out;
}

ScalarField restrict_to_cube(const BoxField& b, const GridSpec& g) {
  ScalarField out(g);
  std::vector<int> idx(g.n);
  for (std::size_t k = 0; k < g.padded_size(); ++k) {
    g.unflatten(k, idx.data());
    std::size_t j = 0;
    for (int d = 0; d < g.n; ++d) j += static_cast<std::size_t>(idx[d] + b.box.offset) * b.box.stride(d);
    out.v[k] = b.v[j];
  }
  return out;
}

namespace {

std::mutex plan_mutex;

struct PlanCache {
  std::map<std::tuple<int, int, int>, fftw_plan> plans;
  ~PlanCache() {
    for (auto& [key, p] : plans) fftw_destroy_plan(p);
  }
};

PlanCache& cache() {
  static PlanCache c;
  return c;
}

// kind: 0 forward dft, 1 backward dft, 2 dst-I
fftw_plan get_plan(int kind, int n, int M) {
  std::lock_guard<std::mutex> lock(plan_mutex);
  auto key = std::make_tuple(kind, n, M);
  auto it = cache().plans.find(key);
  if (it != cache().plans.end()) return it->second;
  std::vector<int> dims(n, M);
  std::size_t total = 1;
  for (int d = 0; d < n; ++d) total *= static_cast<std::size_t>(M);
  fftw_plan p = nullptr;
  const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
  if (kind == 2) {
    std::vector<double> buf(total);
    std::vector<fftw_r2r_kind> kinds(n, FFTW_RODFT00);
    p = fftw_plan_r2r(n, dims.data(), buf.data(), buf.data(), kinds.data(), flags);
  } else {
    std::vector<cd> buf(total);
    auto* ptr = reinterpret_cast<fftw_complex*>(buf.data());
    p = fftw_plan_dft(n, dims.data(), ptr, ptr, kind == 0 ? FFTW_FORWARD : FFTW_BACKWARD, flags);
  }
  if (!p) fail(ErrorCode::internal, "FFT planning failed");
  cache().plans[key] = p;
  return p;
}

} // namespace

void fft_forward(std::vector<cd>& data, int n, int M) {
  auto* ptr = reinterpret_cast<fftw_complex*>(data.data());
  fftw_execute_dft(get_plan(0, n, M), ptr, ptr);
}

void fft_backward(std::vector<cd>& data, int n, int M) {
  auto* ptr = reinterpret_cast<fftw_complex*>(data.data());
  fftw_execute_dft(get_plan(1, n, M), ptr, ptr);
}

void dst_all_axes(std::vector<double>& data, int n, int N) {
  fftw_execute_r2r(get_plan(2, n, N), data.data(), data.data());
}

} // namespace bh
