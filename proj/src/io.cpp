#include "bh/io.hpp"

#include <cstdint>
#include <cstring>
#include <fstream>

#include "bh/error.hpp"

namespace bh {

namespace {

const char kMagic[6] = {'B', 'H', 'F', 'L', 'D', '1'};

template <class T>
void put(std::ofstream& o, const T& v) {
  o.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <class T>
T get(std::ifstream& in, const std::string& path) {
  T v{};
  in.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!in) fail(ErrorCode::io, path + ": truncated field file");
  return v;
}

} // namespace

void write_fields(const std::string& path, const std::vector<ScalarField>& comps) {
  if (comps.empty()) fail(ErrorCode::invalid_argument, "no field components to write");
  const GridSpec& g = comps[0].grid;
  for (const auto& c : comps)
    if (c.grid != g) fail(ErrorCode::invalid_argument, "field components live on different grids");
  std::ofstream o(path, std::ios::binary);
  if (!o) fail(ErrorCode::io, "cannot open " + path + " for writing");
  o.write(kMagic, 6);
  put<std::int32_t>(o, g.n);
  put<std::int32_t>(o, g.N);
  put<std::int32_t>(o, static_cast<std::int32_t>(comps.size()));
  put<std::uint8_t>(o, 1);
  for (const auto& c : comps)
    for (const auto& z : c.v) {
      put<double>(o, z.real());
      put<double>(o, z.imag());
    }
  if (!o) fail(ErrorCode::io, "write failed for " + path);
}

std::vector<ScalarField> read_fields(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::io, "cannot open " + path);
  char magic[6];
  in.read(magic, 6);
  if (!in || std::memcmp(magic, kMagic, 6) != 0) fail(ErrorCode::parse, path + ": not a BHFLD1 file");
  const int n = get<std::int32_t>(in, path);
  const int N = get<std::int32_t>(in, path);
  const int nc = get<std::int32_t>(in, path);
  const int cplx = get<std::uint8_t>(in, path);
  if (nc <= 0 || nc > 64) fail(ErrorCode::parse, path + ": bad component count");
  const GridSpec g = build_grid(n, N);
  std::vector<ScalarField> out(nc, ScalarField(g));
  for (auto& c : out)
    for (auto& z : c.v) {
      const double re = get<double>(in, path);
      z = cd(re, cplx ? get<double>(in, path) : 0.0);
    }
  return out;
}

void write_field(const std::string& path, const ScalarField& f) { write_fields(path, {f}); }

ScalarField read_field(const std::string& path) {
  auto v = read_fields(path);
  if (v.size() != 1) fail(ErrorCode::parse, path + ": expected a scalar field");
  return v[0];
}

void write_field(const std::string& path, const VectorField& A) { write_fields(path, A.c); }

VectorField read_vector_field(const std::string& path) {
  VectorField A;
  A.c = read_fields(path);
  if (A.dim() != A.grid().n) fail(ErrorCode::parse, path + ": component count does not match dimension");
  return A;
}

} // namespace bh
