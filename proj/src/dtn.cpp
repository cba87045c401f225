#include "bh/dtn.hpp"

#include <cmath>
#include <cstring>
#include <fstream>
#include <random>
#include <string>

#include "bh/error.hpp"
#include "bh/parallel.hpp"

namespace bh {

BoundaryBasis make_boundary_basis(const GridSpec& g, const BoundaryPatch& gamma1, int modes_per_axis) {
  BoundaryBasis b;
  for (const auto& w : gamma1.faces) b.faces.push_back(make_sine_basis(g, w, modes_per_axis));
  for (int slot = 0; slot < 2; ++slot)
    for (std::size_t f = 0; f < b.faces.size(); ++f)
      for (std::size_t m = 0; m < b.faces[f].size(); ++m)
        b.entries.push_back({slot, static_cast<int>(f), static_cast<int>(m)});
  return b;
}

void basis_entry_data(const BoundaryBasis& b, std::size_t j, ScalarField& f, ScalarField& g) {
  const auto& e = b.entries.at(j);
  const SineBasis& sb = b.faces[e.face];
  std::vector<cd> c(sb.size(), 0.0);
  c[e.mode] = 1.0;
  synthesize(sb, c, e.slot == 0 ? f : g);
}

std::vector<cd> normal_derivative(const ScalarField& f, const Face& face, const std::vector<std::size_t>& nodes) {
  const GridSpec& g = f.grid;
  const std::size_t s = g.stride(face.axis);
  const double inv2h = 1.0 / (2.0 * g.spacing);
  std::vector<cd> out(nodes.size());
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    const std::size_t r = nodes[i];
    const std::size_t a1 = face.side == 0 ? r + s : r - s;
    const std::size_t a2 = face.side == 0 ? r + 2 * s : r - 2 * s;
    out[i] = (3.0 * f.v[r] - 4.0 * f.v[a1] + f.v[a2]) * inv2h;
  }
  return out;
}

namespace {

std::vector<cd> face_coefficients(const SineBasis& b, const ScalarField& field) {
  const std::vector<cd> dn = normal_derivative(field, b.face, b.nodes);
  ScalarField tmp(field.grid);
  for (std::size_t i = 0; i < b.nodes.size(); ++i) tmp.v[b.nodes[i]] = dn[i];
  return project(b, tmp);
}

double sobolev_weight(double lambda, double t) { return std::pow(1.0 + lambda, 0.5 * t); }

} // namespace

PartialDtnMatrix assemble_dtn(const CoefficientSet& c, const BoundaryBasis& basis, const std::vector<SineBasis>& gamma2,
                              const DtnOptions& opt) {
  const GridSpec& g = c.grid();
  std::size_t rows = 0;
  for (const auto& b : gamma2) rows += 2 * b.size();
  const std::size_t cols = basis.count();
  if (rows == 0 || cols == 0) fail(ErrorCode::invalid_argument, "empty boundary basis");

  PartialDtnMatrix m;
  m.matrix = Eigen::MatrixXcd::Zero(static_cast<long>(rows), static_cast<long>(cols));
  m.weights_in.resize(static_cast<long>(cols));
  m.weights_out.resize(static_cast<long>(rows));
  m.column_residuals.assign(cols, 0.0);
  for (std::size_t j = 0; j < cols; ++j) {
    const auto& e = basis.entries[j];
    m.weights_in[static_cast<long>(j)] = sobolev_weight(basis.faces[e.face].eigenvalues[e.mode], e.slot == 0 ? 3.5 : 1.5);
  }
  std::size_t r = 0;
  for (const auto& b : gamma2) {
    for (std::size_t k = 0; k < b.size(); ++k) m.weights_out[static_cast<long>(r + k)] = sobolev_weight(b.eigenvalues[k], 2.5);
    for (std::size_t k = 0; k < b.size(); ++k)
      m.weights_out[static_cast<long>(r + b.size() + k)] = sobolev_weight(b.eigenvalues[k], 0.5);
    r += 2 * b.size();
  }

  parallel_for(cols, opt.threads, [&](std::size_t j) {
    NavierProblem p{c, ScalarField(g), ScalarField(g), ScalarField(g)};
    basis_entry_data(basis, j, p.f, p.g);
    const NavierSolution s = solve_navier(p, opt.solver);
    if (s.report.condition_flag != ConditionFlag::ok)
      fail(ErrorCode::near_singular, "Navier solve near-singular for DtN column " + std::to_string(j) +
                                         " (residual " + std::to_string(s.report.residual) + ")");
    m.column_residuals[j] = s.report.residual;
    std::size_t row = 0;
    for (const auto& b : gamma2) {
      const auto cu = face_coefficients(b, s.u);
      const auto cl = face_coefficients(b, s.lap);
      for (std::size_t k = 0; k < b.size(); ++k) {
        m.matrix(static_cast<long>(row + k), static_cast<long>(j)) = cu[k];
        m.matrix(static_cast<long>(row + b.size() + k), static_cast<long>(j)) = cl[k];
      }
      row += 2 * b.size();
    }
  });
  return m;
}

double weighted_operator_norm(const Eigen::MatrixXcd& D, const Eigen::VectorXd& w_in, const Eigen::VectorXd& w_out,
                              double tol, int max_iter) {
  if (D.cols() != w_in.size() || D.rows() != w_out.size())
    fail(ErrorCode::invalid_argument, "weight vectors do not match the matrix shape");
  for (long i = 0; i < w_in.size(); ++i)
    if (!(w_in[i] > 0.0)) fail(ErrorCode::invalid_argument, "input weights must be positive");
  const Eigen::MatrixXcd B = w_out.asDiagonal() * D * w_in.cwiseInverse().asDiagonal();
  if (B.norm() == 0.0) return 0.0;
  std::mt19937_64 rng(0x5eedULL);
  std::normal_distribution<double> G;
  Eigen::VectorXcd x(B.cols());
  for (long i = 0; i < x.size(); ++i) x[i] = cd(G(rng), G(rng));
  x.normalize();
  double lam = 0.0;
  for (int it = 0; it < max_iter; ++it) {
    Eigen::VectorXcd y = B.adjoint() * (B * x);
    const double next = std::real(x.dot(y));
    const double ny = y.norm();
    if (ny == 0.0) return 0.0;
    x = y / ny;
    if (it > 0 && std::abs(next - lam) <= tol * next) {
      lam = next;
      break;
    }
    lam = next;
  }
  return std::sqrt(std::max(lam, 0.0));
}

double dtn_difference_norm(const PartialDtnMatrix& a, const PartialDtnMatrix& b) {
  if (a.matrix.rows() != b.matrix.rows() || a.matrix.cols() != b.matrix.cols())
    fail(ErrorCode::invalid_argument, "DtN matrices have different shapes");
  if (a.weights_in != b.weights_in || a.weights_out != b.weights_out)
    fail(ErrorCode::invalid_argument, "DtN matrices have different weights");
  return weighted_operator_norm(a.matrix - b.matrix, a.weights_in, a.weights_out);
}

namespace {

const char kDtnMagic[6] = {'B', 'H', 'D', 'T', 'N', '1'};

template <class T>
void put(std::ofstream& o, const T& v) {
  o.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <class T>
T get(std::ifstream& in) {
  T v{};
  in.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!in) fail(ErrorCode::io, "truncated DtN file");
  return v;
}

} // namespace

void write_dtn(const std::string& path, const PartialDtnMatrix& m) {
  std::ofstream o(path, std::ios::binary);
  if (!o) fail(ErrorCode::io, "cannot open " + path + " for writing");
  o.write(kDtnMagic, 6);
  put<std::uint64_t>(o, static_cast<std::uint64_t>(m.matrix.rows()));
  put<std::uint64_t>(o, static_cast<std::uint64_t>(m.matrix.cols()));
  for (long i = 0; i < m.weights_in.size(); ++i) put<double>(o, m.weights_in[i]);
  for (long i = 0; i < m.weights_out.size(); ++i) put<double>(o, m.weights_out[i]);
  for (long j = 0; j < m.matrix.cols(); ++j)
    for (long i = 0; i < m.matrix.rows(); ++i) {
      put<double>(o, m.matrix(i, j).real());
      put<double>(o, m.matrix(i, j).imag());
    }
  if (!o) fail(ErrorCode::io, "write failed for " + path);
}

PartialDtnMatrix read_dtn(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::io, "cannot open " + path);
  char magic[6];
  in.read(magic, 6);
  if (!in || std::memcmp(magic, kDtnMagic, 6) != 0) fail(ErrorCode::parse, path + ": not a BHDTN1 file");
  const auto rows = static_cast<long>(get<std::uint64_t>(in));
  const auto cols = static_cast<long>(get<std::uint64_t>(in));
  if (rows <= 0 || cols <= 0 || rows > (1L << 20) || cols > (1L << 20)) fail(ErrorCode::parse, path + ": bad dimensions");
  PartialDtnMatrix m;
  m.weights_in.resize(cols);
  m.weights_out.resize(rows);
  for (long i = 0; i < cols; ++i) m.weights_in[i] = get<double>(in);
  for (long i = 0; i < rows; ++i) m.weights_out[i] = get<double>(in);
  m.matrix.resize(rows, cols);
  for (long j = 0; j < cols; ++j)
    for (long i = 0; i < rows; ++i) {
      const double re = get<double>(in);
      m.matrix(i, j) = cd(re, get<double>(in));
    }
  return m;
}

} // namespace bh
