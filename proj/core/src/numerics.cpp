#include "meralearn/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "meralearn/errors.hpp"

namespace mera {

const Tolerances& default_tolerances() {
  static const Tolerances tol{};
  return tol;
}

double max_abs(const ComplexMatrix& m) {
  return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff();
}

double hermiticity_defect(const ComplexMatrix& h) {
  if (h.rows() != h.cols()) return std::numeric_limits<double>::infinity();
  return max_abs(h - h.adjoint());
}

double unitarity_defect(const ComplexMatrix& u) {
  if (u.rows() != u.cols()) return std::numeric_limits<double>::infinity();
  return max_abs(u.adjoint() * u - ComplexMatrix::Identity(u.rows(), u.cols()));
}

void require_hermitian(const ComplexMatrix& h, double tol, const char* who) {
  if (h.rows() != h.cols() || h.rows() == 0) {
    std::ostringstream os;
    os << who << ": expected a non-empty square matrix, got " << h.rows() << "x" << h.cols();
    throw InvalidArgument(os.str());
  }
  if (!h.allFinite()) throw InvalidArgument(std::string(who) + ": non-finite entry");
  const double defect = hermiticity_defect(h);
  if (defect > tol) {
    std::ostringstream os;
    os << who << ": matrix is not Hermitian, max|H - H^dagger| = " << defect;
    throw InvalidArgument(os.str());
  }
}

int log2_exact(std::int64_t n) {
  if (!is_power_of_two(n)) throw InvalidArgument("log2_exact: " + std::to_string(n) + " is not a power of two");
  int k = 0;
  while ((std::int64_t{1} << k) < n) ++k;
  return k;
}

namespace {

void fix_phase(Eigen::Ref<ComplexVector> v, double threshold) {
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    const double mag = std::abs(v(i));
    if (mag > threshold) {
      v *= std::conj(v(i)) / mag;
      v(i) = Complex(mag, 0.0);
      return;
    }
  }
}

// true when a should be placed before b among degenerate eigenvectors
bool vector_precedes(const ComplexVector& a, const ComplexVector& b, double tol) {
  for (Eigen::Index i = 0; i < a.size(); ++i) {
    if (std::abs(a(i).real() - b(i).real()) > tol) return a(i).real() > b(i).real();
    if (std::abs(a(i).imag() - b(i).imag()) > tol) return a(i).imag() > b(i).imag();
  }
  return false;
}

}  // namespace

EigenDecomposition eig_hermitian(const ComplexMatrix& h) {
  const auto& tol = default_tolerances();
  require_hermitian(h, tol.hermitian, "eig_hermitian");
  const ComplexMatrix sym = 0.5 * (h + h.adjoint());
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> solver(sym);
  if (solver.info() != Eigen::Success) throw Error("eig_hermitian: eigensolver did not converge");

  const Eigen::Index n = h.rows();
  std::vector<ComplexVector> vecs(static_cast<std::size_t>(n));
  std::vector<double> vals(static_cast<std::size_t>(n));
  for (Eigen::Index k = 0; k < n; ++k) {
    // Eigen sorts ascending
    vals[k] = solver.eigenvalues()(n - 1 - k);
    vecs[k] = solver.eigenvectors().col(n - 1 - k);
    fix_phase(vecs[k], tol.phase_fix);
  }

  std::vector<std::size_t> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  const double scale = std::max(1.0, std::abs(vals.front()) + std::abs(vals.back()));
  const double degenerate = tol.degeneracy * scale;
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (std::abs(vals[a] - vals[b]) > degenerate) return vals[a] > vals[b];
    return vector_precedes(vecs[a], vecs[b], 1e-12);
  });

  EigenDecomposition out;
  out.values.resize(static_cast<std::size_t>(n));
  out.vectors.resize(n, n);
  for (Eigen::Index k = 0; k < n; ++k) {
    out.values[k] = vals[order[k]];
    out.vectors.col(k) = vecs[order[k]];
  }
  return out;
}

std::vector<double> eigvals_hermitian(const ComplexMatrix& h) {
  require_hermitian(h, default_tolerances().hermitian, "eigvals_hermitian");
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> solver(h, Eigen::EigenvaluesOnly);
  std::vector<double> vals(static_cast<std::size_t>(h.rows()));
  for (Eigen::Index k = 0; k < h.rows(); ++k) vals[k] = solver.eigenvalues()(h.rows() - 1 - k);
  return vals;
}

ComplexMatrix expm_hermitian(const ComplexMatrix& h, double t) {
  require_hermitian(h, default_tolerances().hermitian, "expm_hermitian");
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> solver(0.5 * (h + h.adjoint()));
  const auto& v = solver.eigenvectors();
  ComplexVector phases(h.rows());
  for (Eigen::Index k = 0; k < h.rows(); ++k) phases(k) = std::polar(1.0, -t * solver.eigenvalues()(k));
  return v * phases.asDiagonal() * v.adjoint();
}

ComplexMatrix partial_trace(const ComplexMatrix& rho, int qubit_count, std::span<const int> keep) {
  if (qubit_count < 1 || qubit_count > 24) throw InvalidArgument("partial_trace: qubit_count out of range");
  const Eigen::Index dim = Eigen::Index{1} << qubit_count;
  if (rho.rows() != dim || rho.cols() != dim) throw InvalidArgument("partial_trace: matrix is not 2^q x 2^q");
  if (keep.empty()) throw InvalidArgument("partial_trace: keep set is empty");

  std::vector<int> kept(keep.begin(), keep.end());
  std::sort(kept.begin(), kept.end());
  if (std::adjacent_find(kept.begin(), kept.end()) != kept.end())
    throw InvalidArgument("partial_trace: duplicate qubit in keep set");
  if (kept.front() < 1 || kept.back() > qubit_count) throw InvalidArgument("partial_trace: qubit label out of range");

  // qubit label q (1-based) sits at bit position qubit_count - q
  std::vector<int> kept_bits, traced_bits;
  for (int q = 1; q <= qubit_count; ++q) {
    const int bit = qubit_count - q;
    if (std::binary_search(kept.begin(), kept.end(), q)) kept_bits.push_back(bit);
    else traced_bits.push_back(bit);
  }
  const int k = static_cast<int>(kept_bits.size());
  const int r = static_cast<int>(traced_bits.size());

  auto scatter = [](std::uint64_t value, const std::vector<int>& bits) {
    // bits are listed most significant first
    std::uint64_t out = 0;
    const int m = static_cast<int>(bits.size());
    for (int i = 0; i < m; ++i)
      if (value >> (m - 1 - i) & 1u) out |= std::uint64_t{1} << bits[i];
    return out;
  };

  std::vector<std::uint64_t> kept_offsets(std::size_t{1} << k), traced_offsets(std::size_t{1} << r);
  for (std::uint64_t a = 0; a < kept_offsets.size(); ++a) kept_offsets[a] = scatter(a, kept_bits);
  for (std::uint64_t e = 0; e < traced_offsets.size(); ++e) traced_offsets[e] = scatter(e, traced_bits);

  const Eigen::Index out_dim = Eigen::Index{1} << k;
  ComplexMatrix out = ComplexMatrix::Zero(out_dim, out_dim);
  for (Eigen::Index a = 0; a < out_dim; ++a)
    for (Eigen::Index b = 0; b < out_dim; ++b) {
      Complex acc = 0.0;
      for (auto e : traced_offsets)
        acc += rho(static_cast<Eigen::Index>(kept_offsets[a] | e), static_cast<Eigen::Index>(kept_offsets[b] | e));
      out(a, b) = acc;
    }
  return out;
}

ComplexMatrix haar_unitary(int dim, Rng& rng) {
  if (dim < 2) throw InvalidArgument("haar_unitary: dimension must be at least 2");
  std::normal_distribution<double> normal(0.0, 1.0);
  ComplexMatrix z(dim, dim);
  for (int j = 0; j < dim; ++j)
    for (int i = 0; i < dim; ++i) {
      const double re = normal(rng);
      const double im = normal(rng);
      z(i, j) = Complex(re, im) / std::sqrt(2.0);
    }
  Eigen::HouseholderQR<ComplexMatrix> qr(z);
  ComplexMatrix q = qr.householderQ();
  const ComplexMatrix r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (int k = 0; k < dim; ++k) {
    const double mag = std::abs(r(k, k));
    if (mag > 0.0) q.col(k) *= r(k, k) / mag;
  }
  // one Gram-Schmidt pass brings unitarity to machine precision
  for (int k = 0; k < dim; ++k) {
    for (int l = 0; l < k; ++l) q.col(k) -= q.col(l).dot(q.col(k)) * q.col(l);
    q.col(k).normalize();
  }
  return q;
}

std::vector<ComplexMatrix> pauli_basis(int k) {
  if (k < 1 || k > 4) throw InvalidArgument("pauli_basis: k must be in [1, 4]");
  const std::array<Matrix2c, 4> single = [] {
    std::array<Matrix2c, 4> p;
    p[0] << 1, 0, 0, 1;
    p[1] << 0, 1, 1, 0;
    p[2] << 0, Complex(0, -1), Complex(0, 1), 0;
    p[3] << 1, 0, 0, -1;
    return p;
  }();
  std::vector<ComplexMatrix> out;
  const std::size_t count = std::size_t{1} << (2 * k);
  out.reserve(count);
  for (std::size_t idx = 0; idx < count; ++idx) {
    ComplexMatrix m = ComplexMatrix::Identity(1, 1);
    for (int q = 0; q < k; ++q) {
      const std::size_t letter = (idx >> (2 * (k - 1 - q))) & 3u;
      m = kron(m, single[letter]);
    }
    out.push_back(std::move(m));
  }
  return out;
}

ComplexMatrix psd_project(const ComplexMatrix& rho_hat) {
  require_hermitian(rho_hat, default_tolerances().hermitian, "psd_project");
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> solver(0.5 * (rho_hat + rho_hat.adjoint()));
  Eigen::VectorXd vals = solver.eigenvalues().cwiseMax(0.0);
  const double total = vals.sum();
  if (!(total > 0.0)) throw InvalidArgument("psd_project: no positive spectrum left after clipping");
  vals /= total;
  const auto& v = solver.eigenvectors();
  ComplexMatrix out = v * vals.cast<Complex>().asDiagonal() * v.adjoint();
  return 0.5 * (out + out.adjoint());
}

ComplexMatrix kron(const ComplexMatrix& a, const ComplexMatrix& b) {
  ComplexMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

}  // namespace mera
