#pragma once

// Dense complex linear algebra shared by every module.
//
// Operator convention: a matrix acting on an ordered list of k qubits uses the
// tensor-product basis in list order, i.e. the first listed qubit is the
// leftmost Kronecker factor (most significant bit of the row index).

#include <complex>
#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace mera {

using Complex = std::complex<double>;
using ComplexMatrix = Eigen::MatrixXcd;
using ComplexVector = Eigen::VectorXcd;
using Matrix2c = Eigen::Matrix2cd;
using Matrix4c = Eigen::Matrix4cd;
using Matrix8c = Eigen::Matrix<Complex, 8, 8>;

/// Seeded random stream. Every stochastic routine takes one explicitly.
using Rng = std::mt19937_64;

/// Default numerical tolerances. Every routine that checks a precondition
/// reads its threshold from here unless the caller passes one explicitly.
struct Tolerances {
  double hermitian = 1e-10;      ///< max |H - H^dagger| accepted as Hermitian
  double unitary = 1e-10;        ///< max |U^dagger U - I| accepted as unitary
  double objective_unitary = 1e-8;
  double serialized_unitary = 1e-6;
  double trace = 1e-10;
  double phase_fix = 1e-8;       ///< first component above this is made real >= 0
  double degeneracy = 1e-12;     ///< eigenvalues closer than this are "equal"
  double postselect_min = 1e-14;
};

const Tolerances& default_tolerances();

struct EigenDecomposition {
  std::vector<double> values;  ///< descending
  ComplexMatrix vectors;       ///< column k belongs to values[k]
};

/// Hermitian eigendecomposition with descending eigenvalues and a fixed
/// eigenvector phase: the first component of magnitude above
/// `Tolerances::phase_fix` is real and non-negative. Equal eigenvalues are
/// ordered by their eigenvectors compared component-wise (real part, then
/// imaginary part, larger first).
EigenDecomposition eig_hermitian(const ComplexMatrix& h);

/// Eigenvalues only, descending. No phase or tie handling needed.
std::vector<double> eigvals_hermitian(const ComplexMatrix& h);

/// exp(-i t H) for Hermitian H, through the eigendecomposition.
ComplexMatrix expm_hermitian(const ComplexMatrix& h, double t);

/// Partial trace of a 2^q x 2^q operator. `keep` holds 1-based qubit labels;
/// the result is ordered by increasing label.
ComplexMatrix partial_trace(const ComplexMatrix& rho, int qubit_count, std::span<const int> keep);

/// Haar-distributed unitary: Ginibre draw, QR, then column phases chosen so
/// that R has a positive real diagonal.
ComplexMatrix haar_unitary(int dim, Rng& rng);

/// The 4^k Pauli strings on k qubits, lexicographic with I < X < Y < Z and
/// the first qubit most significant.
std::vector<ComplexMatrix> pauli_basis(int k);

/// Clip negative eigenvalues to zero and renormalise to unit trace.
ComplexMatrix psd_project(const ComplexMatrix& rho_hat);

ComplexMatrix kron(const ComplexMatrix& a, const ComplexMatrix& b);

double hermiticity_defect(const ComplexMatrix& h);
double unitarity_defect(const ComplexMatrix& u);
double max_abs(const ComplexMatrix& m);

/// Throws InvalidArgument when the matrix is not square and Hermitian to `tol`.
void require_hermitian(const ComplexMatrix& h, double tol, const char* who);

inline bool is_power_of_two(std::int64_t n) { return n > 0 && (n & (n - 1)) == 0; }

int log2_exact(std::int64_t n);

}  // namespace mera
