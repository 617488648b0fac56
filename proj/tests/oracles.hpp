#pragma once

// Independent reference computations shared by the unit tests. Everything
// here works on full dense matrices and plain index arithmetic.

#include <cmath>

#include "meralearn/numerics.hpp"
#include "meralearn/pauli.hpp"
#include "meralearn/state.hpp"

namespace oracle {

using mera::Complex;
using mera::ComplexMatrix;
using mera::ComplexVector;

inline ComplexMatrix random_hermitian(int dim, mera::Rng& rng) {
  std::normal_distribution<double> g;
  ComplexMatrix a(dim, dim);
  for (int i = 0; i < dim; ++i)
    for (int j = 0; j < dim; ++j) a(i, j) = Complex(g(rng), g(rng));
  return 0.5 * (a + a.adjoint());
}

inline ComplexMatrix random_density(int qubits, mera::Rng& rng) {
  const int d = 1 << qubits;
  std::normal_distribution<double> g;
  ComplexMatrix a(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) a(i, j) = Complex(g(rng), g(rng));
  ComplexMatrix rho = a * a.adjoint();
  return rho / rho.trace().real();
}

// Element-wise partial trace; `keep` 1-based, first qubit most significant.
inline ComplexMatrix partial_trace_sum(const ComplexMatrix& rho, int q, const std::vector<int>& keep) {
  const int k = static_cast<int>(keep.size());
  std::vector<int> traced;
  for (int s = 1; s <= q; ++s)
    if (std::find(keep.begin(), keep.end(), s) == keep.end()) traced.push_back(s);
  auto bit = [&](int idx, int site) { return (idx >> (q - site)) & 1; };
  ComplexMatrix out = ComplexMatrix::Zero(1 << k, 1 << k);
  for (int i = 0; i < (1 << q); ++i)
    for (int j = 0; j < (1 << q); ++j) {
      bool same = true;
      for (int s : traced) same = same && bit(i, s) == bit(j, s);
      if (!same) continue;
      int a = 0, b = 0;
      for (int s : keep) {
        a = 2 * a + bit(i, s);
        b = 2 * b + bit(j, s);
      }
      out(a, b) += rho(i, j);
    }
  return out;
}

// Full 2^n x 2^n matrix of a two-qubit gate on sites (a, b) in the
// little-endian statevector layout (site s is bit s - 1).
inline ComplexMatrix full_gate(const mera::Matrix4c& u, int n, int a, int b) {
  const int d = 1 << n;
  ComplexMatrix m = ComplexMatrix::Zero(d, d);
  for (int col = 0; col < d; ++col) {
    const int xa = (col >> (a - 1)) & 1, xb = (col >> (b - 1)) & 1;
    const int in = 2 * xa + xb;
    for (int out = 0; out < 4; ++out) {
      int row = col & ~(1 << (a - 1)) & ~(1 << (b - 1));
      row |= ((out >> 1) & 1) << (a - 1);
      row |= (out & 1) << (b - 1);
      m(row, col) += u(out, in);
    }
  }
  return m;
}

// Dense operator of a Pauli string on n qubits, little-endian layout.
inline ComplexMatrix full_pauli(const mera::PauliString& p, int n) {
  ComplexMatrix m = ComplexMatrix::Identity(1, 1);
  for (int s = n; s >= 1; --s) {
    mera::Matrix2c f = mera::Matrix2c::Identity();
    for (std::size_t i = 0; i < p.sites.size(); ++i)
      if (p.sites[i] == s) f = mera::pauli_matrix(p.letters[i]);
    m = mera::kron(m, f);
  }
  return m;
}

// Reduced density of a statevector on `sites` (first listed most
// significant) through the full density matrix.
inline ComplexMatrix reduced_via_full(const mera::StateVector& psi, const std::vector<int>& sites) {
  const int n = psi.n();
  const ComplexVector& a = psi.amplitudes();
  // reorder amplitudes into a big-endian layout so site 1 is most significant
  ComplexVector big(a.size());
  for (Eigen::Index i = 0; i < a.size(); ++i) {
    int j = 0;
    for (int s = 1; s <= n; ++s) j = 2 * j + static_cast<int>((i >> (s - 1)) & 1);
    big(j) = a(i);
  }
  ComplexMatrix rho = big * big.adjoint();
  return partial_trace_sum(rho, n, sites);
}

}  // namespace oracle
