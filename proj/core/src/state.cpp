#include "meralearn/state.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <sstream>

#include "meralearn/errors.hpp"

namespace mera {

namespace {

void require_qubit_count(int n) {
  if (n < 1 || n > kMaxSimulatedQubits)
    throw InvalidArgument("statevector size " + std::to_string(n) + " outside [1, " +
                          std::to_string(kMaxSimulatedQubits) + "]");
}

inline std::uint64_t bit(int site) { return std::uint64_t{1} << (site - 1); }

}  // namespace

StateVector::StateVector(int n) : n_(n) {
  require_qubit_count(n);
  amps_ = ComplexVector::Zero(Eigen::Index{1} << n);
  amps_(0) = 1.0;
}

StateVector::StateVector(int n, ComplexVector amplitudes) : n_(n), amps_(std::move(amplitudes)) {
  require_qubit_count(n);
  if (amps_.size() != (Eigen::Index{1} << n)) throw InvalidArgument("StateVector: amplitude count is not 2^n");
  if (!amps_.allFinite()) throw InvalidArgument("StateVector: non-finite amplitude");
  if (std::abs(amps_.norm() - 1.0) > 1e-10) throw InvalidArgument("StateVector: amplitudes are not normalised");
}

StateVector StateVector::random(int n, Rng& rng) {
  require_qubit_count(n);
  std::normal_distribution<double> normal(0.0, 1.0);
  ComplexVector v(Eigen::Index{1} << n);
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    const double re = normal(rng);
    const double im = normal(rng);
    v(i) = Complex(re, im);
  }
  v.normalize();
  return StateVector(n, std::move(v));
}

void require_site(const StateVector& s, int site, const char* who) {
  if (site < 1 || site > s.n()) {
    std::ostringstream os;
    os << who << ": site " << site << " outside [1, " << s.n() << "]";
    throw InvalidArgument(os.str());
  }
}

void apply_two_qubit_unchecked(StateVector& state, const Matrix4c& u, int a, int b) {
  require_site(state, a, "apply_two_qubit");
  require_site(state, b, "apply_two_qubit");
  if (a == b) throw InvalidArgument("apply_two_qubit: sites must differ");
  const std::uint64_t ma = bit(a), mb = bit(b);
  auto& psi = state.mutable_amplitudes();
  const std::uint64_t dim = static_cast<std::uint64_t>(psi.size());
  for (std::uint64_t i = 0; i < dim; ++i) {
    if (i & (ma | mb)) continue;
    const Eigen::Index idx[4] = {static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i | mb),
                                 static_cast<Eigen::Index>(i | ma), static_cast<Eigen::Index>(i | ma | mb)};
    const Complex in[4] = {psi(idx[0]), psi(idx[1]), psi(idx[2]), psi(idx[3])};
    for (int r = 0; r < 4; ++r) psi(idx[r]) = u(r, 0) * in[0] + u(r, 1) * in[1] + u(r, 2) * in[2] + u(r, 3) * in[3];
  }
}

void apply_two_qubit(StateVector& state, const Matrix4c& u, int a, int b) {
  const double d = unitarity_defect(u);
  if (!(d <= default_tolerances().unitary)) {
    std::ostringstream os;
    os << "apply_two_qubit: gate is not unitary (defect " << d << ")";
    throw InvalidArgument(os.str());
  }
  apply_two_qubit_unchecked(state, u, a, b);
}

void apply_single_qubit(StateVector& state, const Matrix2c& u, int site) {
  require_site(state, site, "apply_single_qubit");
  const std::uint64_t m = bit(site);
  auto& psi = state.mutable_amplitudes();
  const std::uint64_t dim = static_cast<std::uint64_t>(psi.size());
  for (std::uint64_t i = 0; i < dim; ++i) {
    if (i & m) continue;
    const auto i0 = static_cast<Eigen::Index>(i), i1 = static_cast<Eigen::Index>(i | m);
    const Complex x0 = psi(i0), x1 = psi(i1);
    psi(i0) = u(0, 0) * x0 + u(0, 1) * x1;
    psi(i1) = u(1, 0) * x0 + u(1, 1) * x1;
  }
}

StateVector generate_state(const MeraCircuit& circuit) {
  const auto report = validate(circuit);
  if (!report.ok()) throw InvalidArgument("generate_state: invalid circuit: " + report.violations.front().message);
  if (circuit.n > kMaxSimulatedQubits) throw CapacityError("generate_state: n exceeds the statevector limit");
  StateVector psi(circuit.n);
  for (const auto& p : placements(circuit.n)) apply_two_qubit_unchecked(psi, gate(circuit, p), p.site_a, p.site_b);
  return psi;
}

ComplexMatrix reduced_density_unbounded(const StateVector& state, const std::vector<int>& sites) {
  if (sites.empty()) throw InvalidArgument("reduced_density: empty site list");
  for (std::size_t i = 0; i < sites.size(); ++i) {
    require_site(state, sites[i], "reduced_density");
    for (std::size_t j = 0; j < i; ++j)
      if (sites[i] == sites[j]) throw InvalidArgument("reduced_density: duplicate site");
  }
  const int n = state.n();
  const int k = static_cast<int>(sites.size());
  std::uint64_t block_mask = 0;
  for (int s : sites) block_mask |= bit(s);

  // Psi(a, r): a = block index (first listed site most significant), r = rest compacted.
  const Eigen::Index rows = Eigen::Index{1} << k;
  const Eigen::Index cols = Eigen::Index{1} << (n - k);
  ComplexMatrix psi_mat(rows, cols);
  const auto& amps = state.amplitudes();
  for (std::uint64_t idx = 0; idx < static_cast<std::uint64_t>(amps.size()); ++idx) {
    std::uint64_t a = 0;
    for (int q = 0; q < k; ++q)
      if (idx & bit(sites[q])) a |= std::uint64_t{1} << (k - 1 - q);
    std::uint64_t r = 0;
    int pos = 0;
    for (int s = 1; s <= n; ++s) {
      if (block_mask & bit(s)) continue;
      if (idx & bit(s)) r |= std::uint64_t{1} << pos;
      ++pos;
    }
    psi_mat(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(r)) = amps(static_cast<Eigen::Index>(idx));
  }
  ComplexMatrix rho = psi_mat * psi_mat.adjoint();
  return 0.5 * (rho + rho.adjoint());
}

BlockDensityMatrix reduced_density(const StateVector& state, const std::vector<int>& sites) {
  if (sites.size() > 4)
    throw InvalidArgument("reduced_density: blocks are limited to 4 sites, got " + std::to_string(sites.size()));
  return {sites, reduced_density_unbounded(state, sites)};
}

double probability_zero(const StateVector& state, int site) {
  require_site(state, site, "probability_zero");
  const std::uint64_t m = bit(site);
  double p = 0.0;
  const auto& psi = state.amplitudes();
  for (std::uint64_t i = 0; i < static_cast<std::uint64_t>(psi.size()); ++i)
    if (!(i & m)) p += std::norm(psi(static_cast<Eigen::Index>(i)));
  return std::clamp(p, 0.0, 1.0);
}

double measure_postselect_zero(StateVector& state, int site) {
  const double p = probability_zero(state, site);
  if (p < default_tolerances().postselect_min) {
    std::ostringstream os;
    os << "post-selection on site " << site << " has acceptance probability " << p;
    throw PostSelectionError(os.str(), 0, 0);
  }
  const std::uint64_t m = bit(site);
  auto& psi = state.mutable_amplitudes();
  const double scale = 1.0 / std::sqrt(p);
  for (std::uint64_t i = 0; i < static_cast<std::uint64_t>(psi.size()); ++i) {
    const auto idx = static_cast<Eigen::Index>(i);
    psi(idx) = (i & m) ? Complex(0.0) : psi(idx) * scale;
  }
  return p;
}

namespace {

// Rotates the Pauli string's measurement basis onto Z and returns the
// rotated state plus the mask of non-identity sites.
std::pair<StateVector, std::uint64_t> rotate_to_z(const StateVector& state, const PauliString& p) {
  StateVector rotated = state;
  std::uint64_t mask = 0;
  const double s = 1.0 / std::sqrt(2.0);
  Matrix2c h;
  h << s, s, s, -s;
  Matrix2c hsdg;  // H S^dagger maps the Y eigenbasis onto Z
  hsdg << s, Complex(0, -s), s, Complex(0, s);
  for (std::size_t i = 0; i < p.sites.size(); ++i) {
    require_site(state, p.sites[i], "pauli_expectation");
    switch (p.letters[i]) {
      case Pauli::I: continue;
      case Pauli::X: apply_single_qubit(rotated, h, p.sites[i]); break;
      case Pauli::Y: apply_single_qubit(rotated, hsdg, p.sites[i]); break;
      case Pauli::Z: break;
    }
    mask |= bit(p.sites[i]);
  }
  return {std::move(rotated), mask};
}

double parity_plus_probability(const StateVector& rotated, std::uint64_t mask) {
  double plus = 0.0;
  const auto& psi = rotated.amplitudes();
  for (std::uint64_t i = 0; i < static_cast<std::uint64_t>(psi.size()); ++i)
    if (std::popcount(i & mask) % 2 == 0) plus += std::norm(psi(static_cast<Eigen::Index>(i)));
  return std::clamp(plus, 0.0, 1.0);
}

}  // namespace

double pauli_expectation(const StateVector& state, const PauliString& p) {
  auto [rotated, mask] = rotate_to_z(state, p);
  if (mask == 0) return 1.0;
  return std::clamp(2.0 * parity_plus_probability(rotated, mask) - 1.0, -1.0, 1.0);
}

double sample_expectation(const StateVector& state, const PauliString& p, long shots, Rng& rng) {
  if (shots < 1) throw InvalidArgument("sample_expectation: shots must be positive");
  auto [rotated, mask] = rotate_to_z(state, p);
  if (mask == 0) return 1.0;
  const double plus = parity_plus_probability(rotated, mask);
  std::binomial_distribution<long> draw(shots, plus);
  const long k = draw(rng);
  return (2.0 * static_cast<double>(k) - static_cast<double>(shots)) / static_cast<double>(shots);
}

Complex inner_product(const StateVector& a, const StateVector& b) {
  if (a.n() != b.n()) throw InvalidArgument("inner_product: qubit counts differ");
  return a.amplitudes().dot(b.amplitudes());
}

double infidelity(const StateVector& a, const StateVector& b) {
  return std::max(0.0, 1.0 - std::norm(inner_product(a, b)));
}

}  // namespace mera
