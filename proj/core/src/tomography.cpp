#include "meralearn/tomography.hpp"

#include <algorithm>
#include <cmath>

#include "meralearn/errors.hpp"

namespace mera {

const char* tomo_mode_name(TomoMode mode) { return mode == TomoMode::exact ? "exact" : "sampled"; }

namespace {

void require_block(const std::vector<int>& sites) {
  if (sites.size() < 2 || sites.size() > 4)
    throw InvalidArgument("tomography blocks have 2 to 4 sites, got " + std::to_string(sites.size()));
}

// All 4^k letter lists except the identity, lexicographic.
std::vector<PauliString> block_strings(const std::vector<int>& sites) {
  const int k = static_cast<int>(sites.size());
  std::vector<PauliString> out;
  for (int idx = 1; idx < (1 << (2 * k)); ++idx) {
    std::vector<Pauli> letters(static_cast<std::size_t>(k));
    for (int q = 0; q < k; ++q) letters[q] = static_cast<Pauli>((idx >> (2 * (k - 1 - q))) & 3);
    out.emplace_back(sites, std::move(letters));
  }
  return out;
}

Matrix2c basis_rotation(Pauli p) {
  const double s = 1.0 / std::sqrt(2.0);
  Matrix2c r;
  switch (p) {
    case Pauli::X: r << s, s, s, -s; break;
    case Pauli::Y: r << s, Complex(0, -s), s, Complex(0, s); break;
    default: r.setIdentity(); break;
  }
  return r;
}

// Outcome counts of `shots` draws from `probs` via sequential binomials.
std::vector<long> multinomial(const std::vector<double>& probs, long shots, Rng& rng) {
  std::vector<long> counts(probs.size(), 0);
  long remaining = shots;
  double mass = 1.0;
  for (std::size_t i = 0; i + 1 < probs.size() && remaining > 0; ++i) {
    const double q = mass > 0.0 ? std::clamp(probs[i] / mass, 0.0, 1.0) : 0.0;
    std::binomial_distribution<long> draw(remaining, q);
    counts[i] = draw(rng);
    remaining -= counts[i];
    mass -= probs[i];
  }
  counts.back() += remaining;
  return counts;
}

}  // namespace

std::vector<Setting> settings_for_block(const std::vector<int>& sites) {
  require_block(sites);
  const int k = static_cast<int>(sites.size());
  int total = 1;
  for (int q = 0; q < k; ++q) total *= 3;
  std::vector<Setting> out;
  out.reserve(static_cast<std::size_t>(total));
  for (int idx = 0; idx < total; ++idx) {
    Setting s(static_cast<std::size_t>(k));
    int rest = idx;
    for (int q = k - 1; q >= 0; --q) {
      s[q] = static_cast<Pauli>(1 + rest % 3);
      rest /= 3;
    }
    out.push_back(std::move(s));
  }
  return out;
}

Setting first_compatible_setting(const PauliString& p) {
  Setting s = p.letters;
  for (auto& l : s)
    if (l == Pauli::I) l = Pauli::X;
  return s;
}

ComplexMatrix linear_inversion(const std::vector<int>& sites, const std::map<PauliString, TomographyRecord>& records) {
  const int k = static_cast<int>(sites.size());
  const Eigen::Index d = Eigen::Index{1} << k;
  ComplexMatrix rho = ComplexMatrix::Identity(d, d);
  for (const auto& [p, rec] : records) rho += rec.estimate * embed(p, sites);
  rho /= static_cast<double>(d);
  return rho;
}

TomographyEstimate estimate_block(const StateVector& state, const std::vector<int>& sites,
                                  const TomographyOptions& opts, Rng& rng) {
  require_block(sites);
  TomographyEstimate est;
  est.sites = sites;
  est.mode = opts.mode;
  const ComplexMatrix rho = reduced_density(state, sites).matrix;
  const auto strings = block_strings(sites);

  if (opts.mode == TomoMode::exact) {
    for (const auto& p : strings) est.records[p] = {(rho * embed(p, sites)).trace().real(), 0};
  } else {
    if (opts.shots_per_setting < 1) throw InvalidArgument("estimate_block: shots_per_setting must be positive");
    const int k = static_cast<int>(sites.size());
    const Eigen::Index d = Eigen::Index{1} << k;
    // Each setting is measured independently; strings read their parity from
    // the first setting compatible with them.
    std::map<Setting, std::vector<long>> counts_by_setting;
    for (const auto& setting : settings_for_block(sites)) {
      ComplexMatrix rot = ComplexMatrix::Identity(1, 1);
      for (Pauli l : setting) rot = kron(rot, basis_rotation(l));
      const ComplexMatrix rotated = rot * rho * rot.adjoint();
      std::vector<double> probs(static_cast<std::size_t>(d));
      for (Eigen::Index i = 0; i < d; ++i) probs[i] = std::max(0.0, rotated(i, i).real());
      counts_by_setting[setting] = multinomial(probs, opts.shots_per_setting, rng);
    }
    for (const auto& p : strings) {
      const auto& counts = counts_by_setting.at(first_compatible_setting(p));
      long signed_sum = 0;
      for (Eigen::Index outcome = 0; outcome < d; ++outcome) {
        int parity = 0;
        for (int q = 0; q < k; ++q)
          if (p.letters[q] != Pauli::I && ((outcome >> (k - 1 - q)) & 1)) parity ^= 1;
        signed_sum += parity ? -counts[outcome] : counts[outcome];
      }
      est.records[p] = {static_cast<double>(signed_sum) / static_cast<double>(opts.shots_per_setting),
                        opts.shots_per_setting};
    }
  }
  est.rho_linear = linear_inversion(sites, est.records);
  est.rho_hat = {sites, psd_project(est.rho_linear)};
  return est;
}

long setting_count(int n, int sweeps) {
  if (!is_power_of_two(n) || n < 4) throw InvalidArgument("setting_count: n must be a power of two >= 4");
  if (sweeps < 1) throw InvalidArgument("setting_count: sweeps must be positive");
  long blocks = 0;
  for (int tau = 1; tau <= depth(n); ++tau) blocks += layer_width(n, tau) / 2 - 1;
  return 27L * blocks * sweeps;
}

const char* setting_count_formula() {
  return "27 settings per three-site block x sum over layers of (m/2 - 1) blocks x sweeps";
}

}  // namespace mera
