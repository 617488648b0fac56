#pragma once

#include <map>
#include <vector>

#include "meralearn/state.hpp"

namespace mera {

enum class TomoMode { exact, sampled };

const char* tomo_mode_name(TomoMode mode);

/// One local measurement basis per block site (X, Y or Z).
using Setting = std::vector<Pauli>;

/// The 3^k settings of a k-site block in lexicographic order (X < Y < Z,
/// first site most significant).
std::vector<Setting> settings_for_block(const std::vector<int>& sites);

/// The setting a Pauli string is estimated from: identities replaced by X.
Setting first_compatible_setting(const PauliString& p);

struct TomographyOptions {
  TomoMode mode = TomoMode::exact;
  long shots_per_setting = 1000;
};

struct TomographyRecord {
  double estimate = 0.0;
  long shots = 0;  ///< 0 in exact mode
};

struct TomographyEstimate {
  std::vector<int> sites;
  TomoMode mode = TomoMode::exact;
  /// Every non-identity Pauli string on the block (full-length letter lists).
  std::map<PauliString, TomographyRecord> records;
  ComplexMatrix rho_linear;  ///< linear inversion before projection
  BlockDensityMatrix rho_hat;
};

/// Linear inversion rho = 2^-k sum_P <P> P from full-length strings on `sites`.
ComplexMatrix linear_inversion(const std::vector<int>& sites, const std::map<PauliString, TomographyRecord>& records);

TomographyEstimate estimate_block(const StateVector& state, const std::vector<int>& sites,
                                  const TomographyOptions& opts, Rng& rng);

/// Tomography settings used by one learning run: 27 per three-site block,
/// summed over the layers' m/2 - 1 blocks, times the number of sweeps. The
/// two-site reductions for the last isometry of each pass and the top gate
/// are not counted.
long setting_count(int n, int sweeps);

/// Human-readable statement of the formula, for reports.
const char* setting_count_formula();

}  // namespace mera
