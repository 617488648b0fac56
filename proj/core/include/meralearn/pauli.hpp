#pragma once

#include <compare>
#include <string>
#include <vector>

#include "meralearn/numerics.hpp"

namespace mera {

enum class Pauli : unsigned char { I = 0, X = 1, Y = 2, Z = 3 };

char pauli_char(Pauli p);
Pauli pauli_from_char(char c);
Matrix2c pauli_matrix(Pauli p);

/// Pauli operator on a set of 1-based sites. Sites strictly increasing.
struct PauliString {
  std::vector<int> sites;
  std::vector<Pauli> letters;

  PauliString() = default;
  PauliString(std::vector<int> s, std::vector<Pauli> l);

  /// Parse "XIZ" onto consecutive sites starting at `first_site`.
  static PauliString from_letters(const std::string& letters, int first_site);

  /// Number of non-identity letters.
  int weight() const;
  bool is_identity() const { return weight() == 0; }

  /// Dense matrix on `sites` in list order.
  ComplexMatrix matrix() const;

  /// Drop identity letters.
  PauliString support() const;

  std::string to_string() const;  ///< e.g. "X1 Z3", "I" for the identity

  auto operator<=>(const PauliString&) const = default;
  bool operator==(const PauliString&) const = default;
};

/// Dense 2^k x 2^k operator for `p` acting on the ordered block `block_sites`.
/// Every site of `p` must belong to the block.
ComplexMatrix embed(const PauliString& p, const std::vector<int>& block_sites);

}  // namespace mera
