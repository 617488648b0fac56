#include "meralearn/pauli.hpp"

#include <algorithm>
#include <sstream>

#include "meralearn/errors.hpp"

namespace mera {

char pauli_char(Pauli p) {
  static constexpr char chars[] = {'I', 'X', 'Y', 'Z'};
  return chars[static_cast<int>(p)];
}

Pauli pauli_from_char(char c) {
  switch (c) {
    case 'I': return Pauli::I;
    case 'X': return Pauli::X;
    case 'Y': return Pauli::Y;
    case 'Z': return Pauli::Z;
  }
  throw InvalidArgument(std::string("unknown Pauli letter '") + c + "'");
}

Matrix2c pauli_matrix(Pauli p) {
  Matrix2c m;
  switch (p) {
    case Pauli::I: m << 1, 0, 0, 1; break;
    case Pauli::X: m << 0, 1, 1, 0; break;
    case Pauli::Y: m << 0, Complex(0, -1), Complex(0, 1), 0; break;
    case Pauli::Z: m << 1, 0, 0, -1; break;
  }
  return m;
}

PauliString::PauliString(std::vector<int> s, std::vector<Pauli> l) : sites(std::move(s)), letters(std::move(l)) {
  if (sites.size() != letters.size()) throw InvalidArgument("PauliString: sites and letters differ in length");
  for (std::size_t i = 0; i < sites.size(); ++i) {
    if (sites[i] < 1) throw InvalidArgument("PauliString: sites are 1-based");
    if (i > 0 && sites[i] <= sites[i - 1]) throw InvalidArgument("PauliString: sites must be strictly increasing");
  }
}

PauliString PauliString::from_letters(const std::string& text, int first_site) {
  std::vector<int> s;
  std::vector<Pauli> l;
  for (std::size_t i = 0; i < text.size(); ++i) {
    s.push_back(first_site + static_cast<int>(i));
    l.push_back(pauli_from_char(text[i]));
  }
  return PauliString(std::move(s), std::move(l));
}

int PauliString::weight() const {
  return static_cast<int>(std::count_if(letters.begin(), letters.end(), [](Pauli p) { return p != Pauli::I; }));
}

ComplexMatrix PauliString::matrix() const {
  ComplexMatrix m = ComplexMatrix::Identity(1, 1);
  for (Pauli p : letters) m = kron(m, pauli_matrix(p));
  return m;
}

PauliString PauliString::support() const {
  PauliString out;
  for (std::size_t i = 0; i < sites.size(); ++i)
    if (letters[i] != Pauli::I) {
      out.sites.push_back(sites[i]);
      out.letters.push_back(letters[i]);
    }
  return out;
}

std::string PauliString::to_string() const {
  std::ostringstream os;
  bool first = true;
  for (std::size_t i = 0; i < sites.size(); ++i) {
    if (letters[i] == Pauli::I) continue;
    if (!first) os << ' ';
    os << pauli_char(letters[i]) << sites[i];
    first = false;
  }
  return first ? std::string("I") : os.str();
}

ComplexMatrix embed(const PauliString& p, const std::vector<int>& block_sites) {
  std::vector<Pauli> full(block_sites.size(), Pauli::I);
  for (std::size_t i = 0; i < p.sites.size(); ++i) {
    auto it = std::find(block_sites.begin(), block_sites.end(), p.sites[i]);
    if (it == block_sites.end())
      throw InvalidArgument("embed: site " + std::to_string(p.sites[i]) + " is outside the block");
    full[static_cast<std::size_t>(it - block_sites.begin())] = p.letters[i];
  }
  ComplexMatrix m = ComplexMatrix::Identity(1, 1);
  for (Pauli l : full) m = kron(m, pauli_matrix(l));
  return m;
}

}  // namespace mera
