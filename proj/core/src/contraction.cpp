#include "meralearn/contraction.hpp"

#include <algorithm>
#include <set>

#include "meralearn/errors.hpp"

namespace mera {

namespace {

struct Node {
  std::vector<int> legs;  ///< first leg most significant
  ComplexVector data;
  int span_start = 0;
  int layer = 0;
  bool bra = false;
};

// Wiring of one copy of the network. Leg ids are shared with the other copy
// on the physical wires only.
struct Wiring {
  std::vector<Node> nodes;
  std::vector<int> physical;  ///< final wire per physical site, index s - 1
};

Wiring wire_network(const MeraCircuit* c, int n, int& next_leg, const std::vector<int>* physical, bool bra) {
  const int K = depth(n) + 1;
  std::vector<int> wire(static_cast<std::size_t>(n) + 1, -1);
  auto fresh = [&]() { return next_leg++; };
  Wiring w;
  auto span = [](int t, int a) { return (a - 1) * (1 << (t - 1)) + 1; };
  auto value = [&](const Matrix4c& g, int rows_used, int cols_used) {
    ComplexVector v(rows_used * cols_used);
    for (int r = 0; r < rows_used; ++r)
      for (int col = 0; col < cols_used; ++col) {
        const Complex x = g(r, col);
        v(r * cols_used + col) = bra ? std::conj(x) : x;
      }
    return v;
  };
  const bool with_data = c != nullptr;

  {
    const int a = physical_site(K, 1), b = physical_site(K, 2);
    wire[a] = fresh();
    wire[b] = fresh();
    Node t{{wire[a], wire[b]}, {}, 1, K, bra};
    if (with_data) t.data = value(c->top, 4, 1);
    w.nodes.push_back(std::move(t));
  }
  for (int t = K - 1; t >= 1; --t) {
    const int m = layer_width(n, t);
    for (int j = 1; j <= m / 2; ++j) {
      const int sa = physical_site(t, 2 * j - 1), sb = physical_site(t, 2 * j);
      const int in = wire[sb];
      wire[sa] = fresh();
      wire[sb] = fresh();
      // ancilla input fixed to |0>: keep the first two columns
      Node node{{wire[sa], wire[sb], in}, {}, span(t, 2 * j - 1), t, bra};
      if (with_data) node.data = value(c->layers[t - 1].isometries[j - 1], 4, 2);
      w.nodes.push_back(std::move(node));
    }
    for (int j = 1; j < m / 2; ++j) {
      const int sa = physical_site(t, 2 * j), sb = physical_site(t, 2 * j + 1);
      const int ia = wire[sa], ib = wire[sb];
      wire[sa] = fresh();
      wire[sb] = fresh();
      Node node{{wire[sa], wire[sb], ia, ib}, {}, span(t, 2 * j), t, bra};
      if (with_data) node.data = value(c->layers[t - 1].disentanglers[j - 1], 4, 4);
      w.nodes.push_back(std::move(node));
    }
  }
  w.physical.assign(wire.begin() + 1, wire.end());
  if (physical) {
    // rename this copy's physical wires to the other copy's
    std::vector<std::pair<int, int>> ren;
    for (int s = 0; s < n; ++s) ren.emplace_back(w.physical[s], (*physical)[s]);
    for (auto& node : w.nodes)
      for (int& l : node.legs)
        for (const auto& [from, to] : ren)
          if (l == from) l = to;
  }
  return w;
}

std::vector<Node> doubled_network(const MeraCircuit* a, const MeraCircuit* b, int n) {
  int next = 0;
  Wiring ket = wire_network(a, n, next, nullptr, false);
  Wiring bra = wire_network(b, n, next, &ket.physical, true);
  std::vector<Node> all = std::move(ket.nodes);
  for (auto& node : bra.nodes) all.push_back(std::move(node));
  std::stable_sort(all.begin(), all.end(), [](const Node& x, const Node& y) {
    if (x.span_start != y.span_start) return x.span_start < y.span_start;
    if (x.layer != y.layer) return x.layer < y.layer;
    return !x.bra && y.bra;
  });
  return all;
}

// Reorder the legs of a dense tensor. `to` is a permutation of `from`.
ComplexVector permute(const ComplexVector& data, const std::vector<int>& from, const std::vector<int>& to) {
  if (from == to) return data;
  const int k = static_cast<int>(from.size());
  // bit of each new position in the old index
  std::vector<int> old_bit(k);
  for (int p = 0; p < k; ++p) {
    const int q = static_cast<int>(std::find(from.begin(), from.end(), to[p]) - from.begin());
    old_bit[p] = k - 1 - q;
  }
  const int lo_bits = k / 2, hi_bits = k - lo_bits;
  std::vector<Eigen::Index> lo(std::size_t{1} << lo_bits, 0), hi(std::size_t{1} << hi_bits, 0);
  for (std::size_t i = 0; i < lo.size(); ++i)
    for (int p = 0; p < lo_bits; ++p)
      if (i >> p & 1) lo[i] |= Eigen::Index{1} << old_bit[k - 1 - p];
  for (std::size_t i = 0; i < hi.size(); ++i)
    for (int p = 0; p < hi_bits; ++p)
      if (i >> p & 1) hi[i] |= Eigen::Index{1} << old_bit[k - 1 - lo_bits - p];
  ComplexVector out(data.size());
  const Eigen::Index lo_mask = static_cast<Eigen::Index>(lo.size()) - 1;
  for (Eigen::Index i = 0; i < out.size(); ++i) out(i) = data(hi[i >> lo_bits] | lo[i & lo_mask]);
  return out;
}

struct Split {
  std::vector<int> rest, shared, free;
};

Split split(const std::vector<int>& open, const std::vector<int>& legs) {
  Split s;
  for (int l : open) (std::find(legs.begin(), legs.end(), l) != legs.end() ? s.shared : s.rest).push_back(l);
  for (int l : legs)
    if (std::find(open.begin(), open.end(), l) == open.end()) s.free.push_back(l);
  return s;
}

void account(ContractionStats& st, const Split& s, std::size_t open_after) {
  st.multiply_adds += (std::uint64_t{1} << s.rest.size()) * (std::uint64_t{1} << s.shared.size()) *
                      (std::uint64_t{1} << s.free.size());
  st.max_open_bonds = std::max(st.max_open_bonds, static_cast<int>(open_after));
}

int column_count(const std::vector<Node>& nodes) {
  std::set<int> cols;
  for (const auto& node : nodes) cols.insert((node.span_start + 1) / 2);
  return static_cast<int>(cols.size());
}

void check_pair(const MeraCircuit& a, const MeraCircuit& b) {
  if (a.n != b.n) {
    throw InvalidArgument("overlap: size mismatch (" + std::to_string(a.n) + " vs " + std::to_string(b.n) + ")");
  }
  require_supported_size(a.n);
  for (const MeraCircuit* c : {&a, &b}) {
    const auto report = validate(*c, 1e-6);
    for (const auto& v : report.violations)
      if (v.kind != "unitarity") throw InvalidArgument("overlap: malformed circuit: " + v.message);
  }
}

OverlapResult contract(const MeraCircuit& a, const MeraCircuit& b) {
  const auto nodes = doubled_network(&a, &b, a.n);
  OverlapResult res;
  std::vector<int> open;
  ComplexVector boundary = ComplexVector::Ones(1);
  for (const auto& node : nodes) {
    const Split s = split(open, node.legs);
    std::vector<int> rs = s.rest;
    rs.insert(rs.end(), s.shared.begin(), s.shared.end());
    std::vector<int> sf = s.shared;
    sf.insert(sf.end(), s.free.begin(), s.free.end());
    const ComplexVector left = permute(boundary, open, rs);
    const ComplexVector right = permute(node.data, node.legs, sf);
    const Eigen::Index nr = Eigen::Index{1} << s.rest.size();
    const Eigen::Index ns = Eigen::Index{1} << s.shared.size();
    const Eigen::Index nf = Eigen::Index{1} << s.free.size();
    // row-major (rest, shared) and (shared, free) viewed as column-major transposes
    Eigen::Map<const ComplexMatrix> lt(left.data(), ns, nr);
    Eigen::Map<const ComplexMatrix> rt(right.data(), nf, ns);
    ComplexMatrix out_t = rt * lt;  // (free, rest) column-major = (rest, free) row-major
    boundary = Eigen::Map<const ComplexVector>(out_t.data(), nr * nf);
    open = s.rest;
    open.insert(open.end(), s.free.begin(), s.free.end());
    account(res.stats, s, open.size());
  }
  if (!open.empty()) throw Error("overlap: network did not close");
  res.value = boundary(0);
  res.stats.columns = column_count(nodes);
  return res;
}

}  // namespace

OverlapResult overlap(const MeraCircuit& a, const MeraCircuit& b) {
  check_pair(a, b);
  return contract(a, b);
}

double fidelity(const MeraCircuit& a, const MeraCircuit& b) { return std::norm(overlap(a, b).value); }

ExpectationResult expectation_product(const MeraCircuit& c, const std::vector<Matrix2c>& ops) {
  if (static_cast<int>(ops.size()) != c.n) throw InvalidArgument("expectation_product: need one operator per site");
  check_pair(c, c);
  ExpectationResult res;
  for (const auto& o : ops)
    if (hermiticity_defect(o) > default_tolerances().hermitian) res.hermitian = false;
  // |phi> = (x) A_i |psi>: fold the operators into the last gate on each site
  MeraCircuit phi = c;
  auto& L = phi.layers.at(0);
  const Matrix2c I2 = Matrix2c::Identity();
  for (std::size_t j = 1; j < L.isometries.size(); ++j)
    L.disentanglers[j - 1] = kron(ops[2 * j - 1], ops[2 * j]) * L.disentanglers[j - 1];
  L.isometries.front() = kron(ops.front(), I2) * L.isometries.front();
  L.isometries.back() = kron(I2, ops.back()) * L.isometries.back();
  const auto r = contract(phi, c);
  res.value = r.value;
  res.stats = r.stats;
  return res;
}

int predicted_max_bonds(int n, int chi) {
  if (chi != 2) throw InvalidArgument("predicted_max_bonds: only chi = 2 is supported");
  return 4 * log2_exact(n);
}

ContractionStats contraction_plan(int n) {
  require_supported_size(n);
  const auto nodes = doubled_network(nullptr, nullptr, n);
  ContractionStats st;
  std::vector<int> open;
  for (const auto& node : nodes) {
    const Split s = split(open, node.legs);
    open = s.rest;
    open.insert(open.end(), s.free.begin(), s.free.end());
    account(st, s, open.size());
  }
  st.columns = column_count(nodes);
  return st;
}

}  // namespace mera
