#include "meralearn/mera.hpp"

#include <sstream>

#include "meralearn/errors.hpp"

namespace mera {

const char* gate_kind_name(GateKind kind) {
  switch (kind) {
    case GateKind::disentangler: return "disentangler";
    case GateKind::isometry: return "isometry";
    case GateKind::top: return "top";
  }
  return "?";
}

int depth(int n) { return log2_exact(n) - 1; }

int layer_width(int n, int tau) { return n >> (tau - 1); }

int physical_site(int tau, int s) { return s << (tau - 1); }

int gate_count(int n) {
  int total = 1;
  for (int tau = 1; tau <= depth(n); ++tau) total += layer_width(n, tau) - 1;
  return total;
}

void require_supported_size(int n) {
  if (n < 4 || n > 64 || !is_power_of_two(n)) {
    throw InvalidArgument("unsupported qubit count " + std::to_string(n) +
                          ": the binary layout needs a power of two between 4 and 64");
  }
}

std::vector<GatePlacement> placements(int n) {
  const int K = depth(n);
  std::vector<GatePlacement> out;
  out.push_back({GateKind::top, K + 1, 1, physical_site(K + 1, 1), physical_site(K + 1, 2)});
  for (int tau = K; tau >= 1; --tau) {
    const int m = layer_width(n, tau);
    for (int j = 1; j <= m / 2; ++j)
      out.push_back({GateKind::isometry, tau, j, physical_site(tau, 2 * j - 1), physical_site(tau, 2 * j)});
    for (int j = 1; j < m / 2; ++j)
      out.push_back({GateKind::disentangler, tau, j, physical_site(tau, 2 * j), physical_site(tau, 2 * j + 1)});
  }
  return out;
}

const Matrix4c& gate(const MeraCircuit& c, const GatePlacement& p) {
  switch (p.kind) {
    case GateKind::top: return c.top;
    case GateKind::isometry: return c.layers.at(p.layer - 1).isometries.at(p.block - 1);
    case GateKind::disentangler: return c.layers.at(p.layer - 1).disentanglers.at(p.block - 1);
  }
  return c.top;
}

Matrix4c& gate(MeraCircuit& c, const GatePlacement& p) {
  return const_cast<Matrix4c&>(gate(static_cast<const MeraCircuit&>(c), p));
}

namespace {

MeraCircuit empty_layout(int n) {
  require_supported_size(n);
  MeraCircuit c;
  c.n = n;
  c.layers.resize(static_cast<std::size_t>(depth(n)));
  for (int tau = 1; tau <= depth(n); ++tau) {
    const int m = layer_width(n, tau);
    c.layers[tau - 1].disentanglers.assign(static_cast<std::size_t>(m / 2 - 1), Matrix4c::Identity());
    c.layers[tau - 1].isometries.assign(static_cast<std::size_t>(m / 2), Matrix4c::Identity());
  }
  return c;
}

}  // namespace

MeraCircuit random_mera(int n, Rng& rng) {
  MeraCircuit c = empty_layout(n);
  for (const auto& p : placements(n)) gate(c, p) = haar_unitary(4, rng);
  return c;
}

MeraCircuit identity_mera(int n) { return empty_layout(n); }

ValidationReport validate(const MeraCircuit& c, double unitary_tol) {
  ValidationReport report;
  auto add = [&](std::string kind, int layer, int block, std::string msg) {
    report.violations.push_back({std::move(kind), layer, block, std::move(msg)});
  };
  if (c.chi != 2) add("chi", 0, 0, "chi must be 2, got " + std::to_string(c.chi));
  if (c.n < 4 || c.n > 64 || !is_power_of_two(c.n)) {
    add("size", 0, 0, "n = " + std::to_string(c.n) + " is not a supported power of two");
    return report;
  }
  const int K = depth(c.n);
  if (static_cast<int>(c.layers.size()) != K) {
    add("layout", 0, 0,
        "expected " + std::to_string(K) + " layers, found " + std::to_string(c.layers.size()));
  }
  for (int tau = 1; tau <= std::min<int>(K, static_cast<int>(c.layers.size())); ++tau) {
    const int m = layer_width(c.n, tau);
    const auto& L = c.layers[tau - 1];
    const int nd = static_cast<int>(L.disentanglers.size());
    const int ni = static_cast<int>(L.isometries.size());
    if (nd != m / 2 - 1) {
      add("layout", tau, std::min(nd, m / 2 - 1) + 1,
          "layer " + std::to_string(tau) + " has " + std::to_string(nd) + " disentanglers, expected " +
              std::to_string(m / 2 - 1));
    }
    if (ni != m / 2) {
      add("layout", tau, std::min(ni, m / 2) + 1,
          "layer " + std::to_string(tau) + " has " + std::to_string(ni) + " isometries, expected " +
              std::to_string(m / 2));
    }
    auto check = [&](const Matrix4c& g, const char* what, int block) {
      const double d = unitarity_defect(g);
      if (!(d <= unitary_tol)) {
        std::ostringstream os;
        os << what << " (layer " << tau << ", block " << block << ") deviates from unitarity by " << d;
        add("unitarity", tau, block, os.str());
      }
    };
    for (int j = 0; j < nd; ++j) check(L.disentanglers[j], "disentangler", j + 1);
    for (int j = 0; j < ni; ++j) check(L.isometries[j], "isometry", j + 1);
  }
  const double d = unitarity_defect(c.top);
  if (!(d <= unitary_tol)) {
    std::ostringstream os;
    os << "top gate deviates from unitarity by " << d;
    add("unitarity", K + 1, 1, os.str());
  }
  return report;
}

double max_deviation(const MeraCircuit& a, const MeraCircuit& b) {
  if (a.n != b.n) throw InvalidArgument("max_deviation: circuits differ in size");
  double worst = 0.0;
  for (const auto& p : placements(a.n)) worst = std::max(worst, max_abs(gate(a, p) - gate(b, p)));
  return worst;
}

}  // namespace mera
