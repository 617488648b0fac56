#include "meralearn/io.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "meralearn/errors.hpp"

namespace mera {

using nlohmann::json;

namespace {

json gate_json(const Matrix4c& g) {
  json rows = json::array();
  for (int r = 0; r < 4; ++r) {
    json row = json::array();
    for (int c = 0; c < 4; ++c) row.push_back({g(r, c).real(), g(r, c).imag()});
    rows.push_back(std::move(row));
  }
  return rows;
}

Matrix4c gate_from_json(const json& j, const std::string& where) {
  if (!j.is_array() || j.size() != 4) throw ParseError(where + ": expected 4 rows");
  Matrix4c g;
  for (int r = 0; r < 4; ++r) {
    const json& row = j[r];
    if (!row.is_array() || row.size() != 4) {
      throw ParseError(where + ": row " + std::to_string(r) + " must have 4 entries");
    }
    for (int c = 0; c < 4; ++c) {
      const json& e = row[c];
      if (!e.is_array() || e.size() != 2 || !e[0].is_number() || !e[1].is_number()) {
        throw ParseError(where + ": entry (" + std::to_string(r) + "," + std::to_string(c) + ") must be [re, im]");
      }
      g(r, c) = Complex(e[0].get<double>(), e[1].get<double>());
    }
  }
  const double defect = unitarity_defect(g);
  if (!(defect <= default_tolerances().serialized_unitary)) {
    std::ostringstream os;
    os << where << ": gate is not unitary (defect " << defect << ")";
    throw ParseError(os.str());
  }
  return g;
}

json sites_json(const std::vector<int>& sites) { return json(sites); }

json number(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }

json steps_json(const std::vector<StepRecord>& steps) {
  json arr = json::array();
  for (const auto& s : steps) {
    arr.push_back({{"layer", s.layer},
                   {"block", s.block},
                   {"direction", direction_name(s.direction)},
                   {"sweep", s.sweep},
                   {"objective", number(s.objective)},
                   {"epsilon_step", number(s.epsilon_step)},
                   {"p_accept", number(s.p_accept)},
                   {"p_estimate", number(s.p_estimate)},
                   {"optimizer_failed", s.optimizer_failed},
                   {"injected", s.injected}});
  }
  return arr;
}

json conditioning_json(const std::vector<BlockConditioning>& cs) {
  json arr = json::array();
  for (const auto& c : cs) {
    arr.push_back({{"layer", c.layer},
                   {"block", sites_json(c.block)},
                   {"region", sites_json(c.region)},
                   {"min_eigenvalue", number(c.min_eigenvalue)},
                   {"worst_multiplier", number(c.worst_multiplier)},
                   {"candidates_tried", c.candidates_tried}});
  }
  return arr;
}

json matrix_json(const ComplexMatrix& m) {
  json rows = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back({m(r, c).real(), m(r, c).imag()});
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace

std::string serialize(const MeraCircuit& c) {
  json j;
  j["format_version"] = kFormatVersion;
  j["n"] = c.n;
  j["chi"] = c.chi;
  json layers = json::array();
  for (const auto& L : c.layers) {
    json d = json::array(), w = json::array();
    for (const auto& g : L.disentanglers) d.push_back(gate_json(g));
    for (const auto& g : L.isometries) w.push_back(gate_json(g));
    layers.push_back({{"disentanglers", std::move(d)}, {"isometries", std::move(w)}});
  }
  j["layers"] = std::move(layers);
  j["top"] = gate_json(c.top);
  return j.dump(1) + "\n";
}

MeraCircuit deserialize(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("circuit document: ") + e.what());
  }
  if (!j.is_object()) throw ParseError("circuit document: expected an object");
  for (const char* key : {"n", "chi", "layers", "top"})
    if (!j.contains(key)) throw ParseError(std::string("circuit document: missing field '") + key + "'");
  if (!j["n"].is_number_integer() || !j["chi"].is_number_integer()) {
    throw ParseError("circuit document: n and chi must be integers");
  }
  MeraCircuit c;
  c.n = j["n"].get<int>();
  c.chi = j["chi"].get<int>();
  if (c.chi != 2) throw ParseError("circuit document: chi must be 2");
  try {
    require_supported_size(c.n);
  } catch (const InvalidArgument& e) {
    throw ParseError(std::string("circuit document: ") + e.what());
  }
  const json& layers = j["layers"];
  const int K = depth(c.n);
  if (!layers.is_array() || static_cast<int>(layers.size()) != K) {
    throw ParseError("circuit document: expected " + std::to_string(K) + " layers");
  }
  for (int t = 1; t <= K; ++t) {
    const json& L = layers[t - 1];
    if (!L.is_object() || !L.contains("disentanglers") || !L.contains("isometries")) {
      throw ParseError("layer " + std::to_string(t) + ": missing disentanglers or isometries");
    }
    const int m = layer_width(c.n, t);
    Layer layer;
    const json& d = L["disentanglers"];
    const json& w = L["isometries"];
    if (!d.is_array() || static_cast<int>(d.size()) != m / 2 - 1) {
      throw ParseError("layer " + std::to_string(t) + ": expected " + std::to_string(m / 2 - 1) + " disentanglers");
    }
    if (!w.is_array() || static_cast<int>(w.size()) != m / 2) {
      throw ParseError("layer " + std::to_string(t) + ": expected " + std::to_string(m / 2) + " isometries");
    }
    for (std::size_t b = 0; b < d.size(); ++b) {
      layer.disentanglers.push_back(
          gate_from_json(d[b], "disentangler (layer " + std::to_string(t) + ", block " + std::to_string(b + 1) + ")"));
    }
    for (std::size_t b = 0; b < w.size(); ++b) {
      layer.isometries.push_back(
          gate_from_json(w[b], "isometry (layer " + std::to_string(t) + ", block " + std::to_string(b + 1) + ")"));
    }
    c.layers.push_back(std::move(layer));
  }
  c.top = gate_from_json(j["top"], "top gate");
  return c;
}

std::string serialize(const LearnResult& r) {
  const auto cert = certify(r.report);
  json j;
  j["format_version"] = kFormatVersion;
  j["kind"] = "certification_report";
  j["n"] = r.circuit.n;
  j["sweeps"] = r.report.sweeps_used;
  j["infidelity_bound"] = number(r.report.infidelity_bound);
  j["epsilon_product"] = number(cert.product);
  j["epsilon_cm"] = json::array();
  for (double e : r.report.epsilon_cm) j["epsilon_cm"].push_back(number(e));
  j["steps"] = steps_json(r.report.steps);
  j["oracle_infidelity"] = r.oracle_infidelity ? number(*r.oracle_infidelity) : json(nullptr);
  j["settings_used"] = r.settings_used;
  j["settings_formula"] = setting_count_formula();
  json rec = json::array();
  for (const auto& e : r.recommendations)
    rec.push_back({{"layer", e.layer}, {"block", e.block}, {"epsilon", number(e.epsilon)}, {"message", e.message}});
  j["recommendations"] = std::move(rec);
  return j.dump(1) + "\n";
}

std::string serialize(const NoPostselectDiagnostics& d) {
  json j;
  j["format_version"] = kFormatVersion;
  j["kind"] = "no_postselect_diagnostics";
  j["sweeps"] = d.sweeps_used;
  j["steps"] = steps_json(d.steps);
  j["oracle_infidelity"] = number(d.oracle_infidelity);
  j["settings_used"] = d.settings_used;
  return j.dump(1) + "\n";
}

std::string serialize(const IndirectDiagnostics& d) {
  json j;
  j["format_version"] = kFormatVersion;
  j["kind"] = "indirect_diagnostics";
  j["sweeps"] = d.sweeps_used;
  j["steps"] = steps_json(d.steps);
  j["conditioning"] = conditioning_json(d.conditioning);
  j["layer_worst_multiplier"] = json::array();
  for (double w : d.layer_worst_multiplier) j["layer_worst_multiplier"].push_back(number(w));
  j["total_multiplier"] = number(d.total_multiplier);
  j["oracle_infidelity"] = number(d.oracle_infidelity);
  return j.dump(1) + "\n";
}

std::string serialize(const TomographyEstimate& e) {
  json j;
  j["format_version"] = kFormatVersion;
  j["kind"] = "tomography_estimate";
  j["sites"] = sites_json(e.sites);
  j["mode"] = tomo_mode_name(e.mode);
  json recs = json::object();
  for (const auto& [p, r] : e.records) recs[p.to_string()] = {{"estimate", r.estimate}, {"shots", r.shots}};
  j["records"] = std::move(recs);
  j["rho_hat"] = matrix_json(e.rho_hat.matrix);
  return j.dump(1) + "\n";
}

std::string serialize(const ContractionStats& s) {
  json j;
  j["format_version"] = kFormatVersion;
  j["kind"] = "contraction_stats";
  j["max_open_bonds"] = s.max_open_bonds;
  j["multiply_adds"] = s.multiply_adds;
  j["columns"] = s.columns;
  return j.dump(1) + "\n";
}

std::string error_record(const std::string& type, const std::string& message) {
  json j;
  j["format_version"] = kFormatVersion;
  j["error"] = {{"type", type}, {"message", message}};
  return j.dump() + "\n";
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "' for reading");
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  out << text;
  if (!out) throw IoError("write to '" + path + "' failed");
}

}  // namespace mera
