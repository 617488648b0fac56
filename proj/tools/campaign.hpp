#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "meralearn/learner.hpp"

namespace cli {

enum class Mode { control, no_postselect, indirect };

Mode parse_mode(const std::string& text);
const char* mode_name(Mode m);
mera::TomoMode parse_tomo(const std::string& text);

struct CampaignConfig {
  int n = 8;
  std::uint64_t seed = 1;
  int sweeps = 3;
  Mode mode = Mode::control;
  mera::TomoMode tomo = mera::TomoMode::exact;
  long shots = 1000;
  std::vector<int> sizes{8, 16};
  std::vector<std::uint64_t> seeds{1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
  int jobs = 1;
  std::string out;
  mera::OptimizerOptions optimizer;
};

/// Keys present in `j` overwrite the corresponding fields.
void apply_json(CampaignConfig& cfg, const nlohmann::json& j);
nlohmann::json to_json(const CampaignConfig& cfg);

struct RunRow {
  int n = 0;
  std::uint64_t seed = 0;
  int sweeps = 0;
  double infidelity = 0.0;
  std::optional<double> certified_bound;
  double runtime_s = 0.0;
  std::optional<long> settings_count;
  std::string status = "ok";
  std::string reason;
};

struct LearnOutput {
  RunRow row;
  std::string circuit_json;
  std::string report_json;
};

/// One learning run on `truth` with the configured mode.
LearnOutput run_learn(const mera::MeraCircuit& truth, const CampaignConfig& cfg);

/// Rows for every (size, seed); unsupported sizes and failed runs become
/// flagged rows instead of errors.
std::vector<RunRow> run_benchmark(const CampaignConfig& cfg);

std::string csv_header();
std::string csv_row(const RunRow& r);
/// Medians per size over the rows with status ok.
std::string summary_csv(const std::vector<RunRow>& rows);

}  // namespace cli
