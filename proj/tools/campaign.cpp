#include "campaign.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <map>
#include <memory>
#include <thread>

#include "meralearn/errors.hpp"
#include "meralearn/io.hpp"
#include "meralearn/mera.hpp"
#include "meralearn/renormalizer.hpp"

namespace cli {

using nlohmann::json;

Mode parse_mode(const std::string& text) {
  if (text == "control") return Mode::control;
  if (text == "no-postselect" || text == "no_postselect") return Mode::no_postselect;
  if (text == "indirect") return Mode::indirect;
  throw mera::InvalidArgument("unknown mode '" + text + "' (control, no-postselect, indirect)");
}

const char* mode_name(Mode m) {
  switch (m) {
    case Mode::control: return "control";
    case Mode::no_postselect: return "no-postselect";
    case Mode::indirect: return "indirect";
  }
  return "?";
}

mera::TomoMode parse_tomo(const std::string& text) {
  if (text == "exact") return mera::TomoMode::exact;
  if (text == "sampled") return mera::TomoMode::sampled;
  throw mera::InvalidArgument("unknown tomography mode '" + text + "' (exact, sampled)");
}

void apply_json(CampaignConfig& cfg, const json& j) {
  if (!j.is_object()) throw mera::ParseError("config: expected a JSON object");
  try {
    if (j.contains("n")) cfg.n = j["n"].get<int>();
    if (j.contains("seed")) cfg.seed = j["seed"].get<std::uint64_t>();
    if (j.contains("sweeps")) cfg.sweeps = j["sweeps"].get<int>();
    if (j.contains("mode")) cfg.mode = parse_mode(j["mode"].get<std::string>());
    if (j.contains("tomo")) cfg.tomo = parse_tomo(j["tomo"].get<std::string>());
    if (j.contains("shots")) cfg.shots = j["shots"].get<long>();
    if (j.contains("sizes")) cfg.sizes = j["sizes"].get<std::vector<int>>();
    if (j.contains("seeds")) cfg.seeds = j["seeds"].get<std::vector<std::uint64_t>>();
    if (j.contains("jobs")) cfg.jobs = j["jobs"].get<int>();
    if (j.contains("out")) cfg.out = j["out"].get<std::string>();
    if (j.contains("optimizer")) {
      const json& o = j["optimizer"];
      if (o.contains("fd_step")) cfg.optimizer.fd_step = o["fd_step"].get<double>();
      if (o.contains("central_differences")) cfg.optimizer.central_differences = o["central_differences"].get<bool>();
      if (o.contains("max_iters")) cfg.optimizer.max_iters = o["max_iters"].get<int>();
      if (o.contains("restarts")) cfg.optimizer.restarts = o["restarts"].get<int>();
      if (o.contains("beta")) {
        const auto b = o["beta"].get<std::string>();
        if (b == "polak_ribiere_plus") cfg.optimizer.beta = mera::BetaFormula::polak_ribiere_plus;
        else if (b == "literal") cfg.optimizer.beta = mera::BetaFormula::literal;
        else throw mera::ParseError("config: unknown beta formula '" + b + "'");
      }
    }
  } catch (const json::exception& e) {
    throw mera::ParseError(std::string("config: ") + e.what());
  }
}

json to_json(const CampaignConfig& cfg) {
  json j;
  j["format_version"] = mera::kFormatVersion;
  j["n"] = cfg.n;
  j["seed"] = cfg.seed;
  j["sweeps"] = cfg.sweeps;
  j["mode"] = mode_name(cfg.mode);
  j["tomo"] = mera::tomo_mode_name(cfg.tomo);
  j["shots"] = cfg.shots;
  j["sizes"] = cfg.sizes;
  j["seeds"] = cfg.seeds;
  j["jobs"] = cfg.jobs;
  j["out"] = cfg.out;
  j["optimizer"] = {{"fd_step", cfg.optimizer.fd_step},
                    {"central_differences", cfg.optimizer.central_differences},
                    {"max_iters", cfg.optimizer.max_iters},
                    {"restarts", cfg.optimizer.restarts},
                    {"beta", cfg.optimizer.beta == mera::BetaFormula::literal ? "literal" : "polak_ribiere_plus"}};
  return j;
}

namespace {

mera::LearnerOptions learner_options(const CampaignConfig& cfg) {
  mera::LearnerOptions o;
  o.sweeps = cfg.sweeps;
  o.tomography = {cfg.tomo, cfg.shots};
  o.optimizer = cfg.optimizer;
  o.seed = cfg.seed;
  return o;
}

bool power_of_two(int n) { return n >= 4 && (n & (n - 1)) == 0; }

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t m = v.size() / 2;
  return v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

std::string num(double x) {
  if (!std::isfinite(x)) return "nan";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::string quote(const std::string& s) {
  if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

}  // namespace

LearnOutput run_learn(const mera::MeraCircuit& truth, const CampaignConfig& cfg) {
  if (cfg.sweeps < 1) throw mera::InvalidArgument("sweeps must be at least 1");
  const auto state = mera::generate_state(truth);
  LearnOutput out;
  out.row.n = truth.n;
  out.row.seed = cfg.seed;
  out.row.sweeps = cfg.sweeps;
  const auto start = std::chrono::steady_clock::now();
  switch (cfg.mode) {
    case Mode::control: {
      const auto r = mera::learn_mera(state, learner_options(cfg));
      out.row.infidelity = r.oracle_infidelity.value_or(std::nan(""));
      out.row.certified_bound = r.report.infidelity_bound;
      out.row.settings_count = r.settings_used;
      out.circuit_json = mera::serialize(r.circuit);
      out.report_json = mera::serialize(r);
      break;
    }
    case Mode::no_postselect: {
      const auto r = mera::learn_mera_no_postselect(state, learner_options(cfg));
      out.row.infidelity = r.diagnostics.oracle_infidelity;
      out.row.settings_count = r.diagnostics.settings_used;
      out.circuit_json = mera::serialize(r.circuit);
      out.report_json = mera::serialize(r.diagnostics);
      break;
    }
    case Mode::indirect: {
      mera::IndirectOptions o;
      o.learner = learner_options(cfg);
      o.mode = cfg.tomo;
      o.shots = cfg.shots;
      const auto r = mera::learn_mera_indirect(state, o);
      out.row.infidelity = r.diagnostics.oracle_infidelity;
      out.circuit_json = mera::serialize(r.circuit);
      out.report_json = mera::serialize(r.diagnostics);
      break;
    }
  }
  out.row.runtime_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return out;
}

std::vector<RunRow> run_benchmark(const CampaignConfig& cfg) {
  struct Task {
    int n;
    std::uint64_t seed;
  };
  std::vector<Task> tasks;
  for (int n : cfg.sizes)
    for (auto s : cfg.seeds) tasks.push_back({n, s});
  std::vector<RunRow> rows(tasks.size());

  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < tasks.size(); i = next++) {
      RunRow& row = rows[i];
      row.n = tasks[i].n;
      row.seed = tasks[i].seed;
      row.sweeps = cfg.sweeps;
      if (!power_of_two(row.n)) {
        row.status = "skipped";
        row.reason = "n is not a power of two; the binary MERA layout needs n = 2^K";
        continue;
      }
      try {
        CampaignConfig c = cfg;
        c.seed = row.seed;
        mera::Rng rng(row.seed);
        const auto truth = mera::random_mera(row.n, rng);
        row = run_learn(truth, c).row;
      } catch (const std::exception& e) {
        row.status = "failed";
        row.reason = e.what();
      }
    }
  };
  const int jobs = std::max(1, std::min<int>(cfg.jobs, static_cast<int>(tasks.size())));
  std::vector<std::thread> pool;
  for (int k = 1; k < jobs; ++k) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  return rows;
}

std::string csv_header() {
  return "n,seed,sweeps,infidelity,certified_bound,runtime_s,settings_count,status,reason\n";
}

std::string csv_row(const RunRow& r) {
  std::string s = std::to_string(r.n) + "," + std::to_string(r.seed) + "," + std::to_string(r.sweeps) + ",";
  const bool ok = r.status == "ok";
  s += (ok ? num(r.infidelity) : "") + ",";
  s += (ok && r.certified_bound ? num(*r.certified_bound) : "") + ",";
  s += (ok ? num(r.runtime_s) : "") + ",";
  s += (ok && r.settings_count ? std::to_string(*r.settings_count) : "") + ",";
  s += r.status + "," + quote(r.reason) + "\n";
  return s;
}

std::string summary_csv(const std::vector<RunRow>& rows) {
  std::map<int, std::vector<const RunRow*>> by_n;
  for (const auto& r : rows) by_n[r.n].push_back(&r);
  std::string s = "n,rows,rows_ok,median_infidelity,median_certified_bound,median_runtime_s,median_settings_count\n";
  for (const auto& [n, group] : by_n) {
    std::vector<double> inf, bound, rt, settings;
    for (const RunRow* r : group) {
      if (r->status != "ok") continue;
      inf.push_back(r->infidelity);
      rt.push_back(r->runtime_s);
      if (r->certified_bound) bound.push_back(*r->certified_bound);
      if (r->settings_count) settings.push_back(static_cast<double>(*r->settings_count));
    }
    s += std::to_string(n) + "," + std::to_string(group.size()) + "," + std::to_string(inf.size()) + ",";
    s += (inf.empty() ? "" : num(median(inf))) + ",";
    s += (bound.empty() ? "" : num(median(bound))) + ",";
    s += (rt.empty() ? "" : num(median(rt))) + ",";
    s += (settings.empty() ? "" : num(median(settings))) + "\n";
  }
  return s;
}

}  // namespace cli
