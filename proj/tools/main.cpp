// meralearn: generate random MERA circuits, learn them back, run benchmark
// campaigns and contract pairs of circuits.

#include <cstdio>
#include <filesystem>
#include <iostream>

#include <CLI11.hpp>

#include "campaign.hpp"
#include "meralearn/contraction.hpp"
#include "meralearn/errors.hpp"
#include "meralearn/io.hpp"
#include "meralearn/mera.hpp"

namespace {

using nlohmann::json;

enum ExitCode { kOk = 0, kFailure = 1, kUsage = 2, kBadInput = 3, kIo = 4, kCapacity = 5 };

struct Flags {
  int n = 8;
  std::uint64_t seed = 1;
  int sweeps = 3;
  std::string mode = "control";
  std::string tomo = "exact";
  long shots = 1000;
  std::vector<int> sizes;
  std::vector<std::uint64_t> seeds;
  int jobs = 1;
  std::string out;
  std::string config;
  std::string circuit;
  bool identity = false;
  std::string file_a, file_b;
};

struct Options {
  CLI::Option* n = nullptr;
  CLI::Option* seed = nullptr;
  CLI::Option* sweeps = nullptr;
  CLI::Option* mode = nullptr;
  CLI::Option* tomo = nullptr;
  CLI::Option* shots = nullptr;
  CLI::Option* sizes = nullptr;
  CLI::Option* seeds = nullptr;
  CLI::Option* jobs = nullptr;
  CLI::Option* out = nullptr;
};

bool given(const CLI::Option* o) { return o != nullptr && o->count() > 0; }

// config file first, explicit flags on top
cli::CampaignConfig resolve(const Flags& f, const Options& o) {
  cli::CampaignConfig cfg;
  if (!f.config.empty()) {
    json j;
    try {
      j = json::parse(mera::read_text_file(f.config));
    } catch (const json::exception& e) {
      throw mera::ParseError("config '" + f.config + "': " + e.what());
    }
    cli::apply_json(cfg, j);
  }
  if (given(o.n)) cfg.n = f.n;
  if (given(o.seed)) cfg.seed = f.seed;
  if (given(o.sweeps)) cfg.sweeps = f.sweeps;
  if (given(o.mode)) cfg.mode = cli::parse_mode(f.mode);
  if (given(o.tomo)) cfg.tomo = cli::parse_tomo(f.tomo);
  if (given(o.shots)) cfg.shots = f.shots;
  if (given(o.sizes)) cfg.sizes = f.sizes;
  if (given(o.seeds)) cfg.seeds = f.seeds;
  if (given(o.jobs)) cfg.jobs = f.jobs;
  if (given(o.out)) cfg.out = f.out;
  if (cfg.out.empty()) throw mera::InvalidArgument("--out is required");
  if (cfg.shots < 1) throw mera::InvalidArgument("--shots must be positive");
  return cfg;
}

void ensure_dir(const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw mera::IoError("cannot create directory '" + dir.string() + "': " + ec.message());
}

void ensure_parent(const std::string& file) {
  const auto parent = std::filesystem::path(file).parent_path();
  if (!parent.empty()) ensure_dir(parent);
}

int cmd_generate(const cli::CampaignConfig& cfg, bool identity) {
  mera::Rng rng(cfg.seed);
  const auto c = identity ? mera::identity_mera(cfg.n) : mera::random_mera(cfg.n, rng);
  ensure_parent(cfg.out);
  mera::write_text_file(cfg.out, mera::serialize(c));
  std::cout << json{{"format_version", mera::kFormatVersion}, {"n", c.n}, {"gates", mera::gate_count(c.n)},
                    {"out", cfg.out}}.dump()
            << "\n";
  return kOk;
}

int cmd_learn(const cli::CampaignConfig& cfg, const std::string& circuit_file) {
  mera::MeraCircuit truth;
  if (!circuit_file.empty()) {
    truth = mera::deserialize(mera::read_text_file(circuit_file));
  } else {
    mera::Rng rng(cfg.seed);
    truth = mera::random_mera(cfg.n, rng);
  }
  const auto result = cli::run_learn(truth, cfg);
  const std::filesystem::path dir(cfg.out);
  ensure_dir(dir);
  mera::write_text_file((dir / "reconstruction.json").string(), result.circuit_json);
  const char* report = cfg.mode == cli::Mode::control ? "report.json" : "diagnostics.json";
  mera::write_text_file((dir / report).string(), result.report_json);
  mera::write_text_file((dir / "timing.csv").string(), cli::csv_header() + cli::csv_row(result.row));

  json summary{{"format_version", mera::kFormatVersion},
               {"n", result.row.n},
               {"seed", result.row.seed},
               {"mode", cli::mode_name(cfg.mode)},
               {"sweeps", result.row.sweeps},
               {"infidelity", result.row.infidelity},
               {"runtime_s", result.row.runtime_s}};
  if (result.row.certified_bound) summary["certified_bound"] = *result.row.certified_bound;
  std::cout << summary.dump() << "\n";
  return kOk;
}

int cmd_benchmark(const cli::CampaignConfig& cfg) {
  const auto rows = cli::run_benchmark(cfg);
  std::string csv = cli::csv_header();
  int failed = 0;
  for (const auto& r : rows) {
    csv += cli::csv_row(r);
    if (r.status == "failed") ++failed;
  }
  ensure_parent(cfg.out);
  mera::write_text_file(cfg.out, csv);
  std::filesystem::path base(cfg.out);
  const std::string stem = (base.parent_path() / base.stem()).string();
  mera::write_text_file(stem + "_summary.csv", cli::summary_csv(rows));
  mera::write_text_file(stem + "_config.json", cli::to_json(cfg).dump(1) + "\n");
  std::cout << json{{"format_version", mera::kFormatVersion},
                    {"rows", rows.size()},
                    {"failed", failed},
                    {"out", cfg.out}}.dump()
            << "\n";
  return kOk;
}

int cmd_contract(const std::string& a_file, const std::string& b_file, const std::string& out) {
  const auto a = mera::deserialize(mera::read_text_file(a_file));
  const auto b = mera::deserialize(mera::read_text_file(b_file));
  if (a.n != b.n)
    throw mera::InvalidArgument("circuits have different sizes (" + std::to_string(a.n) + " and " +
                                std::to_string(b.n) + ")");
  const auto r = mera::overlap(a, b);
  const json j{{"format_version", mera::kFormatVersion},
               {"re", r.value.real()},
               {"im", r.value.imag()},
               {"fidelity", std::norm(r.value)},
               {"max_bonds", r.stats.max_open_bonds},
               {"multiply_adds", r.stats.multiply_adds},
               {"columns", r.stats.columns}};
  if (!out.empty()) {
    ensure_parent(out);
    mera::write_text_file(out, j.dump(1) + "\n");
  }
  std::cout << j.dump() << "\n";
  return kOk;
}

int fail(ExitCode code, const std::string& type, const std::string& message) {
  std::cerr << mera::error_record(type, message);
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Learn binary MERA circuits from simulated experiments"};
  app.require_subcommand(1);
  Flags f;

  auto add_common = [&f](CLI::App* sub, Options& o) {
    o.out = sub->add_option("--out", f.out, "Output path");
    sub->add_option("--config", f.config, "JSON campaign config; explicit flags take precedence");
  };
  auto add_learning = [&f](CLI::App* sub, Options& o) {
    o.sweeps = sub->add_option("--sweeps", f.sweeps, "Passes per layer");
    o.mode = sub->add_option("--mode", f.mode, "control, no-postselect or indirect");
    o.tomo = sub->add_option("--tomo", f.tomo, "exact or sampled");
    o.shots = sub->add_option("--shots", f.shots, "Shots per setting (sampled tomography)");
  };

  Options gen_opts, learn_opts, bench_opts, contract_opts;
  auto* gen = app.add_subcommand("generate", "Write a random MERA circuit");
  gen_opts.n = gen->add_option("--n", f.n, "Number of qubits (power of two)");
  gen_opts.seed = gen->add_option("--seed", f.seed, "Random seed");
  gen->add_flag("--identity", f.identity, "Write the identity circuit instead");
  add_common(gen, gen_opts);

  auto* learn = app.add_subcommand("learn", "Learn a circuit back from its state");
  learn->add_option("--circuit", f.circuit, "Circuit file; a random circuit from --n/--seed otherwise");
  learn_opts.n = learn->add_option("--n", f.n, "Number of qubits (power of two)");
  learn_opts.seed = learn->add_option("--seed", f.seed, "Random seed");
  add_learning(learn, learn_opts);
  add_common(learn, learn_opts);

  auto* bench = app.add_subcommand("benchmark", "Run a learning campaign and write CSV rows");
  bench_opts.sizes = bench->add_option("--sizes", f.sizes, "Sizes, e.g. 8,16")->delimiter(',');
  bench_opts.seeds = bench->add_option("--seeds", f.seeds, "Seeds, e.g. 1,2,3")->delimiter(',');
  bench_opts.jobs = bench->add_option("--jobs", f.jobs, "Worker threads");
  add_learning(bench, bench_opts);
  add_common(bench, bench_opts);

  auto* contract = app.add_subcommand("contract", "Overlap of two circuits by tensor contraction");
  contract->add_option("a", f.file_a, "First circuit")->required();
  contract->add_option("b", f.file_b, "Second circuit")->required();
  contract->add_option("--out", f.out, "Also write the result here");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return fail(kUsage, "usage", e.what());
  }

  try {
    if (*gen) return cmd_generate(resolve(f, gen_opts), f.identity);
    if (*learn) return cmd_learn(resolve(f, learn_opts), f.circuit);
    if (*bench) return cmd_benchmark(resolve(f, bench_opts));
    if (*contract) return cmd_contract(f.file_a, f.file_b, f.out);
  } catch (const mera::ParseError& e) {
    return fail(kBadInput, "parse_error", e.what());
  } catch (const mera::InvalidArgument& e) {
    return fail(kBadInput, "invalid_argument", e.what());
  } catch (const mera::IoError& e) {
    return fail(kIo, "io_error", e.what());
  } catch (const mera::CapacityError& e) {
    return fail(kCapacity, "capacity", e.what());
  } catch (const mera::PostSelectionError& e) {
    return fail(kFailure, "post_selection",
                std::string(e.what()) + " (layer " + std::to_string(e.layer()) + ", block " +
                    std::to_string(e.block()) + ")");
  } catch (const mera::RankDeficiencyError& e) {
    return fail(kFailure, "rank_deficiency", e.what());
  } catch (const std::exception& e) {
    return fail(kFailure, "error", e.what());
  }
  return kUsage;
}
