// SPDX-License-Identifier: Apache-2.0
//
// cisec: command-line front end for the precoder laboratory.
//
//   cisec solve  --config FILE [--channels CSV] [--scheme ID] [--realization R]
//   cisec sweep  --config FILE --out DIR [--threads N]
//   cisec ser    --config FILE --out DIR [--threads N]
//   cisec robust --config FILE --out DIR [--threads N]
//
// Exit codes: 0 optimal / success, 1 usage or configuration error,
// 2 infeasible, 3 numerical failure or any other runtime fault.
#include <chrono>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "cisec/config.hpp"
#include "cisec/evaluation.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitInfeasible = 2;
constexpr int kExitNumerical = 3;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Common {
  std::string config_path;
  std::vector<std::string> overrides;
  int threads = 0;
};

cisec::RunConfig load_config(const Common& c) {
  cisec::RunConfig cfg = cisec::default_run_config();
  if (!c.config_path.empty()) {
    std::ifstream in(c.config_path);
    if (!in) throw UsageError("cannot open config file '" + c.config_path + "'");
    cfg = cisec::parse_config(in);
  }
  for (const auto& o : c.overrides) {
    const auto eq = o.find('=');
    if (eq == std::string::npos) throw UsageError("--set expects key=value, got '" + o + "'");
    cisec::apply_setting(cfg, o.substr(0, eq), o.substr(eq + 1));
  }
  // Re-validate after overrides; the error text names the offending value.
  return cisec::parse_config_string(cisec::to_config_text(cfg));
}

int default_threads() {
  const unsigned n = std::thread::hardware_concurrency();
  return n == 0 ? 1 : static_cast<int>(n);
}

int exit_for(cisec::conic::SolveStatus s) {
  switch (s) {
    case cisec::conic::SolveStatus::optimal: return kExitOk;
    case cisec::conic::SolveStatus::infeasible: return kExitInfeasible;
    default: return kExitNumerical;
  }
}

// Writes through a sibling temp file and renames it into place, so readers
// never see a partial file.
void write_atomic(const fs::path& path, const std::string& content) {
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write '" + tmp.string() + "'");
    out << content;
    out.flush();
    if (!out) throw std::runtime_error("write failed for '" + tmp.string() + "'");
  }
  fs::rename(tmp, path);
}

int cmd_solve(const Common& c, const std::string& channels_path, const std::string& scheme_name,
              int realization, std::size_t grid_index, const std::string& format) {
  const cisec::RunConfig run = load_config(c);
  cisec::ExperimentConfig cfg = run.for_eves(0);

  cisec::ChannelSet ch;
  if (!channels_path.empty()) {
    std::ifstream in(channels_path);
    if (!in) throw UsageError("cannot open channel file '" + channels_path + "'");
    ch = cisec::read_channels_csv(in);
    // The fixture fixes the antenna and eavesdropper counts.
    cfg.antennas = static_cast<int>(ch.h_d.size());
    cfg.eves = ch.eves();
  } else {
    if (realization < 0) throw UsageError("--realization must be nonnegative");
    ch = cisec::sample_channels(cfg.channel_config(), static_cast<std::uint64_t>(realization));
  }
  cfg.validate();

  cisec::Scheme scheme = cfg.schemes.front();
  if (!scheme_name.empty()) {
    const auto s = cisec::parse_scheme(scheme_name);
    if (!s) throw UsageError("unknown scheme '" + scheme_name + "'");
    scheme = *s;
  }
  if (grid_index >= cfg.grid_values_db().size())
    throw UsageError("--grid-index out of range for the configured grid");
  if (cisec::is_robust(scheme)) ch.kind = cisec::ChannelKind::estimated;

  const cisec::Targets targets = cfg.targets_at(grid_index);
  const cisec::Constellation constellation = cfg.constellation();
  cisec::PrecoderOptions opt = cfg.precoder;
  opt.randomization_seed =
      cisec::stream_seed(cfg.seed, static_cast<std::uint64_t>(std::max(realization, 0)),
                         cisec::StreamTag::randomization, grid_index);

  cisec::SolveOutcome o;
  switch (scheme) {
    case cisec::Scheme::conventional:
      o = cisec::solve_conventional(ch, targets, cfg.an_streams, opt);
      break;
    case cisec::Scheme::constructive:
      o = cisec::solve_constructive(ch, targets, constellation, opt);
      break;
    case cisec::Scheme::constructive_destructive:
      o = cisec::solve_constructive_destructive(ch, targets, constellation, opt);
      break;
    case cisec::Scheme::robust_conventional:
      o = cisec::solve_robust_conventional(ch, cfg.uncertainty, targets, cfg.an_streams, opt);
      break;
    case cisec::Scheme::robust_constructive:
      o = cisec::solve_robust_constructive(ch, cfg.uncertainty, targets, constellation, opt);
      break;
  }

  if (format == "csv") {
    std::cout << cisec::outcome_csv_header() << '\n' << cisec::outcome_to_csv_row(o) << '\n';
  } else {
    std::cout << cisec::outcome_to_json(o) << '\n';
  }
  return exit_for(o.status);
}

json point_summary(const cisec::PointStats& p) {
  json j;
  j["scheme"] = cisec::scheme_id(p.scheme);
  j["grid_value_db"] = p.grid_value_db;
  j["realizations"] = p.realizations;
  j["feasible"] = p.feasible;
  j["numerical_failures"] = p.numerical_failures;
  j["joint_feasible"] = p.joint_feasible;
  if (p.eve_ser) j["eve_ser"] = *p.eve_ser;
  return j;
}

enum class Experiment { sweep, ser, robust };

const char* experiment_name(Experiment e) {
  switch (e) {
    case Experiment::sweep: return "sweep";
    case Experiment::ser: return "ser";
    case Experiment::robust: return "robust";
  }
  return "?";
}

int cmd_experiment(const Common& c, Experiment kind, const std::string& out_dir) {
  const cisec::RunConfig run = load_config(c);
  const int threads = c.threads > 0 ? c.threads : default_threads();
  if (c.threads < 0) throw UsageError("--threads must be positive");

  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) throw UsageError("cannot create output directory '" + out_dir + "': " + ec.message());

  const auto start = std::chrono::steady_clock::now();
  // Every series is computed before anything is written.
  std::vector<std::pair<std::string, cisec::SweepResult>> series;
  for (std::size_t i = 0; i < run.eve_counts.size(); ++i) {
    cisec::ExperimentConfig cfg = run.for_eves(i);
    cfg.threads = threads;
    cisec::SweepResult r;
    switch (kind) {
      case Experiment::sweep: r = cisec::run_power_sweep(cfg); break;
      case Experiment::ser: r = cisec::run_ser(cfg); break;
      case Experiment::robust: r = cisec::run_robust_probe(cfg); break;
    }
    const std::string file =
        std::string(experiment_name(kind)) + "_K" + std::to_string(cfg.eves) + ".csv";
    series.emplace_back(file, std::move(r));
  }
  const double wall =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  json manifest;
  manifest["command"] = experiment_name(kind);
  manifest["version"] = CISEC_VERSION;
  manifest["git_describe"] = CISEC_GIT_DESCRIBE;
  manifest["config"] = cisec::to_config_text(run);
  manifest["seed"] = run.experiment.seed;
  manifest["threads"] = threads;
  manifest["wall_time_s"] = wall;
  json outputs = json::array();
  for (const auto& [file, result] : series) {
    std::ostringstream csv;
    cisec::write_sweep_csv(csv, result);
    write_atomic(fs::path(out_dir) / file, csv.str());
    json points = json::array();
    for (const auto& p : result.points) points.push_back(point_summary(p));
    outputs.push_back({{"file", file}, {"eves", result.eves}, {"points", points}});
  }
  manifest["outputs"] = outputs;
  write_atomic(fs::path(out_dir) / (std::string(experiment_name(kind)) + "_manifest.json"),
               manifest.dump(2) + "\n");
  for (const auto& s : series) std::cout << (fs::path(out_dir) / s.first).string() << '\n';
  return kExitOk;
}

void add_common(CLI::App* app, Common& c) {
  app->add_option("-c,--config", c.config_path, "key=value scenario file");
  app->add_option("--set", c.overrides, "override one key (key=value); repeatable");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Secure symbol-level and AN precoder laboratory"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(CISEC_VERSION) + " (" + CISEC_GIT_DESCRIBE + ")");

  Common common;
  std::string channels_path, scheme_name, format = "json", out_dir;
  int realization = 0;
  std::size_t grid_index = 0;

  CLI::App* solve = app.add_subcommand("solve", "solve one scheme on one realization");
  add_common(solve, common);
  solve->add_option("--channels", channels_path, "channel fixture CSV (node,re0,im0,...)");
  solve->add_option("--scheme", scheme_name,
                    "conv|const|const_dest|robust_conv|robust_const (default: first in config)");
  solve->add_option("--realization", realization, "realization index for sampled channels");
  solve->add_option("--grid-index", grid_index, "grid point to solve (default 0)");
  solve->add_option("--format", format, "json or csv")->check(CLI::IsMember({"json", "csv"}));

  std::vector<std::pair<CLI::App*, Experiment>> experiments;
  for (auto [name, kind, help] :
       {std::tuple{"sweep", Experiment::sweep, "mean transmit power over the SINR grid"},
        std::tuple{"ser", Experiment::ser, "symbol error rate over the SINR grid"},
        std::tuple{"robust", Experiment::robust, "robust designs against sampled CSI errors"}}) {
    CLI::App* sub = app.add_subcommand(name, help);
    add_common(sub, common);
    sub->add_option("-o,--out", out_dir, "output directory")->required();
    sub->add_option("-j,--threads", common.threads, "worker threads (default: all cores)");
    experiments.emplace_back(sub, kind);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e) == 0 ? kExitOk : kExitUsage;
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (solve->parsed())
      return cmd_solve(common, channels_path, scheme_name, realization, grid_index, format);
    for (const auto& [sub, kind] : experiments)
      if (sub->parsed()) return cmd_experiment(common, kind, out_dir);
    return kExitUsage;
  } catch (const cisec::ConfigError& e) {
    std::cerr << "cisec: config error";
    if (!e.key().empty()) std::cerr << " [" << e.key() << "]";
    std::cerr << ": " << e.what() << '\n';
    return kExitUsage;
  } catch (const UsageError& e) {
    std::cerr << "cisec: " << e.what() << '\n';
    return kExitUsage;
  } catch (const cisec::InvalidArgument& e) {
    std::cerr << "cisec: invalid input: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "cisec: error: " << e.what() << '\n';
    return kExitNumerical;
  } catch (...) {
    std::cerr << "cisec: unknown error\n";
    return kExitNumerical;
  }
}
