// SPDX-License-Identifier: Apache-2.0
#include "cisec/evaluation.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <limits>
#include <mutex>
#include <ostream>
#include <random>
#include <thread>

namespace cisec {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr double kProbeTol = 1e-6;

// Outcome of one scheme at one grid point of one realization.
struct Cell {
  conic::SolveStatus status = conic::SolveStatus::numerical_failure;
  double power = kNaN;
  std::int64_t errors = 0;
  std::int64_t slots = 0;
  std::int64_t eve_errors = 0;
  std::int64_t eve_trials = 0;
  std::int64_t violations = 0;
  std::int64_t probes = 0;
};

// cells[realization][grid * schemes + scheme]
using Table = std::vector<std::vector<Cell>>;

template <class Body>
void for_each_realization(int count, int threads, Body&& body) {
  const int workers = std::max(1, std::min(threads, count));
  if (workers == 1) {
    for (int r = 0; r < count; ++r) body(r);
    return;
  }
  std::atomic<int> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(workers));
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (int r = next++; r < count; r = next++) {
        try {
          body(r);
        } catch (...) {
          const std::lock_guard<std::mutex> lock(error_mutex);
          if (!error) error = std::current_exception();
          next = count;
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

SolveOutcome solve_scheme(Scheme scheme, const ChannelSet& ch, const Targets& t,
                          const Constellation& c, const ExperimentConfig& cfg,
                          const PrecoderOptions& options) {
  switch (scheme) {
    case Scheme::conventional: return solve_conventional(ch, t, cfg.an_streams, options);
    case Scheme::constructive: return solve_constructive(ch, t, c, options);
    case Scheme::constructive_destructive:
      return solve_constructive_destructive(ch, t, c, options);
    case Scheme::robust_conventional:
      return solve_robust_conventional(ch, cfg.uncertainty, t, cfg.an_streams, options);
    case Scheme::robust_constructive:
      return solve_robust_constructive(ch, cfg.uncertainty, t, c, options);
  }
  throw InvalidArgument("unknown scheme");
}

PrecoderOptions options_for(const ExperimentConfig& cfg, int realization, std::size_t grid_index) {
  PrecoderOptions opt = cfg.precoder;
  opt.randomization_seed = stream_seed(cfg.seed, static_cast<std::uint64_t>(realization),
                                       StreamTag::randomization, grid_index);
  return opt;
}

Complex complex_normal(double variance, Rng& rng) {
  std::normal_distribution<double> n(0.0, std::sqrt(0.5 * variance));
  const double re = n(rng);
  return {re, n(rng)};
}

// Slot-level simulation of one optimal outcome. Symbols and receiver noise
// come from `rng`, which every scheme replays identically; AN symbols use
// their own stream.
void simulate_slots(const SolveOutcome& o, const ChannelSet& ch, const Targets& t,
                    const Constellation& c, const std::optional<double>& noise_override,
                    int slots, Rng rng, Rng an_rng, Cell& cell) {
  const double noise_d = noise_override.value_or(t.sigma_d2);
  const double noise_e = noise_override.value_or(t.sigma_e2);
  const int m = c.order();
  std::uniform_int_distribution<int> pick(0, m - 1);
  const int k_eves = ch.eves();
  const bool conv = is_conventional(o.scheme);

  // Noise-free received amplitudes that do not depend on the slot.
  std::vector<Complex> gain_e(static_cast<std::size_t>(k_eves));
  Complex gain_d;
  double ref_d = 0.0;
  std::vector<double> ref_e(static_cast<std::size_t>(k_eves));
  std::vector<std::vector<Complex>> an_gain;  // [node][beam], node 0 = IR
  if (conv) {
    const PrecoderBundle& b = *o.bundle;
    gain_d = received_point(ch.h_d, b.b_d);
    ref_d = std::arg(gain_d);
    an_gain.resize(static_cast<std::size_t>(k_eves) + 1);
    for (const auto& beam : b.b_n) an_gain[0].push_back(received_point(ch.h_d, beam));
    for (int k = 0; k < k_eves; ++k) {
      const auto ku = static_cast<std::size_t>(k);
      gain_e[ku] = received_point(ch.h_e[ku], b.b_d);
      ref_e[ku] = std::arg(gain_e[ku]);
      for (const auto& beam : b.b_n) an_gain[ku + 1].push_back(received_point(ch.h_e[ku], beam));
    }
  } else {
    gain_d = received_point(ch.h_d, o.precoder->b);
    for (int k = 0; k < k_eves; ++k) {
      const auto ku = static_cast<std::size_t>(k);
      gain_e[ku] = received_point(ch.h_e[ku], o.precoder->b);
      ref_e[ku] = std::arg(gain_e[ku]);  // genie-aided Eve
    }
  }

  std::vector<Complex> an_symbols;
  for (int slot = 0; slot < slots; ++slot) {
    const int s = pick(rng);
    const Complex sym = c.symbol(s);
    if (conv) {
      an_symbols.resize(o.bundle->b_n.size());
      for (auto& a : an_symbols) a = complex_normal(1.0, an_rng);
    }
    const auto an_term = [&](std::size_t node) {
      Complex v = 0.0;
      if (conv)
        for (std::size_t i = 0; i < an_symbols.size(); ++i) v += an_gain[node][i] * an_symbols[i];
      return v;
    };
    const Complex y = gain_d * sym + an_term(0) + complex_normal(noise_d, rng);
    if (detect_psk(y, ref_d, c) != s) ++cell.errors;
    for (int k = 0; k < k_eves; ++k) {
      const auto ku = static_cast<std::size_t>(k);
      const Complex ye = gain_e[ku] * sym + an_term(ku + 1) + complex_normal(noise_e, rng);
      if (detect_psk(ye, ref_e[ku], c) != s) ++cell.eve_errors;
    }
  }
  cell.slots += slots;
  cell.eve_trials += static_cast<std::int64_t>(slots) * k_eves;
}

enum class Mode { power, ser, probe };

SweepResult run(const ExperimentConfig& cfg, Mode mode, const SolveObserver& observer) {
  cfg.validate();
  const std::vector<double> grid = cfg.grid_values_db();
  const std::size_t ng = grid.size();
  const std::size_t ns = cfg.schemes.size();
  const Constellation constellation = cfg.constellation();
  const ChannelConfig ccfg = cfg.channel_config();
  std::vector<Targets> targets;
  for (std::size_t g = 0; g < ng; ++g) targets.push_back(cfg.targets_at(g));

  Table table(static_cast<std::size_t>(cfg.realizations));
  std::mutex observer_mutex;
  for_each_realization(cfg.realizations, cfg.threads, [&](int r) {
    const auto ru = static_cast<std::uint64_t>(r);
    ChannelSet ch = sample_channels(ccfg, ru);
    if (mode == Mode::probe) ch.kind = ChannelKind::estimated;
    std::vector<Cell>& row = table[static_cast<std::size_t>(r)];
    row.assign(ng * ns, Cell{});
    for (std::size_t g = 0; g < ng; ++g) {
      std::vector<SolveOutcome> outcomes(ns);
      for (std::size_t s = 0; s < ns; ++s) {
        const Scheme scheme = cfg.schemes[s];
        if (observer) {
          const std::lock_guard<std::mutex> lock(observer_mutex);
          observer(r, g, scheme, ch);
        }
        outcomes[s] = solve_scheme(scheme, ch, targets[g], constellation, cfg, options_for(cfg, r, g));
        Cell& cell = row[g * ns + s];
        cell.status = outcomes[s].status;
        if (outcomes[s].optimal()) cell.power = outcomes[s].transmit_power;
      }
      if (mode == Mode::ser) {
        for (std::size_t s = 0; s < ns; ++s) {
          if (!outcomes[s].optimal()) continue;
          simulate_slots(outcomes[s], ch, targets[g], constellation, cfg.simulation_noise, cfg.slots,
                         make_stream(cfg.seed, ru, StreamTag::symbols, g),
                         make_stream(cfg.seed, ru, StreamTag::artificial_noise, g * ns + s),
                         row[g * ns + s]);
        }
      } else if (mode == Mode::probe) {
        Rng rng = make_stream(cfg.seed, ru, StreamTag::probe, g);
        for (int p = 0; p < cfg.probe_samples; ++p) {
          const ChannelSet truth = perturb(ch, cfg.uncertainty, cfg.probe_mode, rng);
          for (std::size_t s = 0; s < ns; ++s) {
            if (!outcomes[s].optimal()) continue;
            Cell& cell = row[g * ns + s];
            ++cell.probes;
            if (!satisfies_constraints(outcomes[s], truth, targets[g], constellation, kProbeTol))
              ++cell.violations;
          }
        }
      }
    }
  });

  // Deterministic reduction in realization order.
  SweepResult result;
  result.grid = cfg.grid();
  result.eves = cfg.eves;
  for (std::size_t s = 0; s < ns; ++s) {
    for (std::size_t g = 0; g < ng; ++g) {
      PointStats p;
      p.scheme = cfg.schemes[s];
      p.grid_value_db = grid[g];
      p.realizations = cfg.realizations;
      double power_sum = 0.0;
      std::int64_t errors = 0, eve_errors = 0, eve_trials = 0, violations = 0;
      for (const auto& row : table) {
        const Cell& cell = row[g * ns + s];
        p.powers.push_back(cell.power);
        if (cell.status == conic::SolveStatus::optimal) ++p.feasible;
        if (cell.status == conic::SolveStatus::numerical_failure) ++p.numerical_failures;
        bool joint = true;
        for (std::size_t o = 0; o < ns; ++o)
          joint = joint && row[g * ns + o].status == conic::SolveStatus::optimal;
        if (!joint) continue;
        ++p.joint_feasible;
        power_sum += cell.power;
        errors += cell.errors;
        p.slots += cell.slots;
        eve_errors += cell.eve_errors;
        eve_trials += cell.eve_trials;
        violations += cell.violations;
        p.probes += cell.probes;
      }
      p.mean_power = p.joint_feasible > 0 ? power_sum / p.joint_feasible : kNaN;
      if (mode == Mode::ser && p.slots > 0) {
        p.ser = static_cast<double>(errors) / static_cast<double>(p.slots);
        const Interval ci = wilson_interval(errors, p.slots);
        p.ser_low = ci.low;
        p.ser_high = ci.high;
        if (eve_trials > 0) p.eve_ser = static_cast<double>(eve_errors) / static_cast<double>(eve_trials);
      }
      if (mode == Mode::probe && p.probes > 0)
        p.violation_rate = static_cast<double>(violations) / static_cast<double>(p.probes);
      result.points.push_back(std::move(p));
    }
  }
  return result;
}

void put(std::ostream& out, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  out << buf;
}

}  // namespace

std::string grid_param_name(GridParam param) {
  return param == GridParam::gamma_d ? "gamma_d" : "gamma_e";
}

void ExperimentConfig::validate() const {
  require(antennas >= 1, "n_t must be at least 1");
  require(eves >= 0, "k_eves must be nonnegative");
  require(an_streams >= 0, "n_an must be nonnegative");
  require(modulation_order >= 3, "modulation order must be at least 3");
  require(!gamma_d_db.empty() && !gamma_e_db.empty(), "SINR grids must be nonempty");
  require(gamma_d_db.size() == 1 || gamma_e_db.size() == 1,
          "only one of gamma_d_db and gamma_e_db may list several values");
  require(sigma_d2 > 0.0 && sigma_e2 > 0.0, "noise powers must be positive");
  require(!simulation_noise || *simulation_noise >= 0.0, "simulation noise must be nonnegative");
  require(!schemes.empty(), "at least one scheme is required");
  require(realizations >= 1, "realizations must be at least 1");
  require(slots >= 1, "slots must be at least 1");
  require(probe_samples >= 1, "probe sample count must be at least 1");
  require(threads >= 1, "thread count must be at least 1");
  uncertainty.validate();
  channel_config().validate();
  for (std::size_t g = 0; g < grid_values_db().size(); ++g) targets_at(g).validate();
}

GridParam ExperimentConfig::grid() const {
  return gamma_e_db.size() > 1 && gamma_d_db.size() == 1 ? GridParam::gamma_e : GridParam::gamma_d;
}

std::vector<double> ExperimentConfig::grid_values_db() const {
  return grid() == GridParam::gamma_d ? gamma_d_db : gamma_e_db;
}

Targets ExperimentConfig::targets_at(std::size_t grid_index) const {
  const bool on_d = grid() == GridParam::gamma_d;
  const double gd = on_d ? gamma_d_db.at(grid_index) : gamma_d_db.front();
  const double ge = on_d ? gamma_e_db.front() : gamma_e_db.at(grid_index);
  return Targets::from_db(gd, ge, eves, sigma_d2, sigma_e2);
}

ChannelConfig ExperimentConfig::channel_config() const {
  ChannelConfig c;
  c.antennas = antennas;
  c.eves = eves;
  c.pathloss_exponent = pathloss_exponent;
  c.distances = distances;
  c.seed = seed;
  return c;
}

Constellation ExperimentConfig::constellation() const { return Constellation(modulation_order); }

const PointStats& SweepResult::at(Scheme scheme, std::size_t grid_index) const {
  std::size_t seen = 0;
  for (const auto& p : points) {
    if (p.scheme != scheme) continue;
    if (seen++ == grid_index) return p;
  }
  throw InvalidArgument("no result for scheme " + scheme_id(scheme) + " at grid index " +
                        std::to_string(grid_index));
}

SweepResult run_power_sweep(const ExperimentConfig& cfg, const SolveObserver& observer) {
  return run(cfg, Mode::power, observer);
}

SweepResult run_ser(const ExperimentConfig& cfg, const SolveObserver& observer) {
  return run(cfg, Mode::ser, observer);
}

SweepResult run_robust_probe(const ExperimentConfig& cfg, const SolveObserver& observer) {
  return run(cfg, Mode::probe, observer);
}

int detect_psk(Complex y, double reference_phase, const Constellation& constellation) {
  const int m = constellation.order();
  const double step = 2.0 * kPi / m;
  double u = (std::arg(y) - reference_phase - constellation.phase_offset()) / step;
  u = std::fmod(u, static_cast<double>(m));
  if (u < 0.0) u += m;
  // Sector of symbol i is (i - 1/2, i + 1/2] in units of `step`, except that
  // the wrap-around boundary belongs to symbol 0.
  if (u - 0.5 == m - 1) return 0;
  const int k = static_cast<int>(std::ceil(u - 0.5));
  return k % m;
}

Interval wilson_interval(std::int64_t successes, std::int64_t trials, double z) {
  require(trials > 0, "Wilson interval needs at least one trial");
  require(successes >= 0 && successes <= trials, "successes must lie in [0, trials]");
  const double n = static_cast<double>(trials);
  const double p = static_cast<double>(successes) / n;
  const double z2 = z * z;
  const double denom = 1.0 + z2 / n;
  const double centre = (p + z2 / (2.0 * n)) / denom;
  const double half = z * std::sqrt(p * (1.0 - p) / n + z2 / (4.0 * n * n)) / denom;
  return {std::max(0.0, centre - half), std::min(1.0, centre + half)};
}

std::string sweep_csv_header() {
  return "scheme,grid_param_name,grid_value_db,mean_power_w,mean_power_dbw,feasibility_rate,ser,"
         "ser_ci_low,ser_ci_high,violation_rate,n_realizations,n_slots";
}

void write_sweep_csv(std::ostream& out, const SweepResult& result) {
  out << sweep_csv_header() << '\n';
  const auto opt = [](const std::optional<double>& v) { return v ? *v : kNaN; };
  for (const auto& p : result.points) {
    const double dbw = p.mean_power > 0.0 ? linear_to_db(p.mean_power)
                       : p.mean_power == 0.0 ? -std::numeric_limits<double>::infinity()
                                             : kNaN;
    out << scheme_id(p.scheme) << ',' << grid_param_name(result.grid) << ',';
    put(out, p.grid_value_db);
    out << ',';
    put(out, p.mean_power);
    out << ',';
    put(out, dbw);
    out << ',';
    put(out, p.feasibility_rate());
    out << ',';
    put(out, opt(p.ser));
    out << ',';
    put(out, opt(p.ser_low));
    out << ',';
    put(out, opt(p.ser_high));
    out << ',';
    put(out, opt(p.violation_rate));
    out << ',' << p.joint_feasible << ',' << p.slots << '\n';
  }
}

}  // namespace cisec
