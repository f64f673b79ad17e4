// SPDX-License-Identifier: Apache-2.0
//
// Monte-Carlo experiment engine: power sweeps over an SINR grid, symbol
// error rate simulation and robustness probes against perturbed channels.
//
// Realizations are the unit of parallel work. Each one owns its random
// streams, and results are reduced in realization order, so the output
// does not depend on the thread count.
#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "cisec/channel.hpp"
#include "cisec/precoders.hpp"

namespace cisec {

enum class GridParam { gamma_d, gamma_e };

std::string grid_param_name(GridParam param);

struct ExperimentConfig {
  int antennas = 8;
  int eves = 4;
  int an_streams = 3;
  int modulation_order = 4;
  /// One of the two lists is the grid; the other holds a single value.
  std::vector<double> gamma_d_db{10.0};
  std::vector<double> gamma_e_db{5.0};
  double sigma_d2 = 1.0;
  double sigma_e2 = 1.0;
  /// Receiver noise variance used by the slot simulation in place of
  /// sigma_d2 / sigma_e2. Designs still use the configured values; this is
  /// for noiseless and noise-dominated limit runs.
  std::optional<double> simulation_noise;
  /// Used by the robust schemes only.
  Uncertainty uncertainty{0.1, 0.3};
  std::vector<Scheme> schemes{Scheme::conventional, Scheme::constructive,
                              Scheme::constructive_destructive};
  int realizations = 1000;
  int slots = 1000;
  /// True-channel draws per realization in robustness probes.
  int probe_samples = 10000;
  PerturbMode probe_mode = PerturbMode::sphere_surface;
  double pathloss_exponent = 2.7;
  std::vector<double> distances;
  std::uint64_t seed = 1;
  int threads = 1;
  PrecoderOptions precoder;

  /// Throws InvalidArgument on empty grids, a two-dimensional grid,
  /// nonpositive counts or invalid targets.
  void validate() const;
  GridParam grid() const;
  std::vector<double> grid_values_db() const;
  Targets targets_at(std::size_t grid_index) const;
  ChannelConfig channel_config() const;
  Constellation constellation() const;
};

/// Called once per solve with the channels handed to the scheme. Used to
/// audit that every scheme of a realization sees identical channels.
using SolveObserver = std::function<void(int realization, std::size_t grid_index, Scheme scheme,
                                         const ChannelSet& channels)>;

struct PointStats {
  Scheme scheme = Scheme::conventional;
  double grid_value_db = 0.0;
  int realizations = 0;
  int feasible = 0;
  int numerical_failures = 0;
  /// Realizations where every requested scheme was optimal.
  int joint_feasible = 0;
  /// Mean over the jointly feasible realizations; NaN when there are none.
  double mean_power = 0.0;
  /// Per-realization power, NaN when this scheme was not optimal.
  std::vector<double> powers;

  std::optional<double> ser;
  std::optional<double> ser_low;
  std::optional<double> ser_high;
  std::optional<double> eve_ser;
  std::int64_t slots = 0;

  std::optional<double> violation_rate;
  std::int64_t probes = 0;

  double feasibility_rate() const {
    return realizations > 0 ? static_cast<double>(feasible) / realizations : 0.0;
  }
};

struct SweepResult {
  GridParam grid = GridParam::gamma_d;
  int eves = 0;
  std::vector<PointStats> points;

  /// Lookup by scheme and grid index; throws InvalidArgument if absent.
  const PointStats& at(Scheme scheme, std::size_t grid_index) const;
};

/// Every scheme on identical channels per realization; power averaged over
/// realizations jointly feasible for all schemes.
SweepResult run_power_sweep(const ExperimentConfig& cfg, const SolveObserver& observer = {});

/// Symbol error rate at the intended receiver (and a genie-aided Eve as a
/// diagnostic), averaged over slots of the jointly feasible realizations.
SweepResult run_ser(const ExperimentConfig& cfg, const SolveObserver& observer = {});

/// Solves robust schemes and their non-robust counterparts on estimated
/// channels, then counts constraint violations over sampled true channels.
SweepResult run_robust_probe(const ExperimentConfig& cfg, const SolveObserver& observer = {});

/// Index of the PSK symbol whose decision sector contains arg(y) after
/// removing `reference_phase`. Exact boundary ties go to the lower index.
int detect_psk(Complex y, double reference_phase, const Constellation& constellation);

struct Interval {
  double low = 0.0;
  double high = 0.0;
};

/// Wilson score interval for a binomial proportion (z = 1.96 by default).
Interval wilson_interval(std::int64_t successes, std::int64_t trials, double z = 1.959963984540054);

std::string sweep_csv_header();
/// One row per (scheme, grid point) with the columns of sweep_csv_header().
void write_sweep_csv(std::ostream& out, const SweepResult& result);

}  // namespace cisec
