// SPDX-License-Identifier: Apache-2.0
//
// Flat key=value scenario files. Blank lines and text after '#' are
// ignored; lists are comma-separated. Recognised keys:
//
//   n_t, k_eves, n_an, modulation, gamma_d_db, gamma_e_db, sigma_d2,
//   sigma_e2, eps_d, eps_e, realizations, slots, seed, schemes, distances,
//   pathloss_exponent, probe_samples
//
// k_eves may list several values; each one is run as a separate series.
#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "cisec/evaluation.hpp"

namespace cisec {

/// Raised for malformed or unknown keys; `key()` names the offending key.
class ConfigError : public InvalidArgument {
 public:
  ConfigError(std::string key, const std::string& message)
      : InvalidArgument(message), key_(std::move(key)) {}
  const std::string& key() const { return key_; }

 private:
  std::string key_;
};

struct RunConfig {
  ExperimentConfig experiment;
  std::vector<int> eve_counts{4};

  /// Experiment for the i-th entry of eve_counts.
  ExperimentConfig for_eves(std::size_t index) const;
};

/// Defaults: N_T=8, K=4, N=3, QPSK, Gamma_d=10 dB, Gamma_e=5 dB, unit noise,
/// eps_d=0.1, eps_e=0.3, R=1000, S=1000, seed 1, path-loss exponent 2.7,
/// schemes conv,const,const_dest.
RunConfig default_run_config();

RunConfig parse_config(std::istream& in);
RunConfig parse_config_string(const std::string& text);
/// Applies one assignment on top of `cfg`; throws ConfigError.
void apply_setting(RunConfig& cfg, const std::string& key, const std::string& value);

/// Canonical key=value rendering, parseable by parse_config.
std::string to_config_text(const RunConfig& cfg);

const std::vector<std::string>& config_keys();

}  // namespace cisec
