// SPDX-License-Identifier: Apache-2.0
//
// Secure precoder designs reduced to conic programs, and a verifier that
// recomputes every constraint of a design against arbitrary channels.
//
//   conventional       SDP relaxation over (W_d, W_n), statistical SINRs
//   constructive       aggregate b, IR point in the constructive wedge,
//                      per-symbol magnitude cap |h_e^T b| <= Gt_e at Eves
//   const_dest         as above, Eve points in the upper destructive wedge
//   robust_conv        conventional with worst-case S-procedure LMIs
//   robust_const       const_dest with worst-case SOC constraints
#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "cisec/conic.hpp"
#include "cisec/model.hpp"
#include "cisec/relaxation.hpp"

namespace cisec {

enum class Scheme {
  conventional,
  constructive,
  constructive_destructive,
  robust_conventional,
  robust_constructive,
};

std::string scheme_id(Scheme scheme);
std::optional<Scheme> parse_scheme(const std::string& id);
/// True for the SDP-based designs that return a PrecoderBundle.
bool is_conventional(Scheme scheme);
bool is_robust(Scheme scheme);

struct PrecoderOptions {
  conic::SolverOptions solver;
  double rank_threshold = kRankOneThreshold;
  int randomization_trials = 200;
  std::uint64_t randomization_seed = 0;
  /// Tolerance used to accept an extracted or randomized beamformer.
  double verify_tol = 1e-6;
};

struct Diagnostics {
  conic::ResidualReport residuals;
  int iterations = 0;
  std::optional<RankReport> rank;
  std::vector<std::string> notes;
};

struct SolveOutcome {
  Scheme scheme = Scheme::conventional;
  conic::SolveStatus status = conic::SolveStatus::numerical_failure;
  /// ||b||^2 for symbol-level schemes; Tr(W_d) + Tr(W_n) for conventional.
  double transmit_power = 0.0;
  std::optional<Precoder> precoder;
  std::optional<PrecoderBundle> bundle;
  Diagnostics diagnostics;

  bool optimal() const { return status == conic::SolveStatus::optimal; }
};

SolveOutcome solve_conventional(const ChannelSet& channels, const Targets& targets, int an_streams,
                                const PrecoderOptions& options = {});
SolveOutcome solve_constructive(const ChannelSet& channels, const Targets& targets,
                                const Constellation& constellation,
                                const PrecoderOptions& options = {});
SolveOutcome solve_constructive_destructive(const ChannelSet& channels, const Targets& targets,
                                            const Constellation& constellation,
                                            const PrecoderOptions& options = {});
SolveOutcome solve_robust_conventional(const ChannelSet& estimate, const Uncertainty& uncertainty,
                                       const Targets& targets, int an_streams,
                                       const PrecoderOptions& options = {});
SolveOutcome solve_robust_constructive(const ChannelSet& estimate, const Uncertainty& uncertainty,
                                       const Targets& targets, const Constellation& constellation,
                                       const PrecoderOptions& options = {});

/// The conic program a symbol-level design solves (exposed for dumps and
/// benchmarks). Variables are [Re b; Im b; r].
conic::ConeProgram constructive_program(Scheme scheme, const ChannelSet& channels,
                                        const Targets& targets, const Constellation& constellation,
                                        const Uncertainty& uncertainty = {});
/// The relaxation solved by the conventional designs. Variables are the
/// Hermitian parameters of W_d followed by those of W_n, then multipliers.
conic::ConeProgram conventional_program(const ChannelSet& channels, const Targets& targets,
                                        const Uncertainty& uncertainty = {});

struct ConstraintResidual {
  std::string name;
  /// Signed margin; nonnegative when the constraint holds exactly.
  double slack = 0.0;
  bool satisfied = false;
};

struct VerificationReport {
  std::vector<ConstraintResidual> constraints;

  bool all_satisfied() const;
  int violations() const;
  double min_slack() const;
};

/// Recomputes the constraints of the outcome's formulation at its solution
/// against `channels`. With `uncertainty`, each constraint is checked in the
/// worst case over the error balls around `channels`. Conventional margins
/// are in units of the noise power; symbol-level margins are amplitudes.
/// Throws InvalidArgument for non-optimal outcomes or shape mismatches.
VerificationReport verify_solution(const SolveOutcome& outcome, const ChannelSet& channels,
                                   const Targets& targets, const Constellation& constellation,
                                   const std::optional<Uncertainty>& uncertainty = std::nullopt,
                                   double tol = 1e-6);

/// Allocation-light check of one realization of true channels, used by the
/// Monte-Carlo probes. Returns true when every constraint holds within tol.
bool satisfies_constraints(const SolveOutcome& outcome, const ChannelSet& channels,
                           const Targets& targets, const Constellation& constellation,
                           double tol = 1e-6);

/// Outcome record: scheme, status, power, precoder entries (interleaved
/// re/im), AN beams for bundles, and diagnostics.
std::string outcome_to_json(const SolveOutcome& outcome);
std::string outcome_csv_header();
std::string outcome_to_csv_row(const SolveOutcome& outcome);

}  // namespace cisec
