// SPDX-License-Identifier: Apache-2.0
//
// Post-processing for semidefinite relaxations: rank-one extraction,
// Gaussian randomization, and exact minimization of a Hermitian quadratic
// over a Euclidean ball (used to certify worst-case constraints).
#pragma once

#include <functional>
#include <optional>

#include "cisec/channel.hpp"
#include "cisec/types.hpp"

namespace cisec {

struct RankReport {
  double lambda1 = 0.0;
  double lambda2 = 0.0;
  /// lambda2 / lambda1 (0 for a zero matrix).
  double ratio = 0.0;
  bool rank_one = false;
  /// True when the returned vector came from Gaussian randomization.
  bool randomized = false;
  int randomization_trials = 0;
};

struct RankOneResult {
  CVector w;
  RankReport report;
};

inline constexpr double kRankOneThreshold = 1e-6;

/// w = sqrt(lambda1) u1 for the top eigenpair of W. Throws InvalidArgument
/// when W is not Hermitian or has an eigenvalue below -tol.
RankOneResult extract_rank_one(const CMatrix& w, double tol = 1e-8,
                               double threshold = kRankOneThreshold);

/// Problem-specific hooks for randomization.
struct RandomizationChecker {
  /// Rescales a candidate minimally so the primary (IR) constraint holds;
  /// nullopt when no scaling can satisfy it.
  std::function<std::optional<CVector>(const CVector&)> rescale;
  /// True when the rescaled candidate satisfies every other constraint.
  std::function<bool(const CVector&)> feasible;
};

/// Draws `trials` candidates w ~ CN(0, W), rescales each, keeps the
/// minimum-power survivor. Throws InvalidArgument when trials < 1.
std::optional<CVector> gaussian_randomization(const CMatrix& w, const RandomizationChecker& checker,
                                              int trials, Rng& rng);

/// min over ||e|| <= eps of e^H A e + 2 Re{b^H e} + c, A Hermitian.
double min_quadratic_over_ball(const CMatrix& a, const CVector& b, double c, double eps);

}  // namespace cisec
