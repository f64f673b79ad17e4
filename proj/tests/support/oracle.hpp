// SPDX-License-Identifier: Apache-2.0
//
// Solver-free reference values for N_T = 2, K = 1 instances, found by a
// coarse-to-fine grid search over four real parameters.
//
// Symbol-level designs: with H = [h_d^T; h_e^T] invertible, b = H^-1 y is
// fixed by the two received points, so the search runs over polar
// coordinates of y_d (IR wedge) and y_e (Eve disk or upper wedge) and
// minimizes ||H^-1 y||^2.
//
// Conventional: W_d = P u u^H and W_n = c v v^H. The search runs over the
// unit directions u and v; for fixed directions (P, c) solve a two-variable
// LP in closed form.
#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "cisec/model.hpp"

namespace cisec::oracle {

struct GridSearchOptions {
  int coarse_points = 31;
  int fine_points = 7;
  int candidates = 6;
  int max_rounds = 200;
  double min_width = 1e-11;
};

/// Minimizes f over the box [lo, hi]; `periodic[i]` lets dimension i wrap
/// instead of clamping. f returns +inf outside its domain.
double coarse_to_fine(const std::function<double(const std::vector<double>&)>& f,
                      const std::vector<double>& lo, const std::vector<double>& hi,
                      const std::vector<bool>& periodic, const GridSearchOptions& opt = {});

/// Minimum of ||b||^2 for the constructive design (destructive = false) or
/// the constructive-destructive design (destructive = true).
double symbol_level_power(const ChannelSet& ch, const Targets& t, const Constellation& c,
                          bool destructive);

/// Minimum of Tr(W_d) + Tr(W_n); nullopt when the search finds no feasible point.
std::optional<double> conventional_power(const ChannelSet& ch, const Targets& t);

}  // namespace cisec::oracle
