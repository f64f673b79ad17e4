// SPDX-License-Identifier: Apache-2.0
//
// Solver-agnostic conic programs and a dense primal-dual interior-point
// solver for them.
//
//   minimize    c^T x
//   subject to  A_k x + b_k in K_k   for every block k
//
// K_k is the zero cone, the nonnegative orthant, a second-order cone
// {(t, u) : ||u|| <= t}, or the cone of real symmetric PSD matrices.
//
// PSD packing (the single wire format between model builders and the
// solver): an m x m symmetric matrix is stored as its lower triangle in
// column-major order, m(m+1)/2 entries, with off-diagonal entries scaled by
// sqrt(2) so that the Euclidean inner product of packed vectors equals the
// trace inner product of the matrices.
#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "cisec/types.hpp"

namespace cisec::conic {

enum class ConeKind { zero, nonnegative, second_order, psd };

struct ConeBlock {
  ConeKind kind = ConeKind::nonnegative;
  RMatrix a;  ///< rows = cone dimension, cols = number of variables
  RVector b;
  int psd_order = 0;  ///< matrix order m for PSD blocks

  Eigen::Index rows() const { return a.rows(); }
};

struct ConeProgram {
  int num_variables = 0;
  RVector objective;
  std::vector<ConeBlock> blocks;

  explicit ConeProgram(int n = 0) : num_variables(n), objective(RVector::Zero(n)) {}

  void add_block(ConeKind kind, RMatrix a, RVector b, int psd_order = 0);
  /// Throws InvalidArgument when a block is malformed.
  void validate() const;
  Eigen::Index constraint_rows() const;
};

enum class SolveStatus { optimal, infeasible, unbounded, numerical_failure };

std::string to_string(SolveStatus status);

struct ResidualReport {
  double primal_infeasibility = 0.0;  ///< relative ||A x + b - s||
  double dual_infeasibility = 0.0;    ///< relative ||c - sum A_k^T z_k||
  double duality_gap = 0.0;           ///< relative gap
  double absolute_gap = 0.0;
};

struct ConeSolution {
  SolveStatus status = SolveStatus::numerical_failure;
  RVector primal;
  /// Multipliers stacked per block in block order (z_k in K_k^*).
  RVector dual;
  double objective = 0.0;
  double dual_objective = 0.0;
  ResidualReport residuals;
  int iterations = 0;
};

struct SolverOptions {
  double gap_tolerance = 1e-8;
  double feasibility_tolerance = 1e-8;
  int max_iterations = 200;
  /// Primal residual and relative gap accepted when the iteration limit or a
  /// stall is reached.
  double fallback_tolerance = 1e-7;
  /// Dual residual accepted in that case. Degenerate SDP optima (rank-one
  /// solutions) often lose dual accuracy before the primal side converges.
  double fallback_dual_tolerance = 1e-6;
  /// Print one line per iteration to stderr.
  bool verbose = false;
};

ConeSolution solve(const ConeProgram& program, const SolverOptions& options = {});

// PSD packing helpers.
Eigen::Index packed_size(int order);
RVector pack_symmetric(const RMatrix& m);
RMatrix unpack_symmetric(const RVector& v, int order);
/// Index in the packed vector of entry (row, col), row >= col.
Eigen::Index packed_index(int order, int row, int col);

/// Plain-text sparse dump for cross-solver diffing:
///   cone_program <n> <rows>
///   cones <kind:dim or psd:m> ...
///   c <j> <value>          (nonzeros)
///   a <i> <j> <value>      (nonzeros of the stacked block matrices)
///   b <i> <value>          (nonzeros of the stacked offsets)
void dump_program(std::ostream& out, const ConeProgram& program);

}  // namespace cisec::conic
