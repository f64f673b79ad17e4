// SPDX-License-Identifier: Apache-2.0
#include <cmath>
#include <ostream>

#include "cisec/conic.hpp"

namespace cisec::conic {

std::string to_string(SolveStatus status) {
  switch (status) {
    case SolveStatus::optimal: return "optimal";
    case SolveStatus::infeasible: return "infeasible";
    case SolveStatus::unbounded: return "unbounded";
    case SolveStatus::numerical_failure: return "numerical_failure";
  }
  return "unknown";
}

Eigen::Index packed_size(int order) {
  return static_cast<Eigen::Index>(order) * (order + 1) / 2;
}

Eigen::Index packed_index(int order, int row, int col) {
  if (row < col) std::swap(row, col);
  const Eigen::Index offset =
      static_cast<Eigen::Index>(col) * order - static_cast<Eigen::Index>(col) * (col - 1) / 2;
  return offset + (row - col);
}

RVector pack_symmetric(const RMatrix& m) {
  require(m.rows() == m.cols(), "pack_symmetric: matrix must be square");
  const int order = static_cast<int>(m.rows());
  RVector v(packed_size(order));
  Eigen::Index k = 0;
  for (int j = 0; j < order; ++j) {
    v(k++) = m(j, j);
    for (int i = j + 1; i < order; ++i) v(k++) = std::sqrt(2.0) * 0.5 * (m(i, j) + m(j, i));
  }
  return v;
}

RMatrix unpack_symmetric(const RVector& v, int order) {
  require(v.size() == packed_size(order), "unpack_symmetric: length mismatch");
  RMatrix m(order, order);
  Eigen::Index k = 0;
  for (int j = 0; j < order; ++j) {
    m(j, j) = v(k++);
    for (int i = j + 1; i < order; ++i) {
      const double x = v(k++) / std::sqrt(2.0);
      m(i, j) = x;
      m(j, i) = x;
    }
  }
  return m;
}

void ConeProgram::add_block(ConeKind kind, RMatrix a, RVector b, int psd_order) {
  ConeBlock block;
  block.kind = kind;
  block.a = std::move(a);
  block.b = std::move(b);
  block.psd_order = psd_order;
  blocks.push_back(std::move(block));
}

void ConeProgram::validate() const {
  require(num_variables >= 1, "cone program needs at least one variable");
  require(objective.size() == num_variables, "objective length differs from variable count");
  require(objective.allFinite(), "objective has non-finite entries");
  for (const auto& block : blocks) {
    require(block.a.cols() == num_variables, "constraint block column count mismatch");
    require(block.a.rows() == block.b.size(), "constraint block offset length mismatch");
    require(block.a.allFinite() && block.b.allFinite(), "constraint block has non-finite data");
    switch (block.kind) {
      case ConeKind::zero:
      case ConeKind::nonnegative:
        require(block.rows() >= 1, "empty constraint block");
        break;
      case ConeKind::second_order:
        require(block.rows() >= 1, "second-order cone needs at least one row");
        break;
      case ConeKind::psd:
        require(block.psd_order >= 1, "PSD block needs a positive order");
        require(block.rows() == packed_size(block.psd_order),
                "PSD block rows must equal m(m+1)/2 for the declared order");
        break;
    }
  }
}

Eigen::Index ConeProgram::constraint_rows() const {
  Eigen::Index rows = 0;
  for (const auto& block : blocks) rows += block.rows();
  return rows;
}

void dump_program(std::ostream& out, const ConeProgram& program) {
  program.validate();
  out.precision(17);
  out << "cone_program " << program.num_variables << ' ' << program.constraint_rows() << '\n';
  out << "cones";
  for (const auto& block : program.blocks) {
    switch (block.kind) {
      case ConeKind::zero: out << " zero:" << block.rows(); break;
      case ConeKind::nonnegative: out << " nonneg:" << block.rows(); break;
      case ConeKind::second_order: out << " soc:" << block.rows(); break;
      case ConeKind::psd: out << " psd:" << block.psd_order; break;
    }
  }
  out << '\n';
  for (int j = 0; j < program.num_variables; ++j)
    if (program.objective(j) != 0.0) out << "c " << j << ' ' << program.objective(j) << '\n';
  Eigen::Index row0 = 0;
  for (const auto& block : program.blocks) {
    for (Eigen::Index i = 0; i < block.rows(); ++i) {
      for (Eigen::Index j = 0; j < block.a.cols(); ++j)
        if (block.a(i, j) != 0.0) out << "a " << row0 + i << ' ' << j << ' ' << block.a(i, j) << '\n';
      if (block.b(i) != 0.0) out << "b " << row0 + i << ' ' << block.b(i) << '\n';
    }
    row0 += block.rows();
  }
}

}  // namespace cisec::conic
