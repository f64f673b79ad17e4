// SPDX-License-Identifier: Apache-2.0
#include "cisec/affine.hpp"

#include <algorithm>

namespace cisec::conic {

namespace {

void grow(RVector& v, Eigen::Index size) {
  if (v.size() >= size) return;
  const Eigen::Index old = v.size();
  v.conservativeResize(size);
  v.tail(size - old).setZero();
}

}  // namespace

AffineExpr AffineExpr::constant_term(double value) {
  AffineExpr e;
  e.constant = value;
  return e;
}

AffineExpr AffineExpr::variable(int index, double scale) {
  AffineExpr e;
  e.coeffs = RVector::Zero(index + 1);
  e.coeffs(index) = scale;
  return e;
}

double AffineExpr::value(const RVector& x) const {
  require(coeffs.size() <= x.size(), "affine expression refers to unknown variables");
  return coeffs.dot(x.head(coeffs.size())) + constant;
}

AffineExpr& AffineExpr::operator+=(const AffineExpr& other) {
  grow(coeffs, other.coeffs.size());
  coeffs.head(other.coeffs.size()) += other.coeffs;
  constant += other.constant;
  return *this;
}

AffineExpr& AffineExpr::operator-=(const AffineExpr& other) {
  grow(coeffs, other.coeffs.size());
  coeffs.head(other.coeffs.size()) -= other.coeffs;
  constant -= other.constant;
  return *this;
}

AffineExpr& AffineExpr::operator*=(double s) {
  coeffs *= s;
  constant *= s;
  return *this;
}

AffineExpr operator+(AffineExpr a, const AffineExpr& b) { return a += b; }
AffineExpr operator-(AffineExpr a, const AffineExpr& b) { return a -= b; }
AffineExpr operator-(AffineExpr a) { return a *= -1.0; }
AffineExpr operator*(double s, AffineExpr a) { return a *= s; }
AffineExpr operator+(AffineExpr a, double c) { return a += c; }
AffineExpr operator-(AffineExpr a, double c) { return a += -c; }

ComplexAffine& ComplexAffine::operator+=(const ComplexAffine& o) {
  re += o.re;
  im += o.im;
  return *this;
}

ComplexAffine& ComplexAffine::operator-=(const ComplexAffine& o) {
  re -= o.re;
  im -= o.im;
  return *this;
}

ComplexAffine operator+(ComplexAffine a, const ComplexAffine& b) { return a += b; }
ComplexAffine operator-(ComplexAffine a, const ComplexAffine& b) { return a -= b; }

ComplexAffine operator*(Complex s, const ComplexAffine& a) {
  return {s.real() * a.re - s.imag() * a.im, s.real() * a.im + s.imag() * a.re};
}

HermitianExpr::HermitianExpr(int order)
    : order_(order), entries_(static_cast<std::size_t>(order) * static_cast<std::size_t>(order)) {
  require(order >= 1, "Hermitian expression needs a positive order");
}

HermitianExpr HermitianExpr::constant(const CMatrix& value) {
  require(value.rows() == value.cols(), "constant Hermitian matrix must be square");
  HermitianExpr h(static_cast<int>(value.rows()));
  for (int j = 0; j < h.order_; ++j)
    for (int i = 0; i < h.order_; ++i) {
      h(i, j).re.constant = value(i, j).real();
      h(i, j).im.constant = value(i, j).imag();
    }
  return h;
}

HermitianExpr HermitianExpr::identity(int order, const AffineExpr& scale) {
  HermitianExpr h(order);
  for (int i = 0; i < order; ++i) h(i, i).re = scale;
  return h;
}

CMatrix HermitianExpr::value(const RVector& x) const {
  CMatrix out(order_, order_);
  for (int j = 0; j < order_; ++j)
    for (int i = 0; i < order_; ++i) out(i, j) = (*this)(i, j).value(x);
  return out;
}

AffineExpr HermitianExpr::trace() const {
  AffineExpr t;
  for (int i = 0; i < order_; ++i) t += (*this)(i, i).re;
  return t;
}

AffineExpr HermitianExpr::quadratic_form(const CVector& u) const {
  require(u.size() == order_, "quadratic form: dimension mismatch");
  // Re sum_ij conj(u_i) X_ij u_j; the imaginary part vanishes for Hermitian X.
  AffineExpr q;
  for (int j = 0; j < order_; ++j)
    for (int i = 0; i < order_; ++i) {
      const Complex w = std::conj(u(i)) * u(j);
      const ComplexAffine& x = (*this)(i, j);
      q += w.real() * x.re;
      q -= w.imag() * x.im;
    }
  return q;
}

std::vector<ComplexAffine> HermitianExpr::apply(const CVector& u) const {
  require(u.size() == order_, "matrix-vector product: dimension mismatch");
  std::vector<ComplexAffine> out(static_cast<std::size_t>(order_));
  for (int i = 0; i < order_; ++i)
    for (int j = 0; j < order_; ++j) out[static_cast<std::size_t>(i)] += u(j) * (*this)(i, j);
  return out;
}

HermitianExpr& HermitianExpr::operator+=(const HermitianExpr& o) {
  require(o.order_ == order_, "Hermitian expression order mismatch");
  for (std::size_t k = 0; k < entries_.size(); ++k) entries_[k] += o.entries_[k];
  return *this;
}

HermitianExpr& HermitianExpr::operator-=(const HermitianExpr& o) {
  require(o.order_ == order_, "Hermitian expression order mismatch");
  for (std::size_t k = 0; k < entries_.size(); ++k) entries_[k] -= o.entries_[k];
  return *this;
}

HermitianExpr& HermitianExpr::operator*=(double s) {
  for (auto& e : entries_) {
    e.re *= s;
    e.im *= s;
  }
  return *this;
}

HermitianExpr operator+(HermitianExpr a, const HermitianExpr& b) { return a += b; }
HermitianExpr operator-(HermitianExpr a, const HermitianExpr& b) { return a -= b; }
HermitianExpr operator*(double s, HermitianExpr a) { return a *= s; }

SymmetricExpr::SymmetricExpr(int order)
    : order_(order), lower_(static_cast<std::size_t>(packed_size(order))) {
  require(order >= 1, "symmetric expression needs a positive order");
}

AffineExpr& SymmetricExpr::operator()(int i, int j) {
  return lower_[static_cast<std::size_t>(packed_index(order_, i, j))];
}

const AffineExpr& SymmetricExpr::operator()(int i, int j) const {
  return lower_[static_cast<std::size_t>(packed_index(order_, i, j))];
}

RMatrix embed_hermitian_psd(const CMatrix& x) {
  require(x.rows() == x.cols(), "embed_hermitian_psd: matrix must be square");
  const double scale = std::max(1.0, x.cwiseAbs().maxCoeff());
  require((x - x.adjoint()).cwiseAbs().maxCoeff() <= 1e-10 * scale,
          "embed_hermitian_psd: matrix is not Hermitian");
  const Eigen::Index m = x.rows();
  RMatrix out(2 * m, 2 * m);
  out.topLeftCorner(m, m) = x.real();
  out.bottomRightCorner(m, m) = x.real();
  out.bottomLeftCorner(m, m) = x.imag();
  out.topRightCorner(m, m) = -x.imag();
  return out;
}

SymmetricExpr embed_hermitian_psd(const HermitianExpr& x) {
  const int m = x.order();
  SymmetricExpr out(2 * m);
  for (int j = 0; j < m; ++j)
    for (int i = j; i < m; ++i) {
      out(i, j) = x(i, j).re;
      out(i + m, j + m) = x(i, j).re;
    }
  // Lower-left block X_I covers every (m + i, j).
  for (int j = 0; j < m; ++j)
    for (int i = 0; i < m; ++i) out(i + m, j) = x(i, j).im;
  return out;
}

int ProgramBuilder::add_variables(int count) {
  require(count >= 0, "variable count must be nonnegative");
  const int first = num_variables_;
  num_variables_ += count;
  return first;
}

AffineExpr ProgramBuilder::variable(int index) const {
  require(index >= 0 && index < num_variables_, "variable index out of range");
  return AffineExpr::variable(index);
}

HermitianExpr ProgramBuilder::add_hermitian(int order) {
  const int base = add_variables(order * order);
  HermitianExpr h(order);
  int k = base;
  for (int i = 0; i < order; ++i) h(i, i).re = AffineExpr::variable(k++);
  for (int j = 0; j < order; ++j)
    for (int i = j + 1; i < order; ++i) {
      const AffineExpr re = AffineExpr::variable(k++);
      const AffineExpr im = AffineExpr::variable(k++);
      h(i, j) = {re, im};
      h(j, i) = {re, -im};
    }
  return h;
}

void ProgramBuilder::add_zero(const std::vector<AffineExpr>& rows) {
  blocks_.push_back({ConeKind::zero, rows, 0});
}

void ProgramBuilder::add_nonnegative(const std::vector<AffineExpr>& rows) {
  blocks_.push_back({ConeKind::nonnegative, rows, 0});
}

void ProgramBuilder::add_second_order(const std::vector<AffineExpr>& rows) {
  blocks_.push_back({ConeKind::second_order, rows, 0});
}

void ProgramBuilder::add_psd(const SymmetricExpr& matrix) {
  const int m = matrix.order();
  std::vector<AffineExpr> rows(static_cast<std::size_t>(packed_size(m)));
  for (int j = 0; j < m; ++j)
    for (int i = j; i < m; ++i) {
      AffineExpr e = matrix(i, j);
      if (i != j) e *= std::sqrt(2.0);
      rows[static_cast<std::size_t>(packed_index(m, i, j))] = std::move(e);
    }
  blocks_.push_back({ConeKind::psd, std::move(rows), m});
}

void ProgramBuilder::add_hermitian_psd(const HermitianExpr& matrix) {
  add_psd(embed_hermitian_psd(matrix));
}

ConeProgram ProgramBuilder::build() const {
  const int n = num_variables_;
  ConeProgram p(n);
  require(objective_.coeffs.size() <= n, "objective refers to unknown variables");
  p.objective.head(objective_.coeffs.size()) = objective_.coeffs;
  for (const auto& blk : blocks_) {
    const auto rows = static_cast<Eigen::Index>(blk.rows.size());
    RMatrix a = RMatrix::Zero(rows, n);
    RVector b(rows);
    for (Eigen::Index r = 0; r < rows; ++r) {
      const AffineExpr& e = blk.rows[static_cast<std::size_t>(r)];
      require(e.coeffs.size() <= n, "constraint refers to unknown variables");
      a.row(r).head(e.coeffs.size()) = e.coeffs.transpose();
      b(r) = e.constant;
    }
    p.add_block(blk.kind, std::move(a), std::move(b), blk.psd_order);
  }
  return p;
}

void s_procedure_block(ProgramBuilder& builder, const HermitianExpr& a,
                       const std::vector<ComplexAffine>& b, const AffineExpr& c, double eps,
                       const AffineExpr& lambda) {
  require(eps >= 0.0, "S-procedure radius must be nonnegative");
  const int m = a.order();
  require(static_cast<int>(b.size()) == m, "S-procedure: vector length differs from matrix order");
  HermitianExpr lmi(m + 1);
  for (int j = 0; j < m; ++j)
    for (int i = 0; i < m; ++i) lmi(i, j) = a(i, j);
  for (int i = 0; i < m; ++i) {
    lmi(i, i).re += lambda;
    lmi(i, m) = b[static_cast<std::size_t>(i)];
    lmi(m, i) = b[static_cast<std::size_t>(i)].conj();
  }
  lmi(m, m).re = c - (eps * eps) * lambda;
  builder.add_hermitian_psd(lmi);
  builder.add_nonnegative(lambda);
}

}  // namespace cisec::conic
