// SPDX-License-Identifier: Apache-2.0
//
// Small dense modeling layer on top of ConeProgram: affine expressions in
// the decision variables, complex and Hermitian-matrix expressions, and a
// builder that collects cone constraints row by row.
#pragma once

#include <vector>

#include "cisec/conic.hpp"

namespace cisec::conic {

/// sum_j coeffs(j) x_j + constant. Coefficient vectors are sized lazily, so
/// expressions created before later variables were added stay valid.
struct AffineExpr {
  RVector coeffs;
  double constant = 0.0;

  static AffineExpr constant_term(double value);
  static AffineExpr variable(int index, double scale = 1.0);

  double coeff(int index) const { return index < coeffs.size() ? coeffs(index) : 0.0; }
  double value(const RVector& x) const;

  AffineExpr& operator+=(const AffineExpr& other);
  AffineExpr& operator-=(const AffineExpr& other);
  AffineExpr& operator*=(double s);
  AffineExpr& operator+=(double c) {
    constant += c;
    return *this;
  }
};

AffineExpr operator+(AffineExpr a, const AffineExpr& b);
AffineExpr operator-(AffineExpr a, const AffineExpr& b);
AffineExpr operator-(AffineExpr a);
AffineExpr operator*(double s, AffineExpr a);
AffineExpr operator+(AffineExpr a, double c);
AffineExpr operator-(AffineExpr a, double c);

struct ComplexAffine {
  AffineExpr re;
  AffineExpr im;

  Complex value(const RVector& x) const { return {re.value(x), im.value(x)}; }
  ComplexAffine conj() const { return {re, -im}; }
  ComplexAffine& operator+=(const ComplexAffine& o);
  ComplexAffine& operator-=(const ComplexAffine& o);
};

ComplexAffine operator+(ComplexAffine a, const ComplexAffine& b);
ComplexAffine operator-(ComplexAffine a, const ComplexAffine& b);
ComplexAffine operator*(Complex s, const ComplexAffine& a);

/// Square matrix of complex affine entries; Hermitian when built by
/// ProgramBuilder::add_hermitian or by combining Hermitian expressions.
class HermitianExpr {
 public:
  HermitianExpr() = default;
  explicit HermitianExpr(int order);
  /// Constant Hermitian matrix.
  static HermitianExpr constant(const CMatrix& value);
  static HermitianExpr identity(int order, const AffineExpr& scale);

  int order() const { return order_; }
  ComplexAffine& operator()(int i, int j) { return entries_[index(i, j)]; }
  const ComplexAffine& operator()(int i, int j) const { return entries_[index(i, j)]; }

  CMatrix value(const RVector& x) const;
  AffineExpr trace() const;
  /// u^H X u, real for Hermitian X.
  AffineExpr quadratic_form(const CVector& u) const;
  /// X u.
  std::vector<ComplexAffine> apply(const CVector& u) const;

  HermitianExpr& operator+=(const HermitianExpr& o);
  HermitianExpr& operator-=(const HermitianExpr& o);
  HermitianExpr& operator*=(double s);

 private:
  std::size_t index(int i, int j) const {
    return static_cast<std::size_t>(j) * static_cast<std::size_t>(order_) + static_cast<std::size_t>(i);
  }
  int order_ = 0;
  std::vector<ComplexAffine> entries_;
};

HermitianExpr operator+(HermitianExpr a, const HermitianExpr& b);
HermitianExpr operator-(HermitianExpr a, const HermitianExpr& b);
HermitianExpr operator*(double s, HermitianExpr a);

/// Real symmetric matrix of affine entries (lower triangle is authoritative).
class SymmetricExpr {
 public:
  explicit SymmetricExpr(int order);
  int order() const { return order_; }
  AffineExpr& operator()(int i, int j);
  const AffineExpr& operator()(int i, int j) const;

 private:
  int order_;
  std::vector<AffineExpr> lower_;
};

/// [[X_R, -X_I], [X_I, X_R]]; PSD exactly when X is, with every eigenvalue
/// of X appearing twice. Throws InvalidArgument unless X is Hermitian to 1e-10.
RMatrix embed_hermitian_psd(const CMatrix& x);
SymmetricExpr embed_hermitian_psd(const HermitianExpr& x);

class ProgramBuilder {
 public:
  /// Allocates `count` scalar variables and returns the first index.
  int add_variables(int count);
  AffineExpr variable(int index) const;
  /// Allocates order^2 real parameters: diagonal, then (re, im) of each
  /// strictly-lower entry; the upper triangle mirrors as conjugates.
  HermitianExpr add_hermitian(int order);
  int num_variables() const { return num_variables_; }

  void minimize(const AffineExpr& objective) { objective_ = objective; }

  void add_zero(const std::vector<AffineExpr>& rows);
  void add_nonnegative(const std::vector<AffineExpr>& rows);
  void add_nonnegative(const AffineExpr& row) { add_nonnegative(std::vector<AffineExpr>{row}); }
  /// rows[0] >= ||rows[1:]||.
  void add_second_order(const std::vector<AffineExpr>& rows);
  void add_psd(const SymmetricExpr& matrix);
  /// Complex Hermitian PSD constraint through the real embedding.
  void add_hermitian_psd(const HermitianExpr& matrix);

  ConeProgram build() const;

 private:
  struct PendingBlock {
    ConeKind kind;
    std::vector<AffineExpr> rows;
    int psd_order = 0;
  };
  int num_variables_ = 0;
  AffineExpr objective_;
  std::vector<PendingBlock> blocks_;
};

/// Adds the S-procedure certificate for
///   e^H A e + 2 Re{b^H e} + c >= 0   for all ||e|| <= eps,
/// namely [[A + lambda I, b], [b^H, c - lambda eps^2]] PSD and lambda >= 0.
void s_procedure_block(ProgramBuilder& builder, const HermitianExpr& a,
                       const std::vector<ComplexAffine>& b, const AffineExpr& c, double eps,
                       const AffineExpr& lambda);

}  // namespace cisec::conic
