// SPDX-License-Identifier: Apache-2.0
//
// Homogeneous self-dual embedding, Nesterov-Todd scaling, Mehrotra
// predictor-corrector. Internally the program is
//
//   minimize c^T x  s.t.  G x + s = h,  A x = b,  s in K
//
// with K ordered as [nonnegative | second-order cones | PSD cones], and the
// embedding residuals are
//
//   r_x = A^T y + G^T z + c tau
//   r_y = A x - b tau
//   r_z = s + G x - h tau
//   r_t = kappa + c^T x + b^T y + h^T z.
//
// Scalings are explicit cone automorphisms W with W z = W^-T s = lambda,
// recomputed from (s, z) at every iterate.
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <optional>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <Eigen/QR>
#include <Eigen/SVD>

#include "cisec/conic.hpp"

namespace cisec::conic {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct Layout {
  Eigen::Index nonneg = 0;
  std::vector<int> soc;
  std::vector<int> psd;
  std::vector<Eigen::Index> soc_offset;
  std::vector<Eigen::Index> psd_offset;
  Eigen::Index rows = 0;
  int degree = 0;
};

// Internal standard form plus the map back to the caller's blocks.
struct StandardForm {
  Layout layout;
  RMatrix g;
  RVector h;
  RMatrix a;
  RVector b;
  RVector c;
  // Per original block: (is_zero_cone, row offset into z or y).
  std::vector<std::pair<bool, Eigen::Index>> origin;
};

StandardForm to_standard_form(const ConeProgram& p) {
  StandardForm f;
  const int n = p.num_variables;
  f.c = p.objective;
  f.origin.resize(p.blocks.size());

  Eigen::Index eq_rows = 0;
  Layout& lay = f.layout;
  for (const auto& blk : p.blocks) {
    switch (blk.kind) {
      case ConeKind::zero: eq_rows += blk.rows(); break;
      case ConeKind::nonnegative: lay.nonneg += blk.rows(); break;
      case ConeKind::second_order: lay.soc.push_back(static_cast<int>(blk.rows())); break;
      case ConeKind::psd: lay.psd.push_back(blk.psd_order); break;
    }
  }
  Eigen::Index off = lay.nonneg;
  for (int m : lay.soc) {
    lay.soc_offset.push_back(off);
    off += m;
  }
  for (int m : lay.psd) {
    lay.psd_offset.push_back(off);
    off += packed_size(m);
  }
  lay.rows = off;
  lay.degree = static_cast<int>(lay.nonneg) + static_cast<int>(lay.soc.size());
  for (int m : lay.psd) lay.degree += m;

  f.g = RMatrix::Zero(lay.rows, n);
  f.h = RVector::Zero(lay.rows);
  f.a = RMatrix::Zero(eq_rows, n);
  f.b = RVector::Zero(eq_rows);

  Eigen::Index eq_off = 0;
  Eigen::Index nn_off = 0;
  std::size_t soc_i = 0;
  std::size_t psd_i = 0;
  for (std::size_t k = 0; k < p.blocks.size(); ++k) {
    const auto& blk = p.blocks[k];
    Eigen::Index row = 0;
    switch (blk.kind) {
      case ConeKind::zero:
        f.a.middleRows(eq_off, blk.rows()) = blk.a;
        f.b.segment(eq_off, blk.rows()) = -blk.b;
        f.origin[k] = {true, eq_off};
        eq_off += blk.rows();
        continue;
      case ConeKind::nonnegative:
        row = nn_off;
        nn_off += blk.rows();
        break;
      case ConeKind::second_order: row = lay.soc_offset[soc_i++]; break;
      case ConeKind::psd: row = lay.psd_offset[psd_i++]; break;
    }
    f.g.middleRows(row, blk.rows()) = -blk.a;
    f.h.segment(row, blk.rows()) = blk.b;
    f.origin[k] = {false, row};
  }
  return f;
}

// ---------------------------------------------------------------------------
// Cone arithmetic on stacked vectors.

// Ruiz equilibration: column scaling d and cone-compatible row scaling e
// (per row for nonnegative rows, one factor per SOC or PSD block) so that
// every row and column of [A; G] has unit infinity norm. The solver runs on
// the scaled data; iterates map back through unscale().
struct Equilibration {
  RVector d;
  RVector e_a;
  RVector e_g;
};

Equilibration equilibrate(StandardForm& f, int passes = 15) {
  const Layout& lay = f.layout;
  const Eigen::Index n = f.c.size();
  Equilibration eq{RVector::Ones(n), RVector::Ones(f.a.rows()), RVector::Ones(lay.rows)};
  const auto inv_sqrt = [](double v) { return v > 1e-300 ? 1.0 / std::sqrt(v) : 1.0; };
  for (int pass = 0; pass < passes; ++pass) {
    RVector dc(n);
    for (Eigen::Index j = 0; j < n; ++j) {
      double m = 0.0;
      if (f.a.rows() > 0) m = f.a.col(j).cwiseAbs().maxCoeff();
      if (lay.rows > 0) m = std::max(m, f.g.col(j).cwiseAbs().maxCoeff());
      dc(j) = inv_sqrt(m);
    }
    RVector ra(f.a.rows());
    for (Eigen::Index i = 0; i < f.a.rows(); ++i) ra(i) = inv_sqrt(n > 0 ? f.a.row(i).cwiseAbs().maxCoeff() : 0.0);
    RVector rg(lay.rows);
    for (Eigen::Index i = 0; i < lay.nonneg; ++i) rg(i) = inv_sqrt(n > 0 ? f.g.row(i).cwiseAbs().maxCoeff() : 0.0);
    const auto block = [&](Eigen::Index off, Eigen::Index len) {
      const double m = n > 0 ? f.g.middleRows(off, len).cwiseAbs().maxCoeff() : 0.0;
      rg.segment(off, len).setConstant(inv_sqrt(m));
    };
    for (std::size_t k = 0; k < lay.soc.size(); ++k) block(lay.soc_offset[k], lay.soc[k]);
    for (std::size_t k = 0; k < lay.psd.size(); ++k) block(lay.psd_offset[k], packed_size(lay.psd[k]));

    f.a = ra.asDiagonal() * f.a * dc.asDiagonal();
    f.g = rg.asDiagonal() * f.g * dc.asDiagonal();
    eq.d.array() *= dc.array();
    eq.e_a.array() *= ra.array();
    eq.e_g.array() *= rg.array();
  }
  f.b = eq.e_a.cwiseProduct(f.b);
  f.h = eq.e_g.cwiseProduct(f.h);
  f.c = eq.d.cwiseProduct(f.c);
  return eq;
}

RVector identity_element(const Layout& lay) {
  RVector e = RVector::Zero(lay.rows);
  e.head(lay.nonneg).setOnes();
  for (std::size_t i = 0; i < lay.soc.size(); ++i) e(lay.soc_offset[i]) = 1.0;
  for (std::size_t i = 0; i < lay.psd.size(); ++i) {
    const int m = lay.psd[i];
    for (int j = 0; j < m; ++j) e(lay.psd_offset[i] + packed_index(m, j, j)) = 1.0;
  }
  return e;
}

// Smallest "eigenvalue" of u with respect to the cone; > 0 iff interior.
double min_eigenvalue(const Layout& lay, const RVector& u) {
  double lo = kInf;
  if (lay.nonneg > 0) lo = u.head(lay.nonneg).minCoeff();
  for (std::size_t i = 0; i < lay.soc.size(); ++i) {
    const int m = lay.soc[i];
    const auto seg = u.segment(lay.soc_offset[i], m);
    lo = std::min(lo, seg(0) - seg.tail(m - 1).norm());
  }
  for (std::size_t i = 0; i < lay.psd.size(); ++i) {
    const int m = lay.psd[i];
    const RMatrix mat = unpack_symmetric(u.segment(lay.psd_offset[i], packed_size(m)), m);
    const Eigen::SelfAdjointEigenSolver<RMatrix> eig(mat, Eigen::EigenvaluesOnly);
    lo = std::min(lo, eig.eigenvalues()(0));
  }
  return lo;
}

RVector jordan_product(const Layout& lay, const RVector& u, const RVector& v) {
  RVector out(lay.rows);
  out.head(lay.nonneg) = u.head(lay.nonneg).cwiseProduct(v.head(lay.nonneg));
  for (std::size_t i = 0; i < lay.soc.size(); ++i) {
    const int m = lay.soc[i];
    const Eigen::Index o = lay.soc_offset[i];
    const auto us = u.segment(o, m);
    const auto vs = v.segment(o, m);
    out(o) = us.dot(vs);
    out.segment(o + 1, m - 1) = us(0) * vs.tail(m - 1) + vs(0) * us.tail(m - 1);
  }
  for (std::size_t i = 0; i < lay.psd.size(); ++i) {
    const int m = lay.psd[i];
    const Eigen::Index o = lay.psd_offset[i];
    const RMatrix um = unpack_symmetric(u.segment(o, packed_size(m)), m);
    const RMatrix vm = unpack_symmetric(v.segment(o, packed_size(m)), m);
    const RMatrix prod = 0.5 * (um * vm + vm * um);
    out.segment(o, packed_size(m)) = pack_symmetric(prod);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Nesterov-Todd scaling W with W z = W^{-T} s = lambda.

struct Scaling {
  RVector d;                          // nonnegative orthant: W = diag(d)
  std::vector<RMatrix> soc_w, soc_winv;
  std::vector<RMatrix> psd_r, psd_rinv;  // W(U) = R^T U R
  std::vector<RVector> psd_lambda;       // eigenvalues of the (diagonal) scaled point
  RVector lambda;
};

enum class Apply { w, wt, winv, winvt };

RVector apply_scaling(const Layout& lay, const Scaling& sc, Apply mode, const RVector& x) {
  RVector y(lay.rows);
  if (lay.nonneg > 0) {
    if (mode == Apply::w || mode == Apply::wt)
      y.head(lay.nonneg) = sc.d.cwiseProduct(x.head(lay.nonneg));
    else
      y.head(lay.nonneg) = x.head(lay.nonneg).cwiseQuotient(sc.d);
  }
  for (std::size_t i = 0; i < lay.soc.size(); ++i) {
    const int m = lay.soc[i];
    const Eigen::Index o = lay.soc_offset[i];
    switch (mode) {
      case Apply::w: y.segment(o, m) = sc.soc_w[i] * x.segment(o, m); break;
      case Apply::wt: y.segment(o, m) = sc.soc_w[i].transpose() * x.segment(o, m); break;
      case Apply::winv: y.segment(o, m) = sc.soc_winv[i] * x.segment(o, m); break;
      case Apply::winvt: y.segment(o, m) = sc.soc_winv[i].transpose() * x.segment(o, m); break;
    }
  }
  for (std::size_t i = 0; i < lay.psd.size(); ++i) {
    const int m = lay.psd[i];
    const Eigen::Index o = lay.psd_offset[i];
    const Eigen::Index len = packed_size(m);
    const RMatrix u = unpack_symmetric(x.segment(o, len), m);
    const RMatrix& r = sc.psd_r[i];
    const RMatrix& ri = sc.psd_rinv[i];
    RMatrix out;
    switch (mode) {
      case Apply::w: out = r.transpose() * u * r; break;
      case Apply::wt: out = r * u * r.transpose(); break;
      case Apply::winv: out = ri.transpose() * u * ri; break;
      case Apply::winvt: out = ri * u * ri.transpose(); break;
    }
    y.segment(o, len) = pack_symmetric(out);
  }
  return y;
}

// W^{-T} applied to every column of G.
RMatrix scale_columns(const Layout& lay, const Scaling& sc, const RMatrix& g) {
  RMatrix out(g.rows(), g.cols());
  for (Eigen::Index j = 0; j < g.cols(); ++j)
    out.col(j) = apply_scaling(lay, sc, Apply::winvt, g.col(j));
  return out;
}

// Symmetric NT scaling of one second-order cone pair; returns false when
// either point has left the interior.
bool soc_nt_scaling(const RVector& s, const RVector& z, RMatrix& w, RMatrix& winv) {
  const Eigen::Index m = s.size();
  const double s_det = s(0) * s(0) - s.tail(m - 1).squaredNorm();
  const double z_det = z(0) * z(0) - z.tail(m - 1).squaredNorm();
  if (!(s_det > 0.0 && z_det > 0.0 && s(0) > 0.0 && z(0) > 0.0)) return false;
  const RVector sb = s / std::sqrt(s_det);
  const RVector zb = z / std::sqrt(z_det);
  const double gamma = std::sqrt(0.5 * (1.0 + sb.dot(zb)));
  RVector wb(m);
  wb(0) = (sb(0) + zb(0)) / (2.0 * gamma);
  wb.tail(m - 1) = (sb.tail(m - 1) - zb.tail(m - 1)) / (2.0 * gamma);
  const double eta = std::pow(s_det / z_det, 0.25);
  const RVector w1 = wb.tail(m - 1);
  RMatrix core(m, m);
  core(0, 0) = wb(0);
  core.block(0, 1, 1, m - 1) = w1.transpose();
  core.block(1, 0, m - 1, 1) = w1;
  core.block(1, 1, m - 1, m - 1) =
      RMatrix::Identity(m - 1, m - 1) + w1 * w1.transpose() / (1.0 + wb(0));
  w = eta * core;
  RMatrix inv = core;
  inv.block(0, 1, 1, m - 1) *= -1.0;
  inv.block(1, 0, m - 1, 1) *= -1.0;
  winv = inv / eta;
  return true;
}

Scaling identity_scaling(const Layout& lay) {
  Scaling sc;
  sc.d = RVector::Ones(lay.nonneg);
  for (int m : lay.soc) {
    sc.soc_w.push_back(RMatrix::Identity(m, m));
    sc.soc_winv.push_back(RMatrix::Identity(m, m));
  }
  for (int m : lay.psd) {
    sc.psd_r.push_back(RMatrix::Identity(m, m));
    sc.psd_rinv.push_back(RMatrix::Identity(m, m));
    sc.psd_lambda.push_back(RVector::Ones(m));
  }
  sc.lambda = identity_element(lay);
  return sc;
}

// Nesterov-Todd scaling of the pair (s, z). Returns false when either point
// has left the interior of the cone.
bool nt_scaling(const Layout& lay, const RVector& s, const RVector& z, Scaling& sc) {
  sc = identity_scaling(lay);
  RVector lambda(lay.rows);
  if (lay.nonneg > 0) {
    const auto st = s.head(lay.nonneg);
    const auto zt = z.head(lay.nonneg);
    if (st.minCoeff() <= 0.0 || zt.minCoeff() <= 0.0) return false;
    sc.d = st.cwiseQuotient(zt).cwiseSqrt();
    lambda.head(lay.nonneg) = st.cwiseProduct(zt).cwiseSqrt();
  }
  for (std::size_t i = 0; i < lay.soc.size(); ++i) {
    const int m = lay.soc[i];
    const Eigen::Index o = lay.soc_offset[i];
        const RVector zt = z.segment(o, m);
    if (!soc_nt_scaling(s.segment(o, m), zt, sc.soc_w[i], sc.soc_winv[i])) return false;
    lambda.segment(o, m) = sc.soc_w[i] * zt;
  }
  for (std::size_t i = 0; i < lay.psd.size(); ++i) {
    const int m = lay.psd[i];
    const Eigen::Index o = lay.psd_offset[i];
    const Eigen::Index len = packed_size(m);
    const RMatrix st = unpack_symmetric(s.segment(o, len), m);
    const RMatrix zt = unpack_symmetric(z.segment(o, len), m);
    const Eigen::LLT<RMatrix> llt_s(st);
    const Eigen::LLT<RMatrix> llt_z(zt);
    if (llt_s.info() != Eigen::Success || llt_z.info() != Eigen::Success) return false;
    const RMatrix l1 = llt_s.matrixL();
    const RMatrix l2 = llt_z.matrixL();
    const Eigen::JacobiSVD<RMatrix> svd(l2.transpose() * l1, Eigen::ComputeFullU | Eigen::ComputeFullV);
    const RVector sv = svd.singularValues();
    if (sv.minCoeff() <= 0.0) return false;
    const RVector inv_sqrt = sv.cwiseSqrt().cwiseInverse();
    sc.psd_r[i] = l1 * svd.matrixV() * inv_sqrt.asDiagonal();
    sc.psd_rinv[i] = inv_sqrt.asDiagonal() * svd.matrixU().transpose() * l2.transpose();
    sc.psd_lambda[i] = sv;
    lambda.segment(o, len) = pack_symmetric(RMatrix(sv.asDiagonal()));
  }
  sc.lambda = std::move(lambda);
  return true;
}

// Solves lambda o x = y for x.
RVector lambda_solve(const Layout& lay, const Scaling& sc, const RVector& y) {
  const RVector& lam = sc.lambda;
  RVector x(lay.rows);
  x.head(lay.nonneg) = y.head(lay.nonneg).cwiseQuotient(lam.head(lay.nonneg));
  for (std::size_t i = 0; i < lay.soc.size(); ++i) {
    const int m = lay.soc[i];
    const Eigen::Index o = lay.soc_offset[i];
    const auto l = lam.segment(o, m);
    const auto ys = y.segment(o, m);
    const double det = l(0) * l(0) - l.tail(m - 1).squaredNorm();
    const double x0 = (l(0) * ys(0) - l.tail(m - 1).dot(ys.tail(m - 1))) / det;
    x(o) = x0;
    x.segment(o + 1, m - 1) = (ys.tail(m - 1) - x0 * l.tail(m - 1)) / l(0);
  }
  for (std::size_t i = 0; i < lay.psd.size(); ++i) {
    const int m = lay.psd[i];
    const Eigen::Index o = lay.psd_offset[i];
    const Eigen::Index len = packed_size(m);
    const RVector& ev = sc.psd_lambda[i];
    RMatrix ym = unpack_symmetric(y.segment(o, len), m);
    for (int c = 0; c < m; ++c)
      for (int r = 0; r < m; ++r) ym(r, c) *= 2.0 / (ev(r) + ev(c));
    x.segment(o, len) = pack_symmetric(ym);
  }
  return x;
}

// Largest alpha with lambda + alpha * dir in the cone (lambda interior).
double max_step(const Layout& lay, const Scaling& sc, const RVector& dir) {
  const RVector& lam = sc.lambda;
  double alpha = kInf;
  for (Eigen::Index i = 0; i < lay.nonneg; ++i)
    if (dir(i) < 0.0) alpha = std::min(alpha, -lam(i) / dir(i));
  for (std::size_t i = 0; i < lay.soc.size(); ++i) {
    const int m = lay.soc[i];
    const Eigen::Index o = lay.soc_offset[i];
    const auto u = lam.segment(o, m);
    const auto d = dir.segment(o, m);
    const double qa = d(0) * d(0) - d.tail(m - 1).squaredNorm();
    const double qb = u(0) * d(0) - u.tail(m - 1).dot(d.tail(m - 1));
    const double qc = u(0) * u(0) - u.tail(m - 1).squaredNorm();
    // First positive root of qa t^2 + 2 qb t + qc.
    double root = kInf;
    if (std::abs(qa) <= 1e-300) {
      if (qb < 0.0) root = -qc / (2.0 * qb);
    } else {
      const double disc = qb * qb - qa * qc;
      if (disc >= 0.0) {
        const double sq = std::sqrt(disc);
        const double q = -(qb + std::copysign(sq, qb));
        const double r1 = q / qa;
        const double r2 = (q != 0.0) ? qc / q : kInf;
        for (double r : {r1, r2})
          if (r > 0.0) root = std::min(root, r);
      }
    }
    // Leaving through the apex without a sign change of qc is impossible,
    // but guard the linear part of the cone anyway.
    if (d(0) < 0.0) root = std::min(root, -u(0) / d(0));
    alpha = std::min(alpha, root);
  }
  for (std::size_t i = 0; i < lay.psd.size(); ++i) {
    const int m = lay.psd[i];
    const Eigen::Index o = lay.psd_offset[i];
    const RVector inv_sqrt = sc.psd_lambda[i].cwiseSqrt().cwiseInverse();
    const RMatrix dm = unpack_symmetric(dir.segment(o, packed_size(m)), m);
    const RMatrix scaled = inv_sqrt.asDiagonal() * dm * inv_sqrt.asDiagonal();
    const Eigen::SelfAdjointEigenSolver<RMatrix> eig(scaled, Eigen::EigenvaluesOnly);
    const double lo = eig.eigenvalues()(0);
    if (lo < 0.0) alpha = std::min(alpha, -1.0 / lo);
  }
  return alpha;
}

// ---------------------------------------------------------------------------
// KKT system
//   [ 0  A^T  G^T ] [dx]   [bx]
//   [ A  0    0   ] [dy] = [by]
//   [ G  0   -H   ] [dz]   [bz]     H = W^T W
// reduced to [G_s^T G_s, A^T; A, 0] with G_s = W^{-T} G.

// Solves the scaled KKT system
//
//   A^T dy + Gs^T dz~ = bx,   A dx = by,   Gs dx - dz~ = bz~,   Gs = W^-T G
//
// without forming Gs^T Gs: equality rows are eliminated through a QR
// factorization of A^T (fixed for the whole solve), and the remaining
// least-squares system is solved with a QR factorization of Gs Q2.
struct EqualityBasis {
  RMatrix q1;  // range of A^T
  RMatrix q2;  // null space of A
  RMatrix r;   // A^T = q1 r
};

EqualityBasis equality_basis(const RMatrix& a) {
  const Eigen::Index n = a.cols();
  const Eigen::Index p = a.rows();
  EqualityBasis eb;
  if (p == 0) {
    eb.q2 = RMatrix::Identity(n, n);
    eb.q1 = RMatrix::Zero(n, 0);
    eb.r = RMatrix::Zero(0, 0);
    return eb;
  }
  const Eigen::HouseholderQR<RMatrix> qr(a.transpose());
  const RMatrix q = qr.householderQ() * RMatrix::Identity(n, n);
  eb.q1 = q.leftCols(p);
  eb.q2 = q.rightCols(n - p);
  eb.r = qr.matrixQR().topLeftCorner(p, p).triangularView<Eigen::Upper>();
  return eb;
}

class KktSolver {
 public:
  KktSolver(const Layout& lay, const StandardForm& f, const EqualityBasis& eb, const Scaling& sc)
      : lay_(lay), f_(f), eb_(eb), sc_(sc) {
    gs_ = scale_columns(lay, sc, f.g);
    if (f.a.rows() == 0) {
      qr_.compute(gs_);
    } else {
      qr_.compute(gs_ * eb.q2);
    }
  }

  struct Result {
    RVector x, y, z;
    RVector z_scaled;  // W z
  };

  Result solve(const RVector& bx, const RVector& by, const RVector& bz) const {
    const RVector bz_s = apply_scaling(lay_, sc_, Apply::winvt, bz);
    // Refine in the scaled unknowns (dx, dy, W dz) against the unreduced
    // system.
    Result r;
    reduced_solve(bx, by, bz_s, r.x, r.y, r.z_scaled);
    double last = kInf;
    for (int it = 0; it < 10; ++it) {
      const RVector ex = bx - f_.a.transpose() * r.y - gs_.transpose() * r.z_scaled;
      const RVector ey = by - f_.a * r.x;
      const RVector ez = bz_s - gs_ * r.x + r.z_scaled;
      const double err = std::sqrt(ex.squaredNorm() + ey.squaredNorm() + ez.squaredNorm());
      if (!std::isfinite(err) || err >= 0.9 * last) break;
      last = err;
      RVector cx, cy, cz;
      reduced_solve(ex, ey, ez, cx, cy, cz);
      r.x += cx;
      r.y += cy;
      r.z_scaled += cz;
    }
    r.z = apply_scaling(lay_, sc_, Apply::winv, r.z_scaled);
    return r;
  }

 private:
  void reduced_solve(const RVector& bx, const RVector& by, const RVector& bz_s, RVector& x,
                     RVector& y, RVector& z_scaled) const {
    const Eigen::Index p = f_.a.rows();
    const Eigen::Index k = qr_.cols();
    const auto rm = qr_.matrixQR().topLeftCorner(k, k).triangularView<Eigen::Upper>();
    RVector x0 = RVector::Zero(f_.c.size());
    RVector proj_bx = bx;
    if (p > 0) {
      x0 = eb_.q1 * eb_.r.transpose().triangularView<Eigen::Lower>().solve(by);
      proj_bx = eb_.q2.transpose() * bx;
    }
    // R w = R^-T Q2^T bx + Q^T (bz~ - Gs x0)
    RVector rhs = qr_.householderQ().transpose() * (bz_s - gs_ * x0);
    RVector w = rm.transpose().solve(proj_bx);
    w += rhs.head(k);
    w = rm.solve(w);
    x = p > 0 ? RVector(x0 + eb_.q2 * w) : w;
    z_scaled = gs_ * x - bz_s;
    if (p > 0) {
      const RVector t = eb_.q1.transpose() * (bx - gs_.transpose() * z_scaled);
      y = eb_.r.triangularView<Eigen::Upper>().solve(t);
    } else {
      y = RVector::Zero(0);
    }
  }

  const Layout& lay_;
  const StandardForm& f_;
  const EqualityBasis& eb_;
  const Scaling& sc_;
  RMatrix gs_;
  Eigen::HouseholderQR<RMatrix> qr_;
};

struct Iterate {
  RVector x, y, z, s;
  double tau = 1.0;
  double kappa = 1.0;
};

Iterate unscale(const Equilibration& eq, const Iterate& it) {
  Iterate out = it;
  out.x = eq.d.cwiseProduct(it.x);
  out.y = eq.e_a.cwiseProduct(it.y);
  out.z = eq.e_g.cwiseProduct(it.z);
  out.s = it.s.cwiseQuotient(eq.e_g);
  return out;
}

struct Status {
  double pcost = 0.0, dcost = 0.0;
  double pres = kInf, dres = kInf;
  double gap = kInf, relgap = kInf;
  std::optional<SolveStatus> verdict;
};

Status assess(const StandardForm& f, const Iterate& it, double feas_tol, double gap_tol,
              double dual_tol) {
  const double resx0 = std::max(1.0, f.c.norm());
  const double resy0 = std::max(1.0, f.b.norm());
  const double resz0 = std::max(1.0, f.h.norm());
  Status st;
  const double cx = f.c.dot(it.x);
  const double by = f.b.dot(it.y);
  const double hz = f.h.dot(it.z);
  st.pcost = cx / it.tau;
  st.dcost = -(by + hz) / it.tau;
  // Residuals relative to the largest term that enters them, so that large
  // multipliers or iterates do not turn round-off into a stall.
  const RVector ax = f.a * it.x;
  const RVector gx = f.g * it.x;
  const double ry = f.a.rows() ? (ax - f.b * it.tau).norm() /
                                     std::max({resy0 * it.tau, ax.norm()})
                               : 0.0;
  const double rz = (it.s + gx - f.h * it.tau).norm() /
                    std::max({resz0 * it.tau, gx.norm(), it.s.norm()});
  st.pres = std::max(ry, rz);
  const RVector aty = f.a.transpose() * it.y;
  const RVector gtz = f.g.transpose() * it.z;
  const RVector rx = aty + gtz;
  st.dres = (rx + f.c * it.tau).norm() / std::max({resx0 * it.tau, aty.norm(), gtz.norm()});
  st.gap = it.s.dot(it.z) / (it.tau * it.tau);
  st.relgap = st.gap / std::max(1.0, std::min(std::abs(st.pcost), std::abs(st.dcost)));

  if (st.pres <= feas_tol && st.dres <= dual_tol && st.relgap <= gap_tol) {
    st.verdict = SolveStatus::optimal;
    return st;
  }
  if (hz + by < 0.0) {
    const double pinf = rx.norm() / resx0 / (-(hz + by));
    if (pinf <= feas_tol) {
      st.verdict = SolveStatus::infeasible;
      return st;
    }
  }
  if (cx < 0.0) {
    const double ra = f.a.rows() ? ax.norm() / resy0 : 0.0;
    const double rg = (gx + it.s).norm() / resz0;
    if (std::max(ra, rg) / (-cx) <= feas_tol) st.verdict = SolveStatus::unbounded;
  }
  return st;
}

ConeSolution finish(const ConeProgram& program, const StandardForm& f, const Iterate& it,
                    const Status& st, SolveStatus status, int iterations) {
  ConeSolution out;
  out.status = status;
  out.iterations = iterations;
  out.residuals.primal_infeasibility = st.pres;
  out.residuals.dual_infeasibility = st.dres;
  out.residuals.duality_gap = st.relgap;
  out.residuals.absolute_gap = st.gap;
  const double tau = (status == SolveStatus::optimal || status == SolveStatus::numerical_failure)
                         ? it.tau
                         : 1.0;
  out.primal = it.x / tau;
  out.dual = RVector::Zero(program.constraint_rows());
  Eigen::Index row = 0;
  for (std::size_t k = 0; k < program.blocks.size(); ++k) {
    const auto& blk = program.blocks[k];
    const auto [is_eq, off] = f.origin[k];
    if (is_eq)
      out.dual.segment(row, blk.rows()) = -it.y.segment(off, blk.rows()) / tau;
    else
      out.dual.segment(row, blk.rows()) = it.z.segment(off, blk.rows()) / tau;
    row += blk.rows();
  }
  out.objective = program.objective.dot(out.primal);
  out.dual_objective = st.dcost;
  return out;
}

}  // namespace

ConeSolution solve(const ConeProgram& program, const SolverOptions& options) {
  program.validate();
  const StandardForm orig = to_standard_form(program);
  StandardForm f = orig;
  const Equilibration eq = equilibrate(f);
  const EqualityBasis eb = equality_basis(f.a);
  const auto check = [&](const Iterate& x, double feas_tol, double gap_tol, double dual_tol) {
    return assess(orig, unscale(eq, x), feas_tol, gap_tol, dual_tol);
  };
  const auto done = [&](const Iterate& x, const Status& s, SolveStatus v, int k) {
    return finish(program, orig, unscale(eq, x), s, v, k);
  };
  const Layout& lay = f.layout;
  const Eigen::Index n = program.num_variables;
  const Eigen::Index p = f.a.rows();
  const RVector e = identity_element(lay);

  // Starting point from two least-squares problems with identity scaling.
  Scaling sc = identity_scaling(lay);
  Iterate it;
  {
    const KktSolver kkt(lay, f, eb, sc);
    const auto primal = kkt.solve(RVector::Zero(n), f.b, f.h);
    const auto dual = kkt.solve(-f.c, RVector::Zero(p), RVector::Zero(lay.rows));
    it.x = primal.x;
    it.s = -primal.z;
    it.y = dual.y;
    it.z = dual.z;
    if (lay.rows > 0) {
      const double ts = -min_eigenvalue(lay, it.s);
      if (ts >= -1e-8 * std::max(1.0, it.s.norm())) it.s += (1.0 + ts) * e;
      const double tz = -min_eigenvalue(lay, it.z);
      if (tz >= -1e-8 * std::max(1.0, it.z.norm())) it.z += (1.0 + tz) * e;
    }
    it.tau = 1.0;
    it.kappa = 1.0;
    if (!nt_scaling(lay, it.s, it.z, sc)) {
      return done(it, check(it, options.feasibility_tolerance, options.gap_tolerance,
                  options.feasibility_tolerance),
                  SolveStatus::numerical_failure, 0);
    }
  }

  const double degree = static_cast<double>(lay.degree) + 1.0;
  Status st;
  int iter = 0;
  // Best iterate seen, by its worst optimality measure; returned when the
  // iteration stalls or starts to diverge numerically.
  Iterate best = it;
  double best_merit = kInf;
  int best_iter = 0;
  for (; iter <= options.max_iterations; ++iter) {
    st = check(it, options.feasibility_tolerance, options.gap_tolerance,
                  options.feasibility_tolerance);
    const double dual_weight = options.fallback_tolerance / options.fallback_dual_tolerance;
    const double merit = std::max({st.pres, dual_weight * st.dres, st.relgap});
    if (merit < best_merit) {
      best = it;
      best_merit = merit;
      best_iter = iter;
    } else if (best_merit < 1e-6 && merit > 1e3 * best_merit) {
      break;
    }
    if (options.verbose) {
      std::fprintf(stderr, "%3d  %+.6e  %+.6e  pres %.1e  dres %.1e  gap %.1e  tau %.1e  kappa %.1e\n",
                   iter, st.pcost, st.dcost, st.pres, st.dres, st.relgap, it.tau, it.kappa);
    }
    if (st.verdict) return done(it, st, *st.verdict, iter);
    if (iter == options.max_iterations) break;

    const double mu = (it.s.dot(it.z) + it.tau * it.kappa) / degree;
    const RVector rx = f.a.transpose() * it.y + f.g.transpose() * it.z + f.c * it.tau;
    const RVector ry = f.a * it.x - f.b * it.tau;
    const RVector rz = it.s + f.g * it.x - f.h * it.tau;
    const double rt = it.kappa + f.c.dot(it.x) + f.b.dot(it.y) + f.h.dot(it.z);

    const KktSolver kkt(lay, f, eb, sc);
    const auto d1 = kkt.solve(-f.c, f.b, f.h);
    const double denom = -it.kappa / it.tau - d1.z_scaled.squaredNorm();
    const RVector lam_sq = jordan_product(lay, sc.lambda, sc.lambda);

    struct Direction {
      RVector dx, dy, dz, ds_scaled, dz_scaled;
      double dtau = 0.0, dkappa = 0.0;
    };
    const auto direction = [&](double sigma, const RVector& dc, double dtk) {
      const RVector rc = lambda_solve(lay, sc, dc);
      const RVector bz = -(1.0 - sigma) * rz - apply_scaling(lay, sc, Apply::wt, rc);
      const auto d2 = kkt.solve(-(1.0 - sigma) * rx, -(1.0 - sigma) * ry, bz);
      const double bt = -(1.0 - sigma) * rt;
      const double rhs =
          bt - dtk / it.tau - (f.c.dot(d2.x) + f.b.dot(d2.y) + f.h.dot(d2.z));
      Direction d;
      d.dtau = rhs / denom;
      d.dx = d2.x + d.dtau * d1.x;
      d.dy = d2.y + d.dtau * d1.y;
      d.dz = d2.z + d.dtau * d1.z;
      d.dz_scaled = d2.z_scaled + d.dtau * d1.z_scaled;
      d.ds_scaled = rc - d.dz_scaled;
      d.dkappa = (dtk - it.kappa * d.dtau) / it.tau;
      return d;
    };
    const auto step_limit = [&](const Direction& d) {
      double a = std::min(max_step(lay, sc, d.ds_scaled), max_step(lay, sc, d.dz_scaled));
      if (d.dtau < 0.0) a = std::min(a, -it.tau / d.dtau);
      if (d.dkappa < 0.0) a = std::min(a, -it.kappa / d.dkappa);
      return a;
    };

    // Affine-scaling predictor.
    const Direction aff = direction(0.0, -lam_sq, -it.tau * it.kappa);
    const double alpha_aff = std::min(1.0, step_limit(aff));
    const double sigma = std::pow(std::max(0.0, 1.0 - alpha_aff), 3);

    // Combined predictor-corrector.
    const RVector dc = -lam_sq - jordan_product(lay, aff.ds_scaled, aff.dz_scaled) + sigma * mu * e;
    const double dtk = -it.tau * it.kappa - aff.dtau * aff.dkappa + sigma * mu;
    const Direction d = direction(sigma, dc, dtk);
    if (!d.dx.allFinite() || !std::isfinite(d.dtau)) break;
    const double alpha = std::min(1.0, 0.99 * step_limit(d));
    if (!(alpha > 1e-12)) break;

    // Take ds from the linearized primal rows rather than as W^T ds~: the
    // latter cancels badly once W is ill-conditioned, and the primal residual
    // then stops contracting. The scaled form is kept if the step would
    // leave the cone.
    RVector ds = -(1.0 - sigma) * rz - f.g * d.dx + f.h * d.dtau;
    RVector s_next = it.s + alpha * ds;
    if (lay.rows > 0 && !(min_eigenvalue(lay, s_next) > 0.0))
      s_next = it.s + alpha * apply_scaling(lay, sc, Apply::wt, d.ds_scaled);
    it.x += alpha * d.dx;
    it.y += alpha * d.dy;
    it.z += alpha * d.dz;
    it.s = std::move(s_next);
    it.tau += alpha * d.dtau;
    it.kappa += alpha * d.dkappa;
    // Recomputing the scaling from the iterates keeps W and W^-1 exact
    // inverses; composing step scalings lets them drift apart once they
    // become ill-conditioned.
    if (!nt_scaling(lay, it.s, it.z, sc)) break;
  }

  // Iteration limit, stall, or divergence: accept the best iterate if it
  // meets the looser contract.
  st = check(best, options.fallback_tolerance, options.fallback_tolerance,
             options.fallback_dual_tolerance);
  if (st.verdict) return done(best, st, *st.verdict, best_iter);
  return done(it, check(it, 0.0, 0.0, 0.0), SolveStatus::numerical_failure, iter);
}

}  // namespace cisec::conic
