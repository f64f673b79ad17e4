// SPDX-License-Identifier: Apache-2.0
#include "cisec/relaxation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/Eigenvalues>

namespace cisec {

namespace {

void require_hermitian(const CMatrix& w, const char* what) {
  require(w.rows() == w.cols(), std::string(what) + ": matrix must be square");
  const double scale = std::max(1.0, w.cwiseAbs().maxCoeff());
  require((w - w.adjoint()).cwiseAbs().maxCoeff() <= 1e-9 * scale,
          std::string(what) + ": matrix is not Hermitian");
}

}  // namespace

RankOneResult extract_rank_one(const CMatrix& w, double tol, double threshold) {
  require_hermitian(w, "extract_rank_one");
  require(w.rows() >= 1, "extract_rank_one: empty matrix");
  const CMatrix sym = 0.5 * (w + w.adjoint());
  const Eigen::SelfAdjointEigenSolver<CMatrix> eig(sym);
  const RVector& ev = eig.eigenvalues();
  require(ev(0) >= -tol, "extract_rank_one: matrix is not positive semidefinite");
  const Eigen::Index m = ev.size();
  RankOneResult out;
  out.report.lambda1 = std::max(0.0, ev(m - 1));
  out.report.lambda2 = m >= 2 ? std::max(0.0, ev(m - 2)) : 0.0;
  out.report.ratio = out.report.lambda1 > 0.0 ? out.report.lambda2 / out.report.lambda1 : 0.0;
  out.report.rank_one = out.report.ratio <= threshold;
  out.w = std::sqrt(out.report.lambda1) * eig.eigenvectors().col(m - 1);
  return out;
}

std::optional<CVector> gaussian_randomization(const CMatrix& w, const RandomizationChecker& checker,
                                              int trials, Rng& rng) {
  require(trials >= 1, "gaussian_randomization: trials must be at least 1");
  require_hermitian(w, "gaussian_randomization");
  require(static_cast<bool>(checker.rescale) && static_cast<bool>(checker.feasible),
          "gaussian_randomization: checker hooks must be set");
  // W = V diag(d) V^H, so V diag(sqrt(d)) g with g ~ CN(0, I) has covariance W.
  const Eigen::SelfAdjointEigenSolver<CMatrix> eig(0.5 * (w + w.adjoint()));
  const RVector root = eig.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  const CMatrix factor = eig.eigenvectors() * root.cast<Complex>().asDiagonal();
  std::optional<CVector> best;
  double best_power = std::numeric_limits<double>::infinity();
  for (int t = 0; t < trials; ++t) {
    const CVector candidate = factor * complex_gaussian(w.rows(), 1.0, rng);
    const auto scaled = checker.rescale(candidate);
    if (!scaled || !checker.feasible(*scaled)) continue;
    const double power = scaled->squaredNorm();
    if (power < best_power) {
      best_power = power;
      best = *scaled;
    }
  }
  return best;
}

double min_quadratic_over_ball(const CMatrix& a, const CVector& b, double c, double eps) {
  require_hermitian(a, "min_quadratic_over_ball");
  require(b.size() == a.rows(), "min_quadratic_over_ball: dimension mismatch");
  require(eps >= 0.0, "min_quadratic_over_ball: radius must be nonnegative");
  if (eps == 0.0) return c;
  const Eigen::SelfAdjointEigenSolver<CMatrix> eig(0.5 * (a + a.adjoint()));
  const RVector& lam = eig.eigenvalues();
  const RVector beta = (eig.eigenvectors().adjoint() * b).cwiseAbs2();
  const double eps2 = eps * eps;
  // Lagrange dual: max over mu >= max(0, -lambda_min) of
  //   g(mu) = c - sum beta_i / (lambda_i + mu) - mu eps^2,
  // which is tight for this (trust-region) problem.
  const auto dual = [&](double mu) {
    double g = c - mu * eps2;
    for (Eigen::Index i = 0; i < lam.size(); ++i) {
      const double d = lam(i) + mu;
      if (beta(i) == 0.0) continue;
      if (d <= 0.0) return -std::numeric_limits<double>::infinity();
      g -= beta(i) / d;
    }
    return g;
  };
  const auto slope = [&](double mu) {
    double s = -eps2;
    for (Eigen::Index i = 0; i < lam.size(); ++i) {
      const double d = lam(i) + mu;
      if (beta(i) == 0.0) continue;
      if (d <= 0.0) return std::numeric_limits<double>::infinity();
      s += beta(i) / (d * d);
    }
    return s;
  };
  const double lo0 = std::max(0.0, -lam(0));
  if (slope(lo0) <= 0.0) return dual(lo0);
  double lo = lo0;
  double hi = lo0 + std::sqrt(beta.sum()) / eps + 1.0;
  while (slope(hi) > 0.0) hi = lo0 + 2.0 * (hi - lo0);
  for (int it = 0; it < 200 && hi - lo > 1e-15 * std::max(1.0, hi); ++it) {
    const double mid = 0.5 * (lo + hi);
    (slope(mid) > 0.0 ? lo : hi) = mid;
  }
  return dual(hi);
}

}  // namespace cisec
