// SPDX-License-Identifier: Apache-2.0
#include "cisec/model.hpp"

#include <algorithm>

#include <Eigen/Eigenvalues>

namespace cisec {

Constellation::Constellation(int order, std::optional<double> phase_offset)
    : order_(order), half_angle_(0.0), phase_offset_(0.0) {
  require(order >= 3, "constellation order must be at least 3 (decision half-angle below pi/2)");
  half_angle_ = kPi / order;
  phase_offset_ = phase_offset.value_or(half_angle_);
  require(std::isfinite(phase_offset_), "constellation phase offset must be finite");
  symbols_.reserve(static_cast<std::size_t>(order));
  for (int m = 0; m < order; ++m) symbols_.push_back(std::polar(1.0, symbol_phase(m)));
}

double Constellation::symbol_phase(int index) const {
  require(index >= 0 && index < order_, "symbol index out of range");
  return 2.0 * kPi * index / order_ + phase_offset_;
}

Targets Targets::from_db(double gamma_d_db, double gamma_e_db, int eves, double sigma_d2,
                         double sigma_e2) {
  require(eves >= 0, "eavesdropper count must be nonnegative");
  Targets t;
  t.gamma_d = db_to_linear(gamma_d_db);
  t.gamma_e.assign(static_cast<std::size_t>(eves), db_to_linear(gamma_e_db));
  t.sigma_d2 = sigma_d2;
  t.sigma_e2 = sigma_e2;
  t.validate();
  return t;
}

void Targets::validate() const {
  require(gamma_d > 0.0 && std::isfinite(gamma_d), "gamma_d must be positive");
  for (double g : gamma_e) require(g > 0.0 && std::isfinite(g), "gamma_e must be positive");
  require(sigma_d2 > 0.0 && sigma_e2 > 0.0, "noise powers must be positive");
}

void ChannelSet::validate() const {
  require(h_d.size() >= 1, "channel vectors must be nonempty");
  require(h_d.allFinite(), "IR channel has non-finite entries");
  for (const auto& h : h_e) {
    require(h.size() == h_d.size(), "eavesdropper channel length differs from IR channel");
    require(h.allFinite(), "eavesdropper channel has non-finite entries");
  }
}

void Uncertainty::validate() const {
  require(eps_d >= 0.0 && eps_e >= 0.0, "uncertainty radii must be nonnegative");
}

void PrecoderBundle::validate() const {
  for (const auto& b : b_n) require(b.size() == b_d.size(), "AN beamformer length mismatch");
  const auto check_cov = [&](const std::optional<CMatrix>& w) {
    if (!w) return;
    require(w->rows() == b_d.size() && w->cols() == b_d.size(), "covariance shape mismatch");
    require((*w - w->adjoint()).norm() <= 1e-9 * std::max(1.0, w->norm()),
            "covariance is not Hermitian");
    const Eigen::SelfAdjointEigenSolver<CMatrix> eig(*w, Eigen::EigenvaluesOnly);
    require(eig.eigenvalues().minCoeff() >= -1e-8 * std::max(1.0, w->norm()),
            "covariance is not positive semidefinite");
  };
  check_cov(info_covariance);
  check_cov(an_covariance);
}

void Precoder::validate() const {
  require(b.size() >= 1, "precoder must be nonempty");
  require(b.allFinite(), "precoder has non-finite entries");
}

Precoder aggregate_precoder(const PrecoderBundle& bundle, std::span<const double> an_phases,
                            double symbol_phase) {
  bundle.validate();
  require(an_phases.size() == bundle.b_n.size(), "one AN phase per AN beamformer required");
  require(std::isfinite(symbol_phase), "symbol phase must be finite");
  Precoder out{bundle.b_d};
  for (std::size_t i = 0; i < bundle.b_n.size(); ++i) {
    require(std::isfinite(an_phases[i]), "AN phase must be finite");
    out.b += bundle.b_n[i] * std::polar(1.0, an_phases[i] - symbol_phase);
  }
  return out;
}

double instantaneous_power(const Precoder& precoder) { return precoder.b.squaredNorm(); }

Complex received_point(const CVector& h, const CVector& b) {
  require(h.size() == b.size(), "channel and precoder lengths differ");
  return (h.transpose() * b)(0);
}

namespace {

double statistical_sinr(const PrecoderBundle& bundle, const CVector& h, double sigma2) {
  bundle.validate();
  double interference = sigma2;
  for (const auto& bn : bundle.b_n) interference += std::norm(received_point(h, bn));
  return std::norm(received_point(h, bundle.b_d)) / interference;
}

}  // namespace

double statistical_sinr_ir(const PrecoderBundle& bundle, const CVector& h_d, double sigma_d2) {
  return statistical_sinr(bundle, h_d, sigma_d2);
}

double statistical_sinr_eve(const PrecoderBundle& bundle, const CVector& h_e, double sigma_e2) {
  return statistical_sinr(bundle, h_e, sigma_e2);
}

double ci_region_slack(Complex point, double threshold, double half_angle) {
  return (point.real() - threshold) * std::tan(half_angle) - std::abs(point.imag());
}

double destructive_region_slack(Complex point, double threshold, double half_angle) {
  return point.imag() - std::abs(point.real() - threshold) * std::tan(half_angle);
}

bool ci_region_contains(Complex point, double threshold, double half_angle, double tol) {
  require(threshold >= 0.0, "region threshold must be nonnegative");
  require(half_angle > 0.0 && half_angle < kPi / 2, "half-angle must lie in (0, pi/2)");
  return ci_region_slack(point, threshold, half_angle) + tol >= 0.0;
}

bool destructive_region_contains(Complex point, double threshold, double half_angle, double tol) {
  require(threshold >= 0.0, "region threshold must be nonnegative");
  require(half_angle > 0.0 && half_angle < kPi / 2, "half-angle must lie in (0, pi/2)");
  return destructive_region_slack(point, threshold, half_angle) + tol >= 0.0;
}

RealExpansion real_expand(const CVector& h, const Precoder& precoder) {
  const CVector& b = precoder.b;
  require(h.size() == b.size(), "channel and precoder lengths differ");
  const Eigen::Index n = h.size();
  RealExpansion e;
  e.h.resize(2 * n);
  e.b1.resize(2 * n);
  e.b2.resize(2 * n);
  e.h << h.real(), h.imag();
  e.b1 << b.real(), -b.imag();
  e.b2 << b.imag(), b.real();
  return e;
}

}  // namespace cisec
