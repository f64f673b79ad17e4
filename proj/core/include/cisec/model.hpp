// SPDX-License-Identifier: Apache-2.0
//
// Domain types of the MISO wiretap model: constellations, SINR targets,
// channel sets, precoders, and the geometric regions that decide whether a
// noise-free received point is constructive (intended receiver) or
// destructive (eavesdropper).
#pragma once

#include <optional>
#include <span>
#include <vector>

#include "cisec/types.hpp"

namespace cisec {

/// Unit-modulus M-PSK alphabet. Symbol m sits at angle 2*pi*m/M + offset.
class Constellation {
 public:
  /// `phase_offset` defaults to pi/M, which places QPSK on the diagonals.
  explicit Constellation(int order, std::optional<double> phase_offset = std::nullopt);

  static Constellation qpsk() { return Constellation(4); }

  int order() const { return order_; }
  /// Half-angle of every decision sector, pi/M.
  double half_angle() const { return half_angle_; }
  double phase_offset() const { return phase_offset_; }
  const std::vector<Complex>& symbols() const { return symbols_; }
  Complex symbol(int index) const { return symbols_.at(static_cast<std::size_t>(index)); }
  double symbol_phase(int index) const;

 private:
  int order_;
  double half_angle_;
  double phase_offset_;
  std::vector<Complex> symbols_;
};

/// Linear SINR target at the intended receiver and per-eavesdropper caps.
struct Targets {
  double gamma_d = 1.0;
  std::vector<double> gamma_e;
  double sigma_d2 = 1.0;
  double sigma_e2 = 1.0;

  /// Builds validated targets; every eavesdropper shares `gamma_e_db`.
  static Targets from_db(double gamma_d_db, double gamma_e_db, int eves, double sigma_d2 = 1.0,
                         double sigma_e2 = 1.0);

  void validate() const;
  int eves() const { return static_cast<int>(gamma_e.size()); }

  /// Amplitude threshold sigma_d * sqrt(gamma_d): apex of the constructive wedge.
  double amplitude_d() const { return std::sqrt(sigma_d2 * gamma_d); }
  double amplitude_e(int k) const {
    return std::sqrt(sigma_e2 * gamma_e.at(static_cast<std::size_t>(k)));
  }
};

enum class ChannelKind { true_csi, estimated };

struct ChannelSet {
  CVector h_d;
  std::vector<CVector> h_e;
  ChannelKind kind = ChannelKind::true_csi;

  int antennas() const { return static_cast<int>(h_d.size()); }
  int eves() const { return static_cast<int>(h_e.size()); }
  void validate() const;
};

/// Euclidean radii of the deterministic CSI error balls.
struct Uncertainty {
  double eps_d = 0.0;
  double eps_e = 0.0;

  void validate() const;
  bool is_zero() const { return eps_d == 0.0 && eps_e == 0.0; }
};

/// Information beamformer plus N artificial-noise beamformers. The
/// covariance fields are filled when the bundle came out of a relaxation.
struct PrecoderBundle {
  CVector b_d;
  std::vector<CVector> b_n;
  std::optional<CMatrix> info_covariance;
  std::optional<CMatrix> an_covariance;

  void validate() const;
};

/// Aggregate symbol-level precoding vector.
struct Precoder {
  CVector b;

  void validate() const;
};

/// Real images of a channel and a precoder such that
/// h^T b1 = Re(h^T b) and h^T b2 = Im(h^T b).
struct RealExpansion {
  RVector h;
  RVector b1;
  RVector b2;
};

/// b = b_d + sum_i b_n,i * exp(j(phi_n,i - phi_d)).
Precoder aggregate_precoder(const PrecoderBundle& bundle, std::span<const double> an_phases,
                            double symbol_phase);

double instantaneous_power(const Precoder& precoder);

/// Noise-free received point h^T b (plain transpose, no conjugation).
Complex received_point(const CVector& h, const CVector& b);
inline Complex received_point(const CVector& h, const Precoder& precoder) {
  return received_point(h, precoder.b);
}

double statistical_sinr_ir(const PrecoderBundle& bundle, const CVector& h_d, double sigma_d2);
double statistical_sinr_eve(const PrecoderBundle& bundle, const CVector& h_e, double sigma_e2);

/// Signed margin (Re - threshold) * tan(theta) - |Im|; nonnegative inside the wedge.
double ci_region_slack(Complex point, double threshold, double half_angle);
/// Signed margin Im - |Re - threshold| * tan(theta); nonnegative inside the upper wedge.
double destructive_region_slack(Complex point, double threshold, double half_angle);

bool ci_region_contains(Complex point, double threshold, double half_angle, double tol = 1e-6);
bool destructive_region_contains(Complex point, double threshold, double half_angle,
                                 double tol = 1e-6);

RealExpansion real_expand(const CVector& h, const Precoder& precoder);

}  // namespace cisec
