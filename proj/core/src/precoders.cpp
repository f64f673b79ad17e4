// SPDX-License-Identifier: Apache-2.0
#include "cisec/precoders.hpp"

#include <algorithm>
#include <cstdio>
#include <limits>

#include <Eigen/Eigenvalues>

#include "cisec/affine.hpp"

namespace cisec {

namespace {

using conic::AffineExpr;
using conic::ConeProgram;
using conic::HermitianExpr;
using conic::ProgramBuilder;
using conic::SolveStatus;

AffineExpr linear(const RVector& coeffs, double constant = 0.0) {
  AffineExpr e;
  e.coeffs = coeffs;
  e.constant = constant;
  return e;
}

// Re(h^T b) = re . x and Im(h^T b) = im . x for x = [Re b; Im b].
struct RealMaps {
  RVector re;
  RVector im;
};

RealMaps real_maps(const CVector& h) {
  const Eigen::Index m = h.size();
  RealMaps r{RVector(2 * m), RVector(2 * m)};
  r.re << h.real(), -h.imag();
  r.im << h.imag(), h.real();
  return r;
}

// b2 - t b1 (sign = -1) or b2 + t b1 (sign = +1) as a map of x = [Re b; Im b].
RMatrix wedge_map(Eigen::Index m, double t, double sign) {
  RMatrix v = RMatrix::Zero(2 * m, 2 * m);
  for (Eigen::Index i = 0; i < m; ++i) {
    v(i, i) = sign * t;
    v(i, m + i) = 1.0;
    v(m + i, i) = 1.0;
    v(m + i, m + i) = -sign * t;
  }
  return v;
}

// lhs >= eps * ||v x||, a plain half-space when eps = 0.
void add_robust_halfspace(ProgramBuilder& pb, const AffineExpr& lhs, const RMatrix& v, double eps) {
  if (eps == 0.0) {
    pb.add_nonnegative(lhs);
    return;
  }
  std::vector<AffineExpr> rows{lhs};
  for (Eigen::Index i = 0; i < v.rows(); ++i) rows.push_back(linear(eps * v.row(i).transpose()));
  pb.add_second_order(rows);
}

void check_inputs(const ChannelSet& channels, const Targets& targets) {
  channels.validate();
  targets.validate();
  require(targets.eves() == channels.eves(), "one SINR cap per eavesdropper channel required");
}

// ---------------------------------------------------------------------------
// Symbol-level designs.

ConeProgram build_symbol_level(Scheme scheme, const ChannelSet& ch, const Targets& t,
                               const Constellation& c, const Uncertainty& u) {
  const int m = ch.antennas();
  const double tan_t = std::tan(c.half_angle());
  ProgramBuilder pb;
  pb.add_variables(2 * m + 1);
  const AffineExpr r = pb.variable(2 * m);
  pb.minimize(r);

  std::vector<AffineExpr> norm_rows{r};
  for (int i = 0; i < 2 * m; ++i) norm_rows.push_back(pb.variable(i));
  pb.add_second_order(norm_rows);

  const RMatrix v_minus = wedge_map(m, tan_t, -1.0);
  const RMatrix v_plus = wedge_map(m, tan_t, 1.0);

  const RealMaps d = real_maps(ch.h_d);
  const double gd = t.amplitude_d();
  add_robust_halfspace(pb, linear(tan_t * d.re - d.im, -gd * tan_t), v_minus, u.eps_d);
  add_robust_halfspace(pb, linear(tan_t * d.re + d.im, -gd * tan_t), v_plus, u.eps_d);

  for (int k = 0; k < ch.eves(); ++k) {
    const RealMaps e = real_maps(ch.h_e[static_cast<std::size_t>(k)]);
    const double ge = t.amplitude_e(k);
    if (scheme == Scheme::constructive) {
      pb.add_second_order({AffineExpr::constant_term(ge), linear(e.re), linear(e.im)});
    } else {
      add_robust_halfspace(pb, linear(e.im + tan_t * e.re, -ge * tan_t), v_plus, u.eps_e);
      add_robust_halfspace(pb, linear(e.im - tan_t * e.re, ge * tan_t), v_minus, u.eps_e);
    }
  }
  return pb.build();
}

SolveOutcome solve_symbol_level(Scheme scheme, const ChannelSet& ch, const Targets& t,
                                const Constellation& c, const Uncertainty& u,
                                const PrecoderOptions& options) {
  check_inputs(ch, t);
  u.validate();
  const ConeProgram program = build_symbol_level(scheme, ch, t, c, u);
  const auto sol = conic::solve(program, options.solver);
  SolveOutcome out;
  out.scheme = scheme;
  out.status = sol.status == SolveStatus::unbounded ? SolveStatus::numerical_failure : sol.status;
  out.diagnostics.residuals = sol.residuals;
  out.diagnostics.iterations = sol.iterations;
  if (out.status != SolveStatus::optimal) return out;
  const int m = ch.antennas();
  Precoder p{CVector(m)};
  for (int i = 0; i < m; ++i) p.b(i) = Complex(sol.primal(i), sol.primal(m + i));
  out.transmit_power = instantaneous_power(p);
  out.precoder = std::move(p);
  return out;
}

// ---------------------------------------------------------------------------
// Conventional designs.

struct ConventionalModel {
  ProgramBuilder pb;
  HermitianExpr wd;
  HermitianExpr wn;
};

ConventionalModel build_conventional(const ChannelSet& ch, const Targets& t, const Uncertainty& u) {
  const int m = ch.antennas();
  ConventionalModel model;
  ProgramBuilder& pb = model.pb;
  model.wd = pb.add_hermitian(m);
  model.wn = pb.add_hermitian(m);
  pb.minimize(model.wd.trace() + model.wn.trace());
  pb.add_hermitian_psd(model.wd);
  pb.add_hermitian_psd(model.wn);

  // h^T W h* = u^H W u with u = conj(h).
  const auto constraint = [&](const CVector& h, const HermitianExpr& phi, double sigma2, double eps,
                              double sign) {
    // sign * (u^H phi u - sigma2) >= 0 for every u within eps of conj(h).
    const double s = sign / sigma2;
    const CVector u_hat = h.conjugate();
    const HermitianExpr a = s * phi;
    const AffineExpr c = s * (phi.quadratic_form(u_hat) - sigma2);
    if (eps == 0.0) {
      pb.add_nonnegative(c);
      return;
    }
    const int lambda = pb.add_variables(1);
    conic::s_procedure_block(pb, a, a.apply(u_hat), c, eps, pb.variable(lambda));
  };

  constraint(ch.h_d, (1.0 / t.gamma_d) * model.wd - model.wn, t.sigma_d2, u.eps_d, 1.0);
  for (int k = 0; k < ch.eves(); ++k) {
    const double ge = t.gamma_e[static_cast<std::size_t>(k)];
    constraint(ch.h_e[static_cast<std::size_t>(k)], (1.0 / ge) * model.wd - model.wn, t.sigma_e2,
               u.eps_e, -1.0);
  }
  return model;
}

CMatrix hermitian_part(const CMatrix& w) { return 0.5 * (w + w.adjoint()); }

// Worst-case margin of sign * (u^H phi u - sigma2) over ||u - conj(h)|| <= eps,
// in units of sigma2.
double quadratic_margin(const CMatrix& phi, const CVector& h, double sigma2, double eps,
                        double sign) {
  const CVector u_hat = h.conjugate();
  const CMatrix a = sign * phi;
  const CVector b = a * u_hat;
  const double c = sign * ((u_hat.adjoint() * phi * u_hat)(0).real() - sigma2);
  return min_quadratic_over_ball(a, b, c, eps) / sigma2;
}

double ir_margin(const CVector& bd, const CMatrix& wn, const CVector& h, const Targets& t,
                 double eps) {
  const CMatrix phi = bd * bd.adjoint() / t.gamma_d - wn;
  return quadratic_margin(phi, h, t.sigma_d2, eps, 1.0);
}

double eve_margin(const CVector& bd, const CMatrix& wn, const CVector& h, double gamma_e,
                  double sigma_e2, double eps) {
  const CMatrix phi = bd * bd.adjoint() / gamma_e - wn;
  return quadratic_margin(phi, h, sigma_e2, eps, -1.0);
}

// Smallest c >= 0 with the IR constraint met at c * w (the margin is
// nondecreasing in c).
std::optional<CVector> rescale_to_ir(const CVector& w, const CMatrix& wn, const ChannelSet& ch,
                                     const Targets& t, double eps) {
  if (w.norm() == 0.0) return std::nullopt;
  const auto ok = [&](double c) { return ir_margin(c * w, wn, ch.h_d, t, eps) >= 0.0; };
  double hi = 1.0;
  int doublings = 0;
  while (!ok(hi)) {
    if (++doublings > 80) return std::nullopt;
    hi *= 2.0;
  }
  double lo = 0.0;
  for (int it = 0; it < 200 && hi - lo > 1e-14 * hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    (ok(mid) ? hi : lo) = mid;
  }
  return CVector(hi * w);
}

bool eves_satisfied(const CVector& bd, const CMatrix& wn, const ChannelSet& ch, const Targets& t,
                    double eps, double tol) {
  for (int k = 0; k < ch.eves(); ++k)
    if (eve_margin(bd, wn, ch.h_e[static_cast<std::size_t>(k)],
                   t.gamma_e[static_cast<std::size_t>(k)], t.sigma_e2, eps) < -tol)
      return false;
  return true;
}

std::vector<CVector> synthesize_an_beams(const CMatrix& wn, int n) {
  std::vector<CVector> beams;
  if (n == 0) return beams;
  const Eigen::SelfAdjointEigenSolver<CMatrix> eig(wn);
  const RVector lam = eig.eigenvalues().cwiseMax(0.0);
  const Eigen::Index m = lam.size();
  const int used = static_cast<int>(std::min<Eigen::Index>(n, m));
  double kept = 0.0;
  for (int i = 0; i < used; ++i) kept += lam(m - 1 - i);
  const double total = lam.sum();
  const double scale = kept > 0.0 ? std::sqrt(total / kept) : 0.0;
  for (int i = 0; i < n; ++i) {
    if (i < used)
      beams.emplace_back(scale * std::sqrt(lam(m - 1 - i)) * eig.eigenvectors().col(m - 1 - i));
    else
      beams.emplace_back(CVector::Zero(m));
  }
  return beams;
}

SolveOutcome solve_conventional_family(Scheme scheme, const ChannelSet& ch, const Targets& t,
                                       const Uncertainty& u, int an_streams,
                                       const PrecoderOptions& options) {
  check_inputs(ch, t);
  u.validate();
  require(an_streams >= 0, "AN stream count must be nonnegative");
  ConventionalModel model = build_conventional(ch, t, u);
  const auto sol = conic::solve(model.pb.build(), options.solver);
  SolveOutcome out;
  out.scheme = scheme;
  out.status = sol.status == SolveStatus::unbounded ? SolveStatus::numerical_failure : sol.status;
  out.diagnostics.residuals = sol.residuals;
  out.diagnostics.iterations = sol.iterations;
  out.diagnostics.notes.push_back("single aggregate AN covariance; AN beams from its eigenvectors");
  if (out.status != SolveStatus::optimal) return out;

  const CMatrix wd = hermitian_part(model.wd.value(sol.primal));
  const CMatrix wn = hermitian_part(model.wn.value(sol.primal));
  const double trace_scale = std::max(1.0, wd.trace().real());
  RankOneResult rank = extract_rank_one(wd, 1e-6 * trace_scale, options.rank_threshold);

  std::optional<CVector> bd;
  if (rank.report.rank_one) {
    bd = rescale_to_ir(rank.w, wn, ch, t, u.eps_d);
    if (bd && !eves_satisfied(*bd, wn, ch, t, u.eps_e, options.verify_tol)) bd.reset();
  }
  double power = sol.objective;
  if (!bd) {
    Rng rng = make_stream(options.randomization_seed, 0, StreamTag::randomization);
    RandomizationChecker checker;
    checker.rescale = [&](const CVector& w) { return rescale_to_ir(w, wn, ch, t, u.eps_d); };
    checker.feasible = [&](const CVector& w) {
      return eves_satisfied(w, wn, ch, t, u.eps_e, 0.1 * options.verify_tol);
    };
    bd = gaussian_randomization(wd, checker, options.randomization_trials, rng);
    rank.report.randomized = true;
    rank.report.randomization_trials = options.randomization_trials;
    if (bd) {
      power = bd->squaredNorm() + wn.trace().real();
      out.diagnostics.notes.push_back("relaxation not rank-one; power of randomized beamformer");
    }
  }
  out.diagnostics.rank = rank.report;
  if (!bd) {
    out.status = SolveStatus::numerical_failure;
    out.diagnostics.notes.push_back("rank-one extraction and randomization failed");
    return out;
  }
  PrecoderBundle bundle;
  bundle.b_d = *bd;
  bundle.b_n = synthesize_an_beams(wn, an_streams);
  bundle.info_covariance = wd;
  bundle.an_covariance = wn;
  out.bundle = std::move(bundle);
  out.transmit_power = power;
  return out;
}

CMatrix an_covariance_of(const PrecoderBundle& bundle) {
  if (bundle.an_covariance) return *bundle.an_covariance;
  CMatrix wn = CMatrix::Zero(bundle.b_d.size(), bundle.b_d.size());
  for (const auto& b : bundle.b_n) wn += b * b.adjoint();
  return wn;
}

}  // namespace

std::string scheme_id(Scheme scheme) {
  switch (scheme) {
    case Scheme::conventional: return "conv";
    case Scheme::constructive: return "const";
    case Scheme::constructive_destructive: return "const_dest";
    case Scheme::robust_conventional: return "robust_conv";
    case Scheme::robust_constructive: return "robust_const";
  }
  return "unknown";
}

std::optional<Scheme> parse_scheme(const std::string& id) {
  for (Scheme s : {Scheme::conventional, Scheme::constructive, Scheme::constructive_destructive,
                   Scheme::robust_conventional, Scheme::robust_constructive})
    if (scheme_id(s) == id) return s;
  return std::nullopt;
}

bool is_conventional(Scheme scheme) {
  return scheme == Scheme::conventional || scheme == Scheme::robust_conventional;
}

bool is_robust(Scheme scheme) {
  return scheme == Scheme::robust_conventional || scheme == Scheme::robust_constructive;
}

SolveOutcome solve_conventional(const ChannelSet& channels, const Targets& targets, int an_streams,
                                const PrecoderOptions& options) {
  return solve_conventional_family(Scheme::conventional, channels, targets, Uncertainty{},
                                   an_streams, options);
}

SolveOutcome solve_constructive(const ChannelSet& channels, const Targets& targets,
                                const Constellation& constellation,
                                const PrecoderOptions& options) {
  return solve_symbol_level(Scheme::constructive, channels, targets, constellation, Uncertainty{},
                            options);
}

SolveOutcome solve_constructive_destructive(const ChannelSet& channels, const Targets& targets,
                                            const Constellation& constellation,
                                            const PrecoderOptions& options) {
  return solve_symbol_level(Scheme::constructive_destructive, channels, targets, constellation,
                            Uncertainty{}, options);
}

SolveOutcome solve_robust_conventional(const ChannelSet& estimate, const Uncertainty& uncertainty,
                                       const Targets& targets, int an_streams,
                                       const PrecoderOptions& options) {
  return solve_conventional_family(Scheme::robust_conventional, estimate, targets, uncertainty,
                                   an_streams, options);
}

SolveOutcome solve_robust_constructive(const ChannelSet& estimate, const Uncertainty& uncertainty,
                                       const Targets& targets, const Constellation& constellation,
                                       const PrecoderOptions& options) {
  return solve_symbol_level(Scheme::robust_constructive, estimate, targets, constellation,
                            uncertainty, options);
}

ConeProgram constructive_program(Scheme scheme, const ChannelSet& channels, const Targets& targets,
                                 const Constellation& constellation,
                                 const Uncertainty& uncertainty) {
  require(!is_conventional(scheme), "constructive_program: scheme is not symbol-level");
  require(scheme == Scheme::robust_constructive || uncertainty.is_zero(),
          "constructive_program: uncertainty applies to the robust design only");
  check_inputs(channels, targets);
  uncertainty.validate();
  return build_symbol_level(scheme, channels, targets, constellation, uncertainty);
}

ConeProgram conventional_program(const ChannelSet& channels, const Targets& targets,
                                 const Uncertainty& uncertainty) {
  check_inputs(channels, targets);
  uncertainty.validate();
  return build_conventional(channels, targets, uncertainty).pb.build();
}

bool VerificationReport::all_satisfied() const {
  return std::all_of(constraints.begin(), constraints.end(),
                     [](const ConstraintResidual& r) { return r.satisfied; });
}

int VerificationReport::violations() const {
  return static_cast<int>(std::count_if(constraints.begin(), constraints.end(),
                                        [](const ConstraintResidual& r) { return !r.satisfied; }));
}

double VerificationReport::min_slack() const {
  double lo = std::numeric_limits<double>::infinity();
  for (const auto& r : constraints) lo = std::min(lo, r.slack);
  return lo;
}

VerificationReport verify_solution(const SolveOutcome& outcome, const ChannelSet& channels,
                                   const Targets& targets, const Constellation& constellation,
                                   const std::optional<Uncertainty>& uncertainty, double tol) {
  require(outcome.optimal(), "verify_solution: outcome is not optimal");
  check_inputs(channels, targets);
  const Uncertainty u = uncertainty.value_or(Uncertainty{});
  u.validate();
  VerificationReport report;
  const auto push = [&](std::string name, double slack) {
    report.constraints.push_back({std::move(name), slack, slack >= -tol});
  };

  if (is_conventional(outcome.scheme)) {
    require(outcome.bundle.has_value(), "verify_solution: conventional outcome lacks a bundle");
    const PrecoderBundle& bundle = *outcome.bundle;
    require(bundle.b_d.size() == channels.antennas(), "verify_solution: antenna count mismatch");
    const CMatrix wn = an_covariance_of(bundle);
    push("ir_sinr", ir_margin(bundle.b_d, wn, channels.h_d, targets, u.eps_d));
    for (int k = 0; k < channels.eves(); ++k)
      push("eve" + std::to_string(k + 1) + "_sinr",
           eve_margin(bundle.b_d, wn, channels.h_e[static_cast<std::size_t>(k)],
                      targets.gamma_e[static_cast<std::size_t>(k)], targets.sigma_e2, u.eps_e));
    return report;
  }

  require(outcome.precoder.has_value(), "verify_solution: symbol-level outcome lacks a precoder");
  const CVector& b = outcome.precoder->b;
  require(b.size() == channels.antennas(), "verify_solution: antenna count mismatch");
  const double tan_t = std::tan(constellation.half_angle());
  const double gd = targets.amplitude_d();
  // Worst case of a linear functional of the channel over a ball of radius
  // eps is its nominal value minus eps times the norm of the real image.
  const RealExpansion nominal_d = real_expand(channels.h_d, Precoder{b});
  const double n_minus = (nominal_d.b2 - tan_t * nominal_d.b1).norm();
  const double n_plus = (nominal_d.b2 + tan_t * nominal_d.b1).norm();
  const Complex yd = received_point(channels.h_d, b);
  const double ci_minus = (yd.real() - gd) * tan_t - yd.imag() - u.eps_d * n_minus;
  const double ci_plus = (yd.real() - gd) * tan_t + yd.imag() - u.eps_d * n_plus;
  push("ir_constructive", std::min(ci_minus, ci_plus));
  for (int k = 0; k < channels.eves(); ++k) {
    const Complex ye = received_point(channels.h_e[static_cast<std::size_t>(k)], b);
    const double ge = targets.amplitude_e(k);
    const std::string tag = "eve" + std::to_string(k + 1);
    if (outcome.scheme == Scheme::constructive) {
      push(tag + "_cap", ge - std::abs(ye) - u.eps_e * b.norm());
    } else {
      const double upper = ye.imag() + (ye.real() - ge) * tan_t - u.eps_e * n_plus;
      const double lower = ye.imag() - (ye.real() - ge) * tan_t - u.eps_e * n_minus;
      push(tag + "_destructive", std::min(upper, lower));
    }
  }
  return report;
}

bool satisfies_constraints(const SolveOutcome& outcome, const ChannelSet& channels,
                           const Targets& targets, const Constellation& constellation, double tol) {
  if (is_conventional(outcome.scheme)) {
    const PrecoderBundle& bundle = *outcome.bundle;
    const CMatrix& wn = *bundle.an_covariance;
    const auto form = [&](const CVector& h) {
      return (h.transpose() * wn * h.conjugate())(0).real();
    };
    const auto signal = [&](const CVector& h) { return std::norm(received_point(h, bundle.b_d)); };
    const double ir = (signal(channels.h_d) / targets.gamma_d - form(channels.h_d) - targets.sigma_d2) /
                      targets.sigma_d2;
    if (ir < -tol) return false;
    for (int k = 0; k < channels.eves(); ++k) {
      const CVector& h = channels.h_e[static_cast<std::size_t>(k)];
      const double eve = (targets.sigma_e2 - signal(h) / targets.gamma_e[static_cast<std::size_t>(k)] +
                          form(h)) /
                         targets.sigma_e2;
      if (eve < -tol) return false;
    }
    return true;
  }
  const CVector& b = outcome.precoder->b;
  const double theta = constellation.half_angle();
  if (ci_region_slack(received_point(channels.h_d, b), targets.amplitude_d(), theta) < -tol)
    return false;
  for (int k = 0; k < channels.eves(); ++k) {
    const Complex ye = received_point(channels.h_e[static_cast<std::size_t>(k)], b);
    const double ge = targets.amplitude_e(k);
    const double slack = outcome.scheme == Scheme::constructive
                             ? ge - std::abs(ye)
                             : destructive_region_slack(ye, ge, theta);
    if (slack < -tol) return false;
  }
  return true;
}

}  // namespace cisec
