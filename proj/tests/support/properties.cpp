// SPDX-License-Identifier: Apache-2.0
#include "properties.hpp"

#include <cmath>
#include <cstring>
#include <numbers>
#include <random>
#include <sstream>

#include "cisec/affine.hpp"
#include "cisec/evaluation.hpp"
#include "cisec/relaxation.hpp"

namespace cisec::props {

void Result::expect(bool ok, const std::string& what) {
  ++checks;
  if (ok) return;
  if (passed || std::count(detail.begin(), detail.end(), ';') < 4) {
    if (!detail.empty()) detail += "; ";
    detail += what;
  }
  passed = false;
}

namespace {

constexpr double kPi = std::numbers::pi;
const Constellation kQpsk = Constellation::qpsk();
constexpr std::uint64_t kSeed = 4242;

ChannelSet fixture(int nt, int k, std::uint64_t index, std::uint64_t salt = 0) {
  ChannelConfig cfg;
  cfg.antennas = nt;
  cfg.eves = k;
  cfg.seed = kSeed + salt;
  return sample_channels(cfg, index);
}

SolveOutcome solve(Scheme s, const ChannelSet& ch, const Targets& t, const Uncertainty& u = {}) {
  switch (s) {
    case Scheme::conventional: return solve_conventional(ch, t, 3);
    case Scheme::constructive: return solve_constructive(ch, t, kQpsk);
    case Scheme::constructive_destructive: return solve_constructive_destructive(ch, t, kQpsk);
    case Scheme::robust_conventional: return solve_robust_conventional(ch, u, t, 3);
    case Scheme::robust_constructive: return solve_robust_constructive(ch, u, t, kQpsk);
  }
  return {};
}

std::string tag(Scheme s, std::uint64_t fixture_index) {
  return scheme_id(s) + " fixture " + std::to_string(fixture_index);
}

double rel_diff(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-12); }

CMatrix random_hermitian(int n, Rng& rng) {
  CMatrix g(n, n);
  for (int j = 0; j < n; ++j) g.col(j) = complex_gaussian(n, 1.0, rng);
  return 0.5 * (g + g.adjoint());
}

const Scheme kAll[] = {Scheme::conventional, Scheme::constructive,
                       Scheme::constructive_destructive, Scheme::robust_conventional,
                       Scheme::robust_constructive};
const Uncertainty kSmallError{0.05, 0.1};

// Checks power along a grid where the feasible set shrinks (direction +1)
// or grows (direction -1) from one point to the next.
void check_monotone(Result& r, const std::vector<SolveOutcome>& path, int direction,
                    const std::string& where) {
  for (std::size_t i = 0; i < path.size(); ++i) {
    const auto st = path[i].status;
    r.expect(st != conic::SolveStatus::numerical_failure,
             where + ": numerical failure at grid point " + std::to_string(i));
  }
  for (std::size_t i = 0; i + 1 < path.size(); ++i) {
    const SolveOutcome& a = path[i];
    const SolveOutcome& b = path[i + 1];
    const SolveOutcome& looser = direction > 0 ? a : b;
    const SolveOutcome& tighter = direction > 0 ? b : a;
    if (tighter.optimal()) {
      r.expect(looser.optimal(), where + ": feasible set did not shrink monotonically");
      if (looser.optimal())
        r.expect(tighter.transmit_power >= looser.transmit_power * (1.0 - 1e-6) - 1e-9,
                 where + ": power " + std::to_string(tighter.transmit_power) + " < " +
                     std::to_string(looser.transmit_power) + " at grid point " +
                     std::to_string(i));
    }
  }
}

}  // namespace

Result real_expansion_identities(int pairs) {
  Result r{"real-expansion identities"};
  Rng rng(kSeed);
  double worst = 0.0;
  for (int i = 0; i < pairs; ++i) {
    const CVector h = complex_gaussian(6, 1.0, rng);
    const Precoder p{complex_gaussian(6, 1.0, rng)};
    const RealExpansion e = real_expand(h, p);
    const Complex y = received_point(h, p);
    const double err = std::max({std::abs(e.h.dot(e.b1) - y.real()), std::abs(e.h.dot(e.b2) - y.imag()),
                                 std::abs(e.b2.norm() - p.b.norm())});
    worst = std::max(worst, err);
    r.expect(err <= 1e-10, "pair " + std::to_string(i) + " error " + std::to_string(err));
  }
  r.detail = r.passed ? "max error " + std::to_string(worst) : r.detail;
  return r;
}

Result s_procedure_soundness(int instances, int samples) {
  Result r{"S-procedure soundness"};
  Rng rng(kSeed + 1);
  std::uniform_real_distribution<double> radius(0.05, 1.0);
  double worst = std::numeric_limits<double>::infinity();
  for (int trial = 0; trial < instances; ++trial) {
    const int n = 2 + trial % 3;
    const CMatrix a = random_hermitian(n, rng);
    const CVector bv = complex_gaussian(n, 1.0, rng);
    const double eps = radius(rng);
    // Smallest constant c for which the certificate exists.
    conic::ProgramBuilder pb;
    const int c_idx = pb.add_variables(2);
    std::vector<conic::ComplexAffine> b;
    for (int i = 0; i < n; ++i)
      b.push_back({conic::AffineExpr::constant_term(bv(i).real()),
                   conic::AffineExpr::constant_term(bv(i).imag())});
    conic::s_procedure_block(pb, conic::HermitianExpr::constant(a), b, pb.variable(c_idx), eps,
                             pb.variable(c_idx + 1));
    pb.minimize(pb.variable(c_idx));
    const conic::ConeSolution sol = conic::solve(pb.build());
    r.expect(sol.status == conic::SolveStatus::optimal, "instance " + std::to_string(trial) + " not optimal");
    if (sol.status != conic::SolveStatus::optimal) continue;
    const double c = sol.primal(c_idx);
    double lo = std::numeric_limits<double>::infinity();
    for (int s = 0; s < samples; ++s) {
      CVector e = complex_gaussian(n, 1.0, rng);
      e *= eps / e.norm();
      lo = std::min(lo, (e.adjoint() * a * e)(0).real() + 2.0 * bv.dot(e).real() + c);
    }
    worst = std::min(worst, lo);
    r.expect(lo >= -1e-6, "instance " + std::to_string(trial) + " sampled minimum " + std::to_string(lo));
  }
  if (r.passed) r.detail = "min sampled value " + std::to_string(worst);
  return r;
}

Result feasibility_postconditions(int instances_per_scheme) {
  Result r{"feasibility postconditions"};
  std::mt19937_64 rng(kSeed + 2);
  std::uniform_int_distribution<int> nt_d(2, 6), k_d(0, 3);
  std::uniform_real_distribution<double> gd_d(0.0, 20.0), ge_d(0.0, 10.0), eps_d(0.0, 0.2);
  int optimal = 0;
  for (Scheme s : kAll) {
    for (int i = 0; i < instances_per_scheme; ++i) {
      const int nt = nt_d(rng), k = std::min(k_d(rng), nt - 1);
      const Targets t = Targets::from_db(gd_d(rng), ge_d(rng), k);
      const Uncertainty u{eps_d(rng), eps_d(rng)};
      ChannelSet ch = fixture(nt, k, static_cast<std::uint64_t>(i), 1);
      if (is_robust(s)) ch.kind = ChannelKind::estimated;
      const SolveOutcome o = solve(s, ch, t, u);
      const std::string where = tag(s, static_cast<std::uint64_t>(i));
      r.expect(o.status != conic::SolveStatus::numerical_failure, where + ": numerical failure");
      if (!o.optimal()) continue;
      ++optimal;
      const std::optional<Uncertainty> unc = is_robust(s) ? std::optional<Uncertainty>(u) : std::nullopt;
      const VerificationReport v = verify_solution(o, ch, t, kQpsk, unc, 1e-6);
      r.expect(v.all_satisfied(), where + ": min slack " + std::to_string(v.min_slack()));
    }
  }
  if (r.passed) r.detail = std::to_string(optimal) + " optimal outcomes verified";
  return r;
}

Result gamma_d_monotonicity(int fixtures) {
  Result r{"Gamma_d monotonicity"};
  const double grid[] = {0.0, 5.0, 10.0, 15.0};
  for (int f = 0; f < fixtures; ++f) {
    ChannelSet ch = fixture(4, 2, static_cast<std::uint64_t>(f), 2);
    for (Scheme s : kAll) {
      std::vector<SolveOutcome> path;
      for (double g : grid) path.push_back(solve(s, ch, Targets::from_db(g, 5.0, 2), kSmallError));
      check_monotone(r, path, +1, tag(s, static_cast<std::uint64_t>(f)));
    }
  }
  return r;
}

Result gamma_e_monotonicity(int fixtures) {
  Result r{"Gamma_e monotonicity"};
  const double grid[] = {0.0, 2.5, 5.0, 7.5};
  for (int f = 0; f < fixtures; ++f) {
    ChannelSet ch = fixture(4, 2, static_cast<std::uint64_t>(f), 3);
    for (Scheme s : {Scheme::conventional, Scheme::constructive}) {
      std::vector<SolveOutcome> path;
      for (double g : grid) path.push_back(solve(s, ch, Targets::from_db(10.0, g, 2)));
      check_monotone(r, path, -1, tag(s, static_cast<std::uint64_t>(f)));
    }
  }
  return r;
}

Result ir_channel_scaling(int fixtures) {
  Result r{"IR channel scaling"};
  for (int f = 0; f < fixtures; ++f) {
    const ChannelSet ch = fixture(4, 2, static_cast<std::uint64_t>(f), 4);
    ChannelSet strong = ch;
    strong.h_d *= 1.5;
    const Targets t = Targets::from_db(10.0, 5.0, 2);
    for (Scheme s : {Scheme::conventional, Scheme::constructive}) {
      const SolveOutcome a = solve(s, ch, t), b = solve(s, strong, t);
      if (!a.optimal()) continue;
      r.expect(b.optimal(), tag(s, static_cast<std::uint64_t>(f)) + ": stronger IR channel infeasible");
      if (b.optimal())
        r.expect(b.transmit_power <= a.transmit_power * (1.0 + 1e-6) + 1e-9,
                 tag(s, static_cast<std::uint64_t>(f)) + ": power increased");
    }
  }
  return r;
}

Result phase_invariance(int fixtures) {
  Result r{"phase invariance"};
  std::mt19937_64 rng(kSeed + 5);
  std::uniform_real_distribution<double> phase(-kPi, kPi);
  double worst = 0.0;
  for (int f = 0; f < fixtures; ++f) {
    ChannelSet ch = fixture(4, 2, static_cast<std::uint64_t>(f), 5);
    ch.kind = ChannelKind::estimated;
    const Targets t = Targets::from_db(10.0, 5.0, 2);
    for (Scheme s : kAll) {
      const SolveOutcome base = solve(s, ch, t, kSmallError);
      if (!base.optimal()) continue;
      const bool symmetric = s == Scheme::conventional || s == Scheme::constructive ||
                             s == Scheme::robust_conventional;
      std::vector<ChannelSet> variants;
      if (symmetric) {
        // Each node on its own, including every eavesdropper.
        for (int node = 0; node <= ch.eves(); ++node) {
          ChannelSet v = ch;
          const Complex rot = std::polar(1.0, phase(rng));
          if (node == 0) v.h_d *= rot;
          else v.h_e[static_cast<std::size_t>(node - 1)] *= rot;
          variants.push_back(std::move(v));
        }
      } else {
        ChannelSet v = ch;
        const Complex rot = std::polar(1.0, phase(rng));
        v.h_d *= rot;
        for (auto& h : v.h_e) h *= rot;
        variants.push_back(std::move(v));
      }
      for (const auto& v : variants) {
        const SolveOutcome o = solve(s, v, t, kSmallError);
        r.expect(o.optimal(), tag(s, static_cast<std::uint64_t>(f)) + ": rotated instance not optimal");
        if (!o.optimal()) continue;
        const double d = rel_diff(o.transmit_power, base.transmit_power);
        worst = std::max(worst, d);
        r.expect(d <= 1e-6, tag(s, static_cast<std::uint64_t>(f)) + ": relative change " + std::to_string(d));
      }
    }
  }
  if (r.passed) {
    std::ostringstream os;
    os << "max relative change " << worst;
    r.detail = os.str();
  }
  return r;
}

Result robust_dominance(int fixtures) {
  Result r{"robust dominance"};
  const Uncertainty u{0.1, 0.3};
  for (int f = 0; f < fixtures; ++f) {
    ChannelSet ch = fixture(6, 3, static_cast<std::uint64_t>(f), 6);
    ch.kind = ChannelKind::estimated;
    const Targets t = Targets::from_db(10.0, 5.0, 3);
    const std::pair<Scheme, Scheme> pairs[] = {
        {Scheme::robust_conventional, Scheme::conventional},
        {Scheme::robust_constructive, Scheme::constructive_destructive}};
    for (auto [robust, nominal] : pairs) {
      const SolveOutcome a = solve(robust, ch, t, u);
      const SolveOutcome b = solve(nominal, ch, t, u);
      if (!a.optimal()) continue;
      r.expect(b.optimal(), tag(robust, static_cast<std::uint64_t>(f)) + ": nominal counterpart not optimal");
      if (b.optimal())
        r.expect(a.transmit_power >= b.transmit_power * (1.0 - 1e-6),
                 tag(robust, static_cast<std::uint64_t>(f)) + ": robust power below nominal");
    }
  }
  return r;
}

Result determinism() {
  Result r{"determinism"};
  const ChannelSet ch = fixture(5, 2, 0, 7);
  const Targets t = Targets::from_db(12.0, 3.0, 2);
  for (Scheme s : kAll) {
    const SolveOutcome a = solve(s, ch, t, kSmallError), b = solve(s, ch, t, kSmallError);
    r.expect(std::memcmp(&a.transmit_power, &b.transmit_power, sizeof(double)) == 0,
             scheme_id(s) + ": repeated solve differs");
    r.expect(outcome_to_json(a) == outcome_to_json(b), scheme_id(s) + ": outcome record differs");
  }

  ExperimentConfig cfg;
  cfg.antennas = 4;
  cfg.eves = 2;
  cfg.gamma_d_db = {5.0, 10.0};
  cfg.realizations = 6;
  cfg.slots = 200;
  cfg.probe_samples = 100;
  cfg.schemes = {Scheme::conventional, Scheme::constructive, Scheme::constructive_destructive,
                 Scheme::robust_conventional, Scheme::robust_constructive};
  const auto csv = [&](int threads, int mode) {
    ExperimentConfig c = cfg;
    c.threads = threads;
    std::ostringstream os;
    write_sweep_csv(os, mode == 0 ? run_power_sweep(c) : mode == 1 ? run_ser(c) : run_robust_probe(c));
    return os.str();
  };
  for (int mode = 0; mode < 3; ++mode) {
    const std::string one = csv(1, mode);
    r.expect(one == csv(1, mode), "repeated run differs (mode " + std::to_string(mode) + ")");
    r.expect(one == csv(3, mode), "3 threads differ from 1 (mode " + std::to_string(mode) + ")");
  }
  return r;
}

}  // namespace cisec::props
