// SPDX-License-Identifier: Apache-2.0
#include <cmath>
#include <numbers>
#include <random>

#include <gtest/gtest.h>

#include "cisec/channel.hpp"
#include "cisec/model.hpp"

using namespace cisec;

namespace {


Complex random_point(std::mt19937_64& rng, double scale) {
  std::uniform_real_distribution<double> u(-scale, scale);
  const double re = u(rng);
  return {re, u(rng)};
}

}  // namespace

TEST(Constellation, QpskOnDiagonals) {
  const Constellation c = Constellation::qpsk();
  ASSERT_EQ(c.order(), 4);
  EXPECT_DOUBLE_EQ(c.half_angle(), kPi / 4);
  for (int m = 0; m < 4; ++m) {
    const Complex expected = std::polar(1.0, kPi / 4 + m * kPi / 2);
    EXPECT_NEAR(std::abs(c.symbol(m) - expected), 0.0, 1e-15);
  }
}

TEST(Constellation, RejectsTooSmallOrder) {
  EXPECT_THROW(Constellation(2), InvalidArgument);
}

TEST(Targets, DecibelConversion) {
  const Targets t = Targets::from_db(10.0, 3.0, 2, 2.0, 0.5);
  EXPECT_NEAR(t.gamma_d, 10.0, 1e-12);
  ASSERT_EQ(t.eves(), 2);
  EXPECT_NEAR(t.gamma_e[1], std::pow(10.0, 0.3), 1e-12);
  EXPECT_NEAR(t.amplitude_d(), std::sqrt(20.0), 1e-12);
  EXPECT_NEAR(t.amplitude_e(0), std::sqrt(0.5 * std::pow(10.0, 0.3)), 1e-12);
}

TEST(RealExpansion, IdentitiesOnRandomPairs) {
  Rng rng(7);
  for (int trial = 0; trial < 1000; ++trial) {
    const CVector h = complex_gaussian(5, 1.0, rng);
    const Precoder p{complex_gaussian(5, 2.0, rng)};
    const RealExpansion e = real_expand(h, p);
    const Complex y = received_point(h, p);
    EXPECT_NEAR(e.h.dot(e.b1), y.real(), 1e-10);
    EXPECT_NEAR(e.h.dot(e.b2), y.imag(), 1e-10);
    EXPECT_NEAR(e.b1.norm(), p.b.norm(), 1e-10);
    EXPECT_NEAR(e.b2.norm(), p.b.norm(), 1e-10);
  }
}

TEST(ReceivedPoint, PlainTranspose) {
  CVector h(2), b(2);
  h << Complex(0, 1), 1.0;
  b << 1.0, Complex(0, 1);
  // With conjugation the two terms would cancel.
  EXPECT_NEAR(std::abs(received_point(h, b) - Complex(0, 2)), 0.0, 1e-15);
}

TEST(Regions, ConstructiveMatchesPolarOracleAtZeroThreshold) {
  std::mt19937_64 rng(11);
  for (int order : {3, 4, 8}) {
    const double theta = kPi / order;
    for (int i = 0; i < 10000; ++i) {
      const Complex p = random_point(rng, 2.0);
      const bool inside = std::abs(std::arg(p)) <= theta || p == Complex(0, 0);
      // Points within rounding of the sector edge are ambiguous for both tests.
      if (std::abs(std::abs(std::arg(p)) - theta) < 1e-9) continue;
      EXPECT_EQ(ci_region_contains(p, 0.0, theta, 0.0), inside) << p;
    }
  }
}

TEST(Regions, DestructiveAndConstructiveDisjoint) {
  std::mt19937_64 rng(12);
  const double theta = kPi / 4;
  for (int i = 0; i < 10000; ++i) {
    const double g = std::uniform_real_distribution<double>(0.0, 2.0)(rng);
    const Complex p = random_point(rng, 4.0);
    if (destructive_region_contains(p, g, theta, 0.0)) EXPECT_FALSE(ci_region_contains(p, g, theta, 0.0)) << p;
  }
  EXPECT_TRUE(destructive_region_contains(Complex(1.0, 0.0), 1.0, theta, 0.0));
  EXPECT_TRUE(ci_region_contains(Complex(1.0, 0.0), 1.0, theta, 0.0));
}

TEST(Regions, SlackExamples) {
  const double theta = kPi / 4;
  EXPECT_NEAR(ci_region_slack(Complex(3.0, 0.5), 1.0, theta), 1.5, 1e-12);
  EXPECT_NEAR(ci_region_slack(Complex(1.0, 1.0), 1.0, theta), -1.0, 1e-12);
  EXPECT_NEAR(destructive_region_slack(Complex(2.0, 3.0), 1.0, theta), 2.0, 1e-12);
  EXPECT_NEAR(destructive_region_slack(Complex(0.0, 0.0), 1.0, theta), -1.0, 1e-12);
}

TEST(AggregatePrecoder, CommonPhaseShiftLeavesPowerUnchanged) {
  Rng rng(3);
  std::uniform_real_distribution<double> phase(-kPi, kPi);
  for (int trial = 0; trial < 200; ++trial) {
    PrecoderBundle bundle;
    bundle.b_d = complex_gaussian(4, 1.0, rng);
    for (int i = 0; i < 3; ++i) bundle.b_n.push_back(complex_gaussian(4, 0.5, rng));
    std::vector<double> phi{phase(rng), phase(rng), phase(rng)};
    const double phi_d = phase(rng);
    const double base = instantaneous_power(aggregate_precoder(bundle, phi, phi_d));
    const double shift = phase(rng);
    for (double& p : phi) p += shift;
    const double moved = instantaneous_power(aggregate_precoder(bundle, phi, phi_d + shift));
    EXPECT_NEAR(moved, base, 1e-12 * std::max(1.0, base));
  }
}

TEST(AggregatePrecoder, MatchesDefinition) {
  PrecoderBundle bundle;
  bundle.b_d = CVector::Zero(2);
  bundle.b_d << 1.0, 0.0;
  CVector bn(2);
  bn << 0.0, 2.0;
  bundle.b_n = {bn};
  const double phi_n = 0.7, phi_d = 0.2;
  const Precoder p = aggregate_precoder(bundle, std::vector<double>{phi_n}, phi_d);
  EXPECT_NEAR(std::abs(p.b(0) - Complex(1.0, 0.0)), 0.0, 1e-15);
  EXPECT_NEAR(std::abs(p.b(1) - std::polar(2.0, phi_n - phi_d)), 0.0, 1e-15);
}

TEST(StatisticalSinr, MatchesHandComputation) {
  PrecoderBundle bundle;
  bundle.b_d = CVector::Zero(2);
  bundle.b_d << 1.0, 1.0;
  CVector bn(2);
  bn << 1.0, -1.0;
  bundle.b_n = {bn};
  CVector hd(2), he(2);
  hd << 1.0, 1.0;
  he << 1.0, 0.0;
  // IR: |2|^2 / (0 + 1); Eve: |1|^2 / (|1|^2 + 2).
  EXPECT_NEAR(statistical_sinr_ir(bundle, hd, 1.0), 4.0, 1e-12);
  EXPECT_NEAR(statistical_sinr_eve(bundle, he, 2.0), 1.0 / 3.0, 1e-12);
}
