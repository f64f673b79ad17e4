// SPDX-License-Identifier: Apache-2.0
#include <cmath>

#include <gtest/gtest.h>

#include "cisec/channel.hpp"
#include "cisec/precoders.hpp"
#include "oracle.hpp"

using namespace cisec;

namespace {

ChannelSet fixture(std::uint64_t index) {
  ChannelConfig cfg;
  cfg.antennas = 2;
  cfg.eves = 1;
  cfg.seed = 2024;
  return sample_channels(cfg, index);
}

double rel(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-12); }

const Targets kTargets = Targets::from_db(10.0, 5.0, 1);
const Constellation kQpsk = Constellation::qpsk();

}  // namespace

TEST(GridOracle, FindsMinimumOfConvexQuadratic) {
  const auto f = [](const std::vector<double>& x) {
    return (x[0] - 0.3) * (x[0] - 0.3) + 2.0 * (x[1] + 1.2) * (x[1] + 1.2) + 0.5;
  };
  EXPECT_NEAR(oracle::coarse_to_fine(f, {-2, -2}, {2, 2}, {false, false}), 0.5, 1e-12);
}

TEST(GridOracle, ClosedFormWithoutEveConstraint) {
  // Orthogonal Eve and a loose cap: both designs collapse to the wedge apex.
  ChannelSet ch;
  ch.h_d = CVector::Zero(2);
  ch.h_d << 1.0, 1.0;
  ch.h_e = {CVector::Zero(2)};
  ch.h_e[0] << 1.0, -1.0;
  const Targets t = Targets::from_db(10.0 * std::log10(4.0), 10.0, 1);
  EXPECT_NEAR(oracle::symbol_level_power(ch, t, kQpsk, false), 2.0, 1e-8);
  EXPECT_NEAR(*oracle::conventional_power(ch, t), 2.0, 1e-8);
}

class OracleEquivalence : public ::testing::TestWithParam<int> {};

TEST_P(OracleEquivalence, Constructive) {
  const ChannelSet ch = fixture(static_cast<std::uint64_t>(GetParam()));
  const auto out = solve_constructive(ch, kTargets, kQpsk);
  ASSERT_TRUE(out.optimal());
  EXPECT_LT(rel(out.transmit_power, oracle::symbol_level_power(ch, kTargets, kQpsk, false)), 1e-4);
}

TEST_P(OracleEquivalence, ConstructiveDestructive) {
  const ChannelSet ch = fixture(static_cast<std::uint64_t>(GetParam()));
  const auto out = solve_constructive_destructive(ch, kTargets, kQpsk);
  ASSERT_TRUE(out.optimal());
  EXPECT_LT(rel(out.transmit_power, oracle::symbol_level_power(ch, kTargets, kQpsk, true)), 1e-4);
}

TEST_P(OracleEquivalence, Conventional) {
  const ChannelSet ch = fixture(static_cast<std::uint64_t>(GetParam()));
  const auto out = solve_conventional(ch, kTargets, 1);
  const auto ref = oracle::conventional_power(ch, kTargets);
  ASSERT_TRUE(out.optimal());
  ASSERT_TRUE(ref.has_value());
  EXPECT_LT(rel(out.transmit_power, *ref), 1e-4);
}

INSTANTIATE_TEST_SUITE_P(Fixtures, OracleEquivalence, ::testing::Range(0, 10));
