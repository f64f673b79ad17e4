// SPDX-License-Identifier: Apache-2.0
#include <cmath>

#include <gtest/gtest.h>

#include "cisec/channel.hpp"
#include "cisec/precoders.hpp"

using namespace cisec;

namespace {

CVector cvec(std::initializer_list<Complex> v) {
  CVector out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (Complex x : v) out(i++) = x;
  return out;
}

ChannelSet fixture(CVector hd, std::vector<CVector> he = {}) {
  ChannelSet ch;
  ch.h_d = std::move(hd);
  ch.h_e = std::move(he);
  return ch;
}

Targets targets_linear(double gd, std::vector<double> ge) {
  Targets t;
  t.gamma_d = gd;
  t.gamma_e = std::move(ge);
  return t;
}

const Constellation kQpsk = Constellation::qpsk();

}  // namespace

TEST(Conventional, MrtClosedForm) {
  const auto ch = fixture(cvec({1.0, 1.0}));
  const auto out = solve_conventional(ch, targets_linear(4.0, {}), 3);
  ASSERT_TRUE(out.optimal());
  EXPECT_NEAR(out.transmit_power, 2.0, 1e-6);
  EXPECT_NEAR(out.bundle->an_covariance->trace().real(), 0.0, 1e-6);
  EXPECT_NEAR(statistical_sinr_ir(*out.bundle, ch.h_d, 1.0), 4.0, 1e-6);
  EXPECT_TRUE(out.diagnostics.rank->rank_one);
}

TEST(Conventional, VanishingTargetNeedsVanishingPower) {
  const auto ch = fixture(cvec({1.0, Complex(0.3, -0.4)}), {cvec({0.2, 1.0})});
  const auto out = solve_conventional(ch, targets_linear(1e-6, {1.0}), 1);
  ASSERT_TRUE(out.optimal());
  EXPECT_LE(out.transmit_power, 1e-5);
}

TEST(Constructive, MinimumNormOnWedgeApex) {
  const auto out = solve_constructive(fixture(cvec({1.0, 1.0})), targets_linear(4.0, {}), kQpsk);
  ASSERT_TRUE(out.optimal());
  EXPECT_NEAR(out.transmit_power, 2.0, 1e-6);
  EXPECT_NEAR(std::abs(out.precoder->b(0) - 1.0), 0.0, 1e-5);
  EXPECT_NEAR(std::abs(out.precoder->b(1) - 1.0), 0.0, 1e-5);
}

TEST(Constructive, OrthogonalEveIsInactive) {
  const auto ch = fixture(cvec({1.0, 0.0}), {cvec({0.0, 1.0})});
  const auto out = solve_constructive(ch, targets_linear(4.0, {0.5}), kQpsk);
  ASSERT_TRUE(out.optimal());
  EXPECT_NEAR(out.transmit_power, 4.0, 1e-6);
  EXPECT_NEAR(std::abs(out.precoder->b(0) - 2.0), 0.0, 1e-5);
  EXPECT_NEAR(std::abs(out.precoder->b(1)), 0.0, 1e-5);
}

TEST(ConstructiveDestructive, NoEvesMatchesMrt) {
  const auto out =
      solve_constructive_destructive(fixture(cvec({1.0, 1.0})), targets_linear(4.0, {}), kQpsk);
  ASSERT_TRUE(out.optimal());
  EXPECT_NEAR(out.transmit_power, 2.0, 1e-6);
}

TEST(ConstructiveDestructive, EvePointProjectedOntoUpperWedge) {
  const auto ch = fixture(cvec({1.0, 0.0}), {cvec({0.0, 1.0})});
  const auto out = solve_constructive_destructive(ch, targets_linear(4.0, {1.0}), kQpsk);
  ASSERT_TRUE(out.optimal());
  EXPECT_NEAR(out.transmit_power, 4.5, 1e-6);
  EXPECT_NEAR(std::abs(out.precoder->b(0) - 2.0), 0.0, 1e-5);
  EXPECT_NEAR(std::abs(out.precoder->b(1) - Complex(0.5, 0.5)), 0.0, 1e-4);
}

TEST(RobustConstructive, ClosedFormOnSymmetricChannel) {
  const auto ch = fixture(cvec({1.0, 1.0}));
  const auto out =
      solve_robust_constructive(ch, Uncertainty{0.1, 0.0}, targets_linear(4.0, {}), kQpsk);
  ASSERT_TRUE(out.optimal());
  const double c = 2.0 / (2.0 * 0.9);
  EXPECT_NEAR(out.transmit_power, 2.0 * c * c, 1e-6);
  EXPECT_NEAR(out.transmit_power, 2.46914, 1e-4);
}

// The upper destructive wedge is not symmetric under rotation, so rotating
// the IR channel alone moves the Eve points relative to it and changes the
// optimum. A common rotation of all channels does not.
TEST(ConstructiveDestructive, SingleChannelRotationChangesPower) {
  ChannelConfig cfg;
  cfg.antennas = 2;
  cfg.eves = 1;
  cfg.seed = 3;
  const ChannelSet ch = sample_channels(cfg, 0);
  const Targets t = Targets::from_db(10.0, 5.0, 1);
  const auto base = solve_constructive_destructive(ch, t, kQpsk);
  ChannelSet one = ch, all = ch;
  const Complex rot = std::polar(1.0, 1.3);
  one.h_d *= rot;
  all.h_d *= rot;
  all.h_e[0] *= rot;
  const auto a = solve_constructive_destructive(one, t, kQpsk);
  const auto b = solve_constructive_destructive(all, t, kQpsk);
  ASSERT_TRUE(base.optimal() && a.optimal() && b.optimal());
  EXPECT_GT(std::abs(a.transmit_power - base.transmit_power), 1e-3 * base.transmit_power);
  EXPECT_NEAR(b.transmit_power, base.transmit_power, 1e-6 * base.transmit_power);
}
