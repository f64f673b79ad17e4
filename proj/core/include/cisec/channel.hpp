// SPDX-License-Identifier: Apache-2.0
//
// Seeded channel generation. Every realization draws from its own stream
// derived from (seed, realization index, stream tag), so realizations can be
// generated in any order or in parallel without changing each other.
#pragma once

#include <cstdint>
#include <iosfwd>
#include <random>
#include <vector>

#include "cisec/model.hpp"

namespace cisec {

using Rng = std::mt19937_64;

/// Stream tags keep the independent random streams of one realization apart.
enum class StreamTag : std::uint64_t {
  channels = 1,
  csi_error = 2,
  symbols = 3,
  artificial_noise = 4,
  randomization = 5,
  probe = 6,
};

/// SplitMix64 finalizer over (seed, index, tag).
std::uint64_t stream_seed(std::uint64_t seed, std::uint64_t index, StreamTag tag,
                          std::uint64_t sub_index = 0);

inline Rng make_stream(std::uint64_t seed, std::uint64_t index, StreamTag tag,
                       std::uint64_t sub_index = 0) {
  return Rng(stream_seed(seed, index, tag, sub_index));
}

/// Vector of i.i.d. circularly-symmetric complex Gaussians CN(0, variance).
CVector complex_gaussian(Eigen::Index length, double variance, Rng& rng);

struct ChannelConfig {
  int antennas = 1;
  int eves = 0;
  double pathloss_exponent = 2.7;
  /// Node distances in meters: empty (all 1), one value (broadcast), or
  /// K+1 values ordered IR first, then eavesdroppers.
  std::vector<double> distances;
  std::uint64_t seed = 1;

  void validate() const;
  double distance(int node) const;
  /// Per-entry variance d^(-exponent) of node `node` (0 = IR, k = eavesdropper k).
  double entry_variance(int node) const;
};

ChannelSet sample_channels(const ChannelConfig& cfg, std::uint64_t realization_index);

enum class PerturbMode { ball_uniform, sphere_surface };

/// h_hat + e with ||e|| <= eps (== eps on the sphere) and a uniformly
/// distributed direction on the complex sphere.
CVector perturb(const CVector& h_hat, double eps, PerturbMode mode, Rng& rng);

/// Independent perturbation of every node of `estimate`.
ChannelSet perturb(const ChannelSet& estimate, const Uncertainty& u, PerturbMode mode, Rng& rng);

/// CSV fixture: one row per node (0 = IR, k = eavesdropper k), then
/// interleaved re,im entries. Lines beginning with '#' are comments.
void write_channels_csv(std::ostream& out, const ChannelSet& channels);
ChannelSet read_channels_csv(std::istream& in);

}  // namespace cisec
