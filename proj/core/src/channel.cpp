// SPDX-License-Identifier: Apache-2.0
#include "cisec/channel.hpp"

#include <cstdio>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <string>

namespace cisec {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

}  // namespace

std::uint64_t stream_seed(std::uint64_t seed, std::uint64_t index, StreamTag tag,
                          std::uint64_t sub_index) {
  std::uint64_t s = splitmix64(seed);
  s = splitmix64(s ^ index);
  s = splitmix64(s ^ static_cast<std::uint64_t>(tag));
  return splitmix64(s ^ sub_index);
}

CVector complex_gaussian(Eigen::Index length, double variance, Rng& rng) {
  std::normal_distribution<double> normal(0.0, std::sqrt(variance / 2.0));
  CVector v(length);
  for (Eigen::Index i = 0; i < length; ++i) {
    const double re = normal(rng);
    const double im = normal(rng);
    v(i) = Complex(re, im);
  }
  return v;
}

void ChannelConfig::validate() const {
  require(antennas >= 1, "antenna count must be at least 1");
  require(eves >= 0, "eavesdropper count must be nonnegative");
  require(pathloss_exponent > 0.0, "path-loss exponent must be positive");
  require(distances.empty() || distances.size() == 1 ||
              distances.size() == static_cast<std::size_t>(eves) + 1,
          "distances must be empty, a single value, or one per node");
  for (double d : distances) require(d >= 1.0, "node distances must be at least 1 m");
}

double ChannelConfig::distance(int node) const {
  if (distances.empty()) return 1.0;
  if (distances.size() == 1) return distances.front();
  return distances.at(static_cast<std::size_t>(node));
}

double ChannelConfig::entry_variance(int node) const {
  return std::pow(distance(node), -pathloss_exponent);
}

ChannelSet sample_channels(const ChannelConfig& cfg, std::uint64_t realization_index) {
  cfg.validate();
  Rng rng = make_stream(cfg.seed, realization_index, StreamTag::channels);
  ChannelSet set;
  set.kind = ChannelKind::true_csi;
  set.h_d = complex_gaussian(cfg.antennas, cfg.entry_variance(0), rng);
  set.h_e.reserve(static_cast<std::size_t>(cfg.eves));
  for (int k = 1; k <= cfg.eves; ++k)
    set.h_e.push_back(complex_gaussian(cfg.antennas, cfg.entry_variance(k), rng));
  return set;
}

CVector perturb(const CVector& h_hat, double eps, PerturbMode mode, Rng& rng) {
  require(eps >= 0.0, "perturbation radius must be nonnegative");
  if (eps == 0.0) return h_hat;
  CVector direction = complex_gaussian(h_hat.size(), 1.0, rng);
  double norm = direction.norm();
  while (norm == 0.0) {
    direction = complex_gaussian(h_hat.size(), 1.0, rng);
    norm = direction.norm();
  }
  double radius = eps;
  if (mode == PerturbMode::ball_uniform) {
    // Radius of a uniform point in the real 2n-dimensional ball.
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    radius = eps * std::pow(unit(rng), 1.0 / (2.0 * static_cast<double>(h_hat.size())));
  }
  return h_hat + direction * (radius / norm);
}

ChannelSet perturb(const ChannelSet& estimate, const Uncertainty& u, PerturbMode mode, Rng& rng) {
  u.validate();
  ChannelSet out;
  out.kind = ChannelKind::true_csi;
  out.h_d = perturb(estimate.h_d, u.eps_d, mode, rng);
  out.h_e.reserve(estimate.h_e.size());
  for (const auto& h : estimate.h_e) out.h_e.push_back(perturb(h, u.eps_e, mode, rng));
  return out;
}

void write_channels_csv(std::ostream& out, const ChannelSet& channels) {
  channels.validate();
  char buf[64];
  const auto row = [&](int node, const CVector& h) {
    out << node;
    for (Eigen::Index i = 0; i < h.size(); ++i) {
      std::snprintf(buf, sizeof buf, ",%.17g,%.17g", h(i).real(), h(i).imag());
      out << buf;
    }
    out << '\n';
  };
  out << "# node,re0,im0,re1,im1,...\n";
  row(0, channels.h_d);
  for (int k = 0; k < channels.eves(); ++k) row(k + 1, channels.h_e[static_cast<std::size_t>(k)]);
}

ChannelSet read_channels_csv(std::istream& in) {
  std::map<int, CVector> nodes;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line.front() == '#') continue;
    std::stringstream ss(line);
    std::string cell;
    std::vector<double> values;
    std::getline(ss, cell, ',');
    int node = 0;
    try {
      node = std::stoi(cell);
      while (std::getline(ss, cell, ',')) values.push_back(std::stod(cell));
    } catch (const std::exception&) {
      throw InvalidArgument("malformed channel CSV row: " + line);
    }
    require(node >= 0, "channel CSV node id must be nonnegative");
    require(!values.empty() && values.size() % 2 == 0,
            "channel CSV row needs interleaved re,im pairs: " + line);
    require(nodes.count(node) == 0, "duplicate node id in channel CSV");
    CVector h(static_cast<Eigen::Index>(values.size() / 2));
    for (Eigen::Index i = 0; i < h.size(); ++i)
      h(i) = Complex(values[static_cast<std::size_t>(2 * i)],
                     values[static_cast<std::size_t>(2 * i + 1)]);
    nodes.emplace(node, std::move(h));
  }
  require(nodes.count(0) == 1, "channel CSV must contain node 0 (intended receiver)");
  ChannelSet set;
  set.h_d = nodes.at(0);
  for (int k = 1; k < static_cast<int>(nodes.size()); ++k) {
    require(nodes.count(k) == 1, "channel CSV node ids must be contiguous");
    set.h_e.push_back(nodes.at(k));
  }
  set.validate();
  return set;
}

}  // namespace cisec
