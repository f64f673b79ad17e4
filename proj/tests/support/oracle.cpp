// SPDX-License-Identifier: Apache-2.0
#include "oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include <Eigen/Dense>

namespace cisec::oracle {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct Point {
  std::vector<double> x;
  double value;
};

// Every grid point of a box with n points per dimension, visited in order.
template <class Visit>
void for_each_grid_point(const std::vector<double>& lo, const std::vector<double>& hi, int n,
                         Visit&& visit) {
  const std::size_t dim = lo.size();
  std::vector<int> idx(dim, 0);
  std::vector<double> x(dim);
  while (true) {
    for (std::size_t i = 0; i < dim; ++i)
      x[i] = n == 1 ? 0.5 * (lo[i] + hi[i]) : lo[i] + (hi[i] - lo[i]) * idx[i] / (n - 1);
    visit(x);
    std::size_t i = 0;
    while (i < dim && ++idx[i] == n) idx[i++] = 0;
    if (i == dim) break;
  }
}

}  // namespace

double coarse_to_fine(const std::function<double(const std::vector<double>&)>& f,
                      const std::vector<double>& lo, const std::vector<double>& hi,
                      const std::vector<bool>& periodic, const GridSearchOptions& opt) {
  const std::size_t dim = lo.size();
  std::vector<Point> coarse;
  for_each_grid_point(lo, hi, opt.coarse_points, [&](const std::vector<double>& x) {
    const double v = f(x);
    if (std::isfinite(v)) coarse.push_back({x, v});
  });
  if (coarse.empty()) return kInf;
  std::sort(coarse.begin(), coarse.end(),
            [](const Point& a, const Point& b) { return a.value < b.value; });

  // Refine the best few coarse points independently; the cells around
  // separate local minima of the parameterization are all explored.
  double best = kInf;
  const int keep = std::min<int>(opt.candidates, static_cast<int>(coarse.size()));
  for (int cand = 0; cand < keep; ++cand) {
    Point cur = coarse[static_cast<std::size_t>(cand)];
    std::vector<double> half(dim);
    for (std::size_t i = 0; i < dim; ++i) half[i] = (hi[i] - lo[i]) / (opt.coarse_points - 1);
    for (int round = 0; round < opt.max_rounds; ++round) {
      std::vector<double> blo(dim), bhi(dim);
      for (std::size_t i = 0; i < dim; ++i) {
        blo[i] = cur.x[i] - half[i];
        bhi[i] = cur.x[i] + half[i];
        if (!periodic[i]) {
          blo[i] = std::max(blo[i], lo[i]);
          bhi[i] = std::min(bhi[i], hi[i]);
        }
      }
      Point next = cur;
      for_each_grid_point(blo, bhi, opt.fine_points, [&](const std::vector<double>& x) {
        const double v = f(x);
        if (v < next.value) next = {x, v};
      });
      const bool moved = next.value < cur.value;
      cur = next;
      // Shrink once the centre is the best point of its neighbourhood.
      if (!moved)
        for (double& h : half) h *= 0.5;
      if (*std::max_element(half.begin(), half.end()) < opt.min_width) break;
    }
    best = std::min(best, cur.value);
  }
  return best;
}

double symbol_level_power(const ChannelSet& ch, const Targets& t, const Constellation& c,
                          bool destructive) {
  Eigen::Matrix2cd h;
  h.row(0) = ch.h_d.transpose();
  h.row(1) = ch.h_e.at(0).transpose();
  const Eigen::Matrix2cd hinv = h.inverse();
  const double theta = c.half_angle();
  const double gd = t.amplitude_d();
  const double ge = t.amplitude_e(0);

  const auto power = [&](Complex yd, Complex ye) {
    return (hinv * Eigen::Vector2cd(yd, ye)).squaredNorm();
  };
  // Any point with ||y||^2 above sigma_max(H)^2 times a feasible power is
  // worse than that feasible point, which bounds the radial ranges.
  const Complex ye0 = destructive ? Complex(ge, 0.0) : Complex(0.0, 0.0);
  const double p0 = power(Complex(gd, 0.0), ye0);
  const double smax = Eigen::JacobiSVD<Eigen::Matrix2cd>(h).singularValues()(0);
  const double r_max = smax * std::sqrt(p0) + gd + ge;

  const auto f = [&](const std::vector<double>& x) {
    const Complex yd = gd + std::polar(x[0], x[1]);
    const Complex ye = destructive ? ge + std::polar(x[2], x[3]) : std::polar(x[2], x[3]);
    return power(yd, ye);
  };
  const double pi = std::numbers::pi;
  if (destructive) {
    return coarse_to_fine(f, {0.0, -theta, 0.0, theta}, {r_max, theta, r_max, pi - theta},
                          {false, false, false, false});
  }
  return coarse_to_fine(f, {0.0, -theta, 0.0, 0.0}, {r_max, theta, ge, 2.0 * pi},
                        {false, false, false, true});
}

std::optional<double> conventional_power(const ChannelSet& ch, const Targets& t) {
  const CVector& hd = ch.h_d;
  const CVector& he = ch.h_e.at(0);
  const double gd = t.gamma_d, ge = t.gamma_e.at(0);
  const double sd = t.sigma_d2, se = t.sigma_e2;

  const auto direction = [](double a, double d) {
    CVector u(2);
    u << std::cos(a), std::polar(std::sin(a), d);
    return u;
  };
  // Fixed directions leave  min P + c  s.t.  P A_d >= gd (c a_d + sd),
  // P A_e <= ge (c a_e + se), P, c >= 0. P sits on its lower bound and the
  // smallest admissible c wins because the objective grows with both.
  const auto f = [&](const std::vector<double>& x) {
    const CVector u = direction(x[0], x[1]);
    const CVector v = direction(x[2], x[3]);
    const double ad = std::norm(hd.dot(u.conjugate())), ae = std::norm(he.dot(u.conjugate()));
    const double vd = std::norm(hd.dot(v.conjugate())), ve = std::norm(he.dot(v.conjugate()));
    if (ad <= 0.0) return kInf;
    const double k0 = ae > 0.0 ? gd * sd / ad - ge * se / ae : -kInf;
    const double k1 = ae > 0.0 ? gd * vd / ad - ge * ve / ae : gd * vd / ad;
    double cn = 0.0;
    if (k0 > 0.0) {
      if (k1 >= 0.0) return kInf;
      cn = -k0 / k1;
    }
    const double p = gd * (cn * vd + sd) / ad;
    return p + cn;
  };
  const double pi = std::numbers::pi;
  const double best = coarse_to_fine(f, {0.0, 0.0, 0.0, 0.0}, {pi / 2, 2 * pi, pi / 2, 2 * pi},
                                     {false, true, false, true});
  if (!std::isfinite(best)) return std::nullopt;
  return best;
}

}  // namespace cisec::oracle
