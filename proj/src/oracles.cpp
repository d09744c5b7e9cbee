#include "crackpath/oracles.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "crackpath/rng.hpp"

namespace crackpath::oracles {

using geometry::Aggregate;
using geometry::cross;
using geometry::dot;
using geometry::Microstructure;
using geometry::Point2;

bool segment_crosses_interior(Point2 a, Point2 b, const Aggregate& poly) {
  // Clip the segment against the polygon half-planes (Cyrus-Beck) and check
  // whether a parameter interval of positive length stays strictly inside.
  const Point2 dir = b - a;
  double t_lo = 0.0;
  double t_hi = 1.0;
  const std::size_t n = poly.vertices.size();
  for (std::size_t i = 0; i < n; ++i) {
    const Point2 v0 = poly.vertices[i];
    const Point2 v1 = poly.vertices[(i + 1) % n];
    const Point2 edge = v1 - v0;
    // Inside means cross(edge, p - v0) > 0 for a CCW polygon.
    const double f0 = cross(edge, a - v0);
    const double df = cross(edge, dir);
    if (std::abs(df) <= 1e-300) {
      if (f0 <= geometry::kDetTol) return false;  // parallel and never strictly inside
      continue;
    }
    const double t_cross = -f0 / df;
    if (df > 0.0) {
      t_lo = std::max(t_lo, t_cross);
    } else {
      t_hi = std::min(t_hi, t_cross);
    }
    if (t_lo >= t_hi) return false;
  }
  if (t_hi - t_lo <= 1e-12) return false;
  // Confirm with the midpoint to guard against tolerance slivers.
  const double tm = 0.5 * (t_lo + t_hi);
  return geometry::point_strictly_inside(a + tm * dir, poly);
}

bool visible(Point2 tip, Point2 z, const Microstructure& m) {
  for (const Aggregate& a : m.aggregates) {
    if (segment_crosses_interior(tip, z, a)) return false;
  }
  return true;
}

namespace {

double frechet_walk(const std::vector<Point2>& a, const std::vector<Point2>& b, std::size_t i,
                    std::size_t j, double current) {
  current = std::max(current, geometry::distance(a[i], b[j]));
  if (i + 1 == a.size() && j + 1 == b.size()) return current;
  double best = std::numeric_limits<double>::max();
  if (i + 1 < a.size()) best = std::min(best, frechet_walk(a, b, i + 1, j, current));
  if (j + 1 < b.size()) best = std::min(best, frechet_walk(a, b, i, j + 1, current));
  if (i + 1 < a.size() && j + 1 < b.size()) {
    best = std::min(best, frechet_walk(a, b, i + 1, j + 1, current));
  }
  return best;
}

}  // namespace

double frechet_enumeration(const std::vector<Point2>& a, const std::vector<Point2>& b) {
  if (a.empty() || b.empty()) {
    throw Error(ErrorCategory::invalid_argument, "frechet_enumeration: empty path");
  }
  return frechet_walk(a, b, 0, 0, 0.0);
}

double kernel_f1_direct(double d_norm, double theta_norm, bool same_aggregate,
                        const double mu[6]) {
  if (same_aggregate) {
    return std::exp(-mu[0] * std::pow(theta_norm, mu[1]));
  }
  return std::exp(-mu[2] * std::pow(d_norm * theta_norm, mu[5]) -
                  mu[3] * std::pow(d_norm, mu[4]));
}

double kernel_f2_direct(double d_norm, double theta_norm, const double lambda[6]) {
  return std::exp(-lambda[0] * std::pow(d_norm * theta_norm, lambda[4]) -
                  lambda[1] * std::pow(d_norm, lambda[5]) -
                  lambda[2] * std::pow(theta_norm, lambda[3]));
}

double sampled_volume_fraction(const Microstructure& m, long long n_samples,
                               unsigned long long seed) {
  Rng rng(seed);
  long long hits = 0;
  for (long long i = 0; i < n_samples; ++i) {
    const Point2 p{rng.uniform(0.0, m.width), rng.uniform(0.0, m.height)};
    for (const Aggregate& a : m.aggregates) {
      if (geometry::point_in_aggregate(p, a)) {
        ++hits;
        break;
      }
    }
  }
  return static_cast<double>(hits) / static_cast<double>(n_samples);
}

}  // namespace crackpath::oracles
