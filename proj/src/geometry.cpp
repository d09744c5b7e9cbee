#include "crackpath/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace crackpath::geometry {

double norm(Point2 p) { return std::hypot(p.x, p.y); }

double distance(Point2 a, Point2 b) { return norm(a - b); }

double Aggregate::area() const {
  double twice = 0.0;
  const std::size_t n = vertices.size();
  for (std::size_t i = 0; i < n; ++i) {
    twice += cross(vertices[i], vertices[(i + 1) % n]);
  }
  return 0.5 * twice;
}

Point2 Aggregate::centroid() const {
  // Area-weighted polygon centroid.
  const std::size_t n = vertices.size();
  double twice = 0.0;
  Point2 c{0.0, 0.0};
  for (std::size_t i = 0; i < n; ++i) {
    const Point2 a = vertices[i];
    const Point2 b = vertices[(i + 1) % n];
    const double w = cross(a, b);
    twice += w;
    c.x += (a.x + b.x) * w;
    c.y += (a.y + b.y) * w;
  }
  const double inv = 1.0 / (3.0 * twice);
  return {c.x * inv, c.y * inv};
}

namespace {

double polygon_extent(const Aggregate& a) {
  double lo_x = std::numeric_limits<double>::max(), hi_x = std::numeric_limits<double>::lowest();
  double lo_y = lo_x, hi_y = hi_x;
  for (const Point2 v : a.vertices) {
    lo_x = std::min(lo_x, v.x);
    hi_x = std::max(hi_x, v.x);
    lo_y = std::min(lo_y, v.y);
    hi_y = std::max(hi_y, v.y);
  }
  return std::max(hi_x - lo_x, hi_y - lo_y);
}

}  // namespace

void validate_aggregate(const Aggregate& a) {
  const std::size_t n = a.vertices.size();
  if (n < 3) {
    throw Error(ErrorCategory::geometry,
                "aggregate " + std::to_string(a.id) + ": needs at least 3 vertices");
  }
  for (const Point2 v : a.vertices) {
    if (!std::isfinite(v.x) || !std::isfinite(v.y)) {
      throw Error(ErrorCategory::geometry,
                  "aggregate " + std::to_string(a.id) + ": non-finite vertex");
    }
  }
  // Strict convexity, CCW order. Collinear triples count as degenerate.
  const double scale = polygon_extent(a);
  const double tol = 1e-12 * std::max(scale * scale, 1e-30);
  for (std::size_t i = 0; i < n; ++i) {
    const Point2 p = a.vertices[i];
    const Point2 q = a.vertices[(i + 1) % n];
    const Point2 r = a.vertices[(i + 2) % n];
    const double c = cross(q - p, r - q);
    if (c <= tol) {
      throw Error(ErrorCategory::geometry,
                  "aggregate " + std::to_string(a.id) +
                      ": not strictly convex in counter-clockwise order near vertex " +
                      std::to_string((i + 1) % n));
    }
  }
  if (a.area() <= 0.0) {
    throw Error(ErrorCategory::geometry,
                "aggregate " + std::to_string(a.id) + ": non-positive area");
  }
}

void validate(const Microstructure& m) {
  if (!(m.width > 0.0) || !(m.height > 0.0)) {
    throw Error(ErrorCategory::geometry, "domain must have positive width and height");
  }
  for (const auto& a : m.aggregates) {
    validate_aggregate(a);
    for (const Point2 v : a.vertices) {
      if (v.x < -kDetTol || v.x > m.width + kDetTol || v.y < -kDetTol ||
          v.y > m.height + kDetTol) {
        throw Error(ErrorCategory::geometry,
                    "aggregate " + std::to_string(a.id) + ": vertex outside domain");
      }
    }
  }
  for (std::size_t i = 0; i < m.aggregates.size(); ++i) {
    for (std::size_t j = i + 1; j < m.aggregates.size(); ++j) {
      if (m.aggregates[i].id == m.aggregates[j].id) {
        throw Error(ErrorCategory::geometry,
                    "duplicate aggregate id " + std::to_string(m.aggregates[i].id));
      }
      if (convex_overlap(m.aggregates[i], m.aggregates[j])) {
        throw Error(ErrorCategory::geometry,
                    "aggregates " + std::to_string(m.aggregates[i].id) + " and " +
                        std::to_string(m.aggregates[j].id) + " overlap");
      }
    }
  }
}

bool point_in_aggregate(Point2 p, const Aggregate& a) {
  const std::size_t n = a.vertices.size();
  for (std::size_t i = 0; i < n; ++i) {
    if (cross(a.vertices[(i + 1) % n] - a.vertices[i], p - a.vertices[i]) < 0.0) return false;
  }
  return true;
}

bool point_strictly_inside(Point2 p, const Aggregate& a, double tol) {
  const std::size_t n = a.vertices.size();
  for (std::size_t i = 0; i < n; ++i) {
    if (cross(a.vertices[(i + 1) % n] - a.vertices[i], p - a.vertices[i]) <= tol) return false;
  }
  return true;
}

double point_segment_distance(Point2 p, Point2 a, Point2 b) {
  const Point2 ab = b - a;
  const double len2 = norm2(ab);
  if (len2 == 0.0) return distance(p, a);
  const double t = std::clamp(dot(p - a, ab) / len2, 0.0, 1.0);
  return distance(p, a + t * ab);
}

namespace {

double segment_segment_distance(Point2 a, Point2 b, Point2 c, Point2 d) {
  const double d1 = cross(b - a, c - a);
  const double d2 = cross(b - a, d - a);
  const double d3 = cross(d - c, a - c);
  const double d4 = cross(d - c, b - c);
  if (((d1 > 0) != (d2 > 0)) && ((d3 > 0) != (d4 > 0))) return 0.0;  // proper crossing
  return std::min(std::min(point_segment_distance(a, c, d), point_segment_distance(b, c, d)),
                  std::min(point_segment_distance(c, a, b), point_segment_distance(d, a, b)));
}

bool separated_on_axis(const Aggregate& a, const Aggregate& b, Point2 axis) {
  double amin = std::numeric_limits<double>::max(), amax = -amin;
  for (const Point2 v : a.vertices) {
    const double p = dot(v, axis);
    amin = std::min(amin, p);
    amax = std::max(amax, p);
  }
  double bmin = std::numeric_limits<double>::max(), bmax = -bmin;
  for (const Point2 v : b.vertices) {
    const double p = dot(v, axis);
    bmin = std::min(bmin, p);
    bmax = std::max(bmax, p);
  }
  return amax < bmin || bmax < amin;
}

}  // namespace

bool convex_overlap(const Aggregate& a, const Aggregate& b) {
  const auto axes_of = [](const Aggregate& poly, const Aggregate& other) {
    const std::size_t n = poly.vertices.size();
    for (std::size_t i = 0; i < n; ++i) {
      const Point2 e = poly.vertices[(i + 1) % n] - poly.vertices[i];
      if (separated_on_axis(poly, other, Point2{-e.y, e.x})) return true;
    }
    return false;
  };
  return !(axes_of(a, b) || axes_of(b, a));
}

double convex_distance(const Aggregate& a, const Aggregate& b) {
  if (convex_overlap(a, b)) return 0.0;
  double best = std::numeric_limits<double>::max();
  const std::size_t n = a.vertices.size();
  const std::size_t m = b.vertices.size();
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < m; ++j) {
      best = std::min(best, segment_segment_distance(a.vertices[i], a.vertices[(i + 1) % n],
                                                     b.vertices[j], b.vertices[(j + 1) % m]));
    }
  }
  return best;
}

DiscretizedMicrostructure discretize(const Microstructure& m, int points_per_side) {
  if (points_per_side < 2) {
    throw Error(ErrorCategory::invalid_argument, "points_per_side must be >= 2");
  }
  validate(m);

  DiscretizedMicrostructure dm;
  dm.source = m;
  dm.points_per_side = points_per_side;
  dm.aggregate_first.reserve(m.aggregates.size() + 1);
  dm.aggregate_first.push_back(0);

  const int last_slot = points_per_side - 1;
  for (std::size_t pos = 0; pos < m.aggregates.size(); ++pos) {
    const Aggregate& agg = m.aggregates[pos];
    const int n = static_cast<int>(agg.vertices.size());
    // Every side contributes slots 0..P-2; slot P-1 coincides with the next
    // side's slot 0 and is emitted once as that side's corner.
    for (int s = 0; s < n; ++s) {
      const Point2 v0 = agg.vertices[s];
      const Point2 v1 = agg.vertices[(s + 1) % n];
      for (int slot = 0; slot < last_slot; ++slot) {
        DiscretizationPoint p;
        p.index = static_cast<int>(dm.points.size());
        const double t = static_cast<double>(slot) / static_cast<double>(last_slot);
        p.position = slot == 0 ? v0 : v0 + t * (v1 - v0);
        p.aggregate_id = agg.id;
        p.aggregate_pos = static_cast<int>(pos);
        p.side = {s, slot};
        if (slot == 0) p.corner_side = SideRef{(s + n - 1) % n, last_slot};
        dm.points.push_back(p);
      }
    }
    dm.aggregate_first.push_back(static_cast<int>(dm.points.size()));
  }
  return dm;
}

std::vector<int> field_of_view(Point2 tip, Point2 direction,
                               const DiscretizedMicrostructure& dm,
                               const std::vector<char>& visited) {
  std::vector<int> out;
  out.reserve(dm.points.size() / 2);
  for (const DiscretizationPoint& p : dm.points) {
    if (!visited.empty() && visited[static_cast<std::size_t>(p.index)]) continue;
    const Point2 v = p.position - tip;
    if (norm2(v) == 0.0) continue;
    if (dot(v, direction) >= 0.0) out.push_back(p.index);
  }
  return out;
}

namespace {

struct TangentPair {
  int ccw = -1;  // point index subtending the largest signed angle
  int cw = -1;   // point index subtending the smallest signed angle
  bool valid = false;
};

// Widest-angle pair of an aggregate's discretization points as seen from tip.
// Signed angles are measured against the tip->centroid direction, which lies
// strictly inside the angular span whenever the tip is not interior, so no
// atan2 wrap-around can occur.
TangentPair tangent_pair(Point2 tip, const DiscretizedMicrostructure& dm, int aggregate_pos) {
  TangentPair tp;
  const Point2 ref = dm.source.aggregates[aggregate_pos].centroid() - tip;
  if (norm2(ref) <= kDetTol * kDetTol) return tp;  // tip at the centroid: skip
  double lo = std::numeric_limits<double>::max();
  double hi = std::numeric_limits<double>::lowest();
  for (const DiscretizationPoint& p : dm.aggregate_points(aggregate_pos)) {
    const Point2 v = p.position - tip;
    if (norm2(v) == 0.0) continue;
    const double a = std::atan2(cross(ref, v), dot(ref, v));
    if (a > hi) {
      hi = a;
      tp.ccw = p.index;
    }
    if (a < lo) {
      lo = a;
      tp.cw = p.index;
    }
  }
  tp.valid = tp.ccw >= 0 && tp.cw >= 0 && tp.ccw != tp.cw;
  return tp;
}

std::vector<int> shadow_filter_impl(Point2 tip, std::span<const int> fov,
                                    const DiscretizedMicrostructure& dm, int own_aggregate) {
  std::vector<char> deleted(fov.size(), 0);
  const int n_aggs = static_cast<int>(dm.source.aggregates.size());
  std::vector<char> facing;
  for (int a = 0; a < n_aggs; ++a) {
    // An aggregate's own boundary points are decided by the facing-side rule:
    // a boundary point of a convex polygon is visible from an exterior tip iff
    // it lies on at least one side whose line has the tip on the outer side
    // (grazing counts as visible). The chord test below cannot express this
    // when the widest-angle pair spans the far side itself: those points sit
    // exactly on the chord, not strictly beyond it.
    const auto& verts = dm.source.aggregates[a].vertices;
    const std::size_t n_sides = verts.size();
    facing.assign(n_sides, 0);
    for (std::size_t s = 0; s < n_sides; ++s) {
      const Point2 e = verts[(s + 1) % n_sides] - verts[s];
      facing[s] = cross(e, tip - verts[s]) <= kDetTol;
    }

    const TangentPair tp = tangent_pair(tip, dm, a);
    if (!tp.valid) continue;
    const Point2 y1 = dm.points[static_cast<std::size_t>(tp.ccw)].position;
    const Point2 y2 = dm.points[static_cast<std::size_t>(tp.cw)].position;
    const Point2 d1 = y1 - tip;
    const Point2 d2 = y2 - tip;
    const Point2 chord = y2 - y1;

    // "Beyond the chord" is the side opposite the tip; when the tip sits on
    // the chord line itself (its own aggregate's edge) it is the side holding
    // the aggregate interior.
    const double s_tip = cross(chord, tip - y1);
    double beyond_sign;
    if (std::abs(s_tip) > kDetTol) {
      beyond_sign = s_tip > 0.0 ? -1.0 : 1.0;
    } else {
      const double s_cen = cross(chord, dm.source.aggregates[a].centroid() - y1);
      if (std::abs(s_cen) <= kDetTol) continue;
      beyond_sign = s_cen > 0.0 ? 1.0 : -1.0;
    }

    for (std::size_t k = 0; k < fov.size(); ++k) {
      if (deleted[k]) continue;
      const DiscretizationPoint& p = dm.points[static_cast<std::size_t>(fov[k])];
      if (a == own_aggregate && p.aggregate_pos == own_aggregate) continue;
      if (p.aggregate_pos == a) {
        const bool visible = facing[static_cast<std::size_t>(p.side.side)] ||
                             (p.corner_side && facing[static_cast<std::size_t>(p.corner_side->side)]);
        if (!visible) deleted[k] = 1;
        continue;
      }
      const Point2 z = p.position - tip;
      // Strictly inside the cone: clockwise of the ccw ray, counter-clockwise
      // of the cw ray, ties kept.
      if (!(cross(d1, z) < -kDetTol && cross(d2, z) > kDetTol)) continue;
      const double s_z = cross(chord, p.position - y1);
      if (s_z * beyond_sign > kDetTol) deleted[k] = 1;
    }
  }

  std::vector<int> out;
  out.reserve(fov.size());
  for (std::size_t k = 0; k < fov.size(); ++k) {
    if (!deleted[k]) out.push_back(fov[k]);
  }
  return out;
}

}  // namespace

int aggregate_with_boundary_through(const Microstructure& m, Point2 p, double tol) {
  for (std::size_t pos = 0; pos < m.aggregates.size(); ++pos) {
    const auto& verts = m.aggregates[pos].vertices;
    const std::size_t n = verts.size();
    for (std::size_t i = 0; i < n; ++i) {
      if (point_segment_distance(p, verts[i], verts[(i + 1) % n]) <= tol) {
        return static_cast<int>(pos);
      }
    }
  }
  return -1;
}

bool inside_any_aggregate(const Microstructure& m, Point2 p, double tol) {
  for (const auto& a : m.aggregates) {
    if (point_strictly_inside(p, a, tol)) return true;
  }
  return false;
}

std::vector<int> shadow_filter(Point2 tip, std::span<const int> fov,
                               const DiscretizedMicrostructure& dm) {
  const int own = aggregate_with_boundary_through(dm.source, tip);
  return shadow_filter_impl(tip, fov, dm, own);
}

Indicators indicators(Point2 tip, Point2 direction, Point2 y) {
  const Point2 v = y - tip;
  const double len = norm(v);
  if (len == 0.0) {
    throw Error(ErrorCategory::geometry, "indicators: candidate coincides with the tip");
  }
  const double c = std::abs(dot(v, direction)) / (len * norm(direction));
  return {len, std::acos(std::clamp(c, 0.0, 1.0))};
}

void normalize_candidates(std::vector<Candidate>& candidates) {
  if (candidates.empty()) {
    throw Error(ErrorCategory::invalid_argument, "normalize: empty candidate list");
  }
  double d_lo = std::numeric_limits<double>::max(), d_hi = std::numeric_limits<double>::lowest();
  double t_lo = d_lo, t_hi = d_hi;
  for (const Candidate& c : candidates) {
    d_lo = std::min(d_lo, c.d);
    d_hi = std::max(d_hi, c.d);
    t_lo = std::min(t_lo, c.theta);
    t_hi = std::max(t_hi, c.theta);
  }
  const double d_span = d_hi - d_lo;
  const double t_span = t_hi - t_lo;
  for (Candidate& c : candidates) {
    c.d_norm = d_span > 0.0 ? std::clamp((c.d - d_lo) / d_span, 0.0, 1.0) : 0.0;
    c.theta_norm = t_span > 0.0 ? std::clamp((c.theta - t_lo) / t_span, 0.0, 1.0) : 0.0;
  }
}

std::optional<CandidateSet> build_candidate_set(const TipState& tip, Point2 direction,
                                                const DiscretizedMicrostructure& dm,
                                                const std::vector<char>& visited) {
  int own = -1;
  const DiscretizationPoint* tip_point = nullptr;
  if (tip.point_index >= 0) {
    tip_point = &dm.points[static_cast<std::size_t>(tip.point_index)];
    own = tip_point->aggregate_pos;
  } else {
    own = aggregate_with_boundary_through(dm.source, tip.position);
  }

  const std::vector<int> fov = field_of_view(tip.position, direction, dm, visited);
  const std::vector<int> surviving = shadow_filter_impl(tip.position, fov, dm, own);

  CandidateSet cs;
  cs.tip = tip.position;
  cs.direction = direction;
  cs.candidates.reserve(surviving.size());
  bool any_same = false;
  for (const int idx : surviving) {
    const DiscretizationPoint& p = dm.points[static_cast<std::size_t>(idx)];
    Candidate c;
    c.point_index = idx;
    if (own >= 0 && p.aggregate_pos == own) {
      // Only points along the side(s) carrying the tip stay reachable; a
      // chord to any other boundary point of a convex polygon crosses its
      // interior. Corners belong to both adjacent sides, so the crack turns
      // corners by stepping onto the corner point first.
      bool shares_side = false;
      if (tip_point != nullptr) {
        shares_side = p.on_side(tip_point->side.side) ||
                      (tip_point->corner_side && p.on_side(tip_point->corner_side->side));
      } else {
        // Tip lies on the boundary but is not a discretization point: keep
        // the points of the side(s) passing through the tip.
        const auto& verts = dm.source.aggregates[static_cast<std::size_t>(own)].vertices;
        const std::size_t n = verts.size();
        for (std::size_t s = 0; s < n && !shares_side; ++s) {
          if (point_segment_distance(tip.position, verts[s], verts[(s + 1) % n]) <= 1e-9) {
            shares_side = p.on_side(static_cast<int>(s));
          }
        }
      }
      if (!shares_side) continue;
      c.same_aggregate = true;
      any_same = true;
    }
    const Indicators ind = indicators(tip.position, direction, p.position);
    c.d = ind.d;
    c.theta = ind.theta;
    cs.candidates.push_back(c);
  }

  if (cs.candidates.empty()) return std::nullopt;
  normalize_candidates(cs.candidates);
  cs.configuration = any_same ? Configuration::F1 : Configuration::F2;
  return cs;
}

}  // namespace crackpath::geometry
