#pragma once

// 2D primitives, convex polygonal aggregates, boundary discretization and the
// candidate-point machinery: forward field of view, shadow-cone deletion of
// hidden points, and the (distance, angle) indicator pair.

#include <optional>
#include <span>
#include <vector>

#include "crackpath/error.hpp"

namespace crackpath::geometry {

struct Point2 {
  double x = 0.0;
  double y = 0.0;
};

inline Point2 operator+(Point2 a, Point2 b) { return {a.x + b.x, a.y + b.y}; }
inline Point2 operator-(Point2 a, Point2 b) { return {a.x - b.x, a.y - b.y}; }
inline Point2 operator*(double s, Point2 p) { return {s * p.x, s * p.y}; }
inline bool operator==(Point2 a, Point2 b) { return a.x == b.x && a.y == b.y; }
inline double dot(Point2 a, Point2 b) { return a.x * b.x + a.y * b.y; }
inline double cross(Point2 a, Point2 b) { return a.x * b.y - a.y * b.x; }
double norm(Point2 p);
inline double norm2(Point2 p) { return dot(p, p); }
double distance(Point2 a, Point2 b);

// Absolute tolerance for strict sign tests on 2x2 determinants. Ties resolve
// to "kept" in all deletion tests.
inline constexpr double kDetTol = 1e-12;

struct Aggregate {
  int id = 0;
  std::vector<Point2> vertices;  // counter-clockwise, strictly convex

  double area() const;
  Point2 centroid() const;
};

struct Microstructure {
  double width = 0.0;   // crack-propagation direction
  double height = 0.0;  // loading direction
  std::vector<Aggregate> aggregates;
};

// Throws Error{geometry} on degenerate/non-convex aggregates, duplicate ids,
// aggregates leaving the domain rectangle, or overlapping aggregates.
void validate(const Microstructure& m);
void validate_aggregate(const Aggregate& a);

bool point_in_aggregate(Point2 p, const Aggregate& a);  // closed region
bool point_strictly_inside(Point2 p, const Aggregate& a, double tol = kDetTol);
double point_segment_distance(Point2 p, Point2 a, Point2 b);

// Euclidean distance between two convex polygons; 0 when they overlap or touch.
double convex_distance(const Aggregate& a, const Aggregate& b);
bool convex_overlap(const Aggregate& a, const Aggregate& b);  // separating-axis test

struct SideRef {
  int side = -1;  // side s runs from vertex s to vertex (s+1) mod n
  int slot = -1;  // in [0, points_per_side - 1]
};

struct DiscretizationPoint {
  int index = -1;
  Point2 position;
  int aggregate_id = -1;
  int aggregate_pos = -1;  // position in Microstructure::aggregates
  SideRef side;
  // Second side reference when the point is a polygon corner shared by two sides.
  std::optional<SideRef> corner_side;

  bool on_side(int side_id) const {
    return side.side == side_id || (corner_side && corner_side->side == side_id);
  }
};

struct DiscretizedMicrostructure {
  Microstructure source;
  int points_per_side = 5;
  std::vector<DiscretizationPoint> points;
  // Prefix offsets: points of aggregate k occupy [aggregate_first[k], aggregate_first[k+1]).
  std::vector<int> aggregate_first;

  std::span<const DiscretizationPoint> aggregate_points(int aggregate_pos) const {
    return {points.data() + aggregate_first[aggregate_pos],
            points.data() + aggregate_first[aggregate_pos + 1]};
  }
};

// Places points_per_side equally spaced points on every polygon side, endpoints
// included; shared corners are merged into a single point carrying both sides.
DiscretizedMicrostructure discretize(const Microstructure& m, int points_per_side = 5);

// Indices of all unvisited points y with <tip->y, direction> >= 0 and y != tip.
// `visited` is a mask of size points.size() (or empty for "none visited").
std::vector<int> field_of_view(Point2 tip, Point2 direction,
                               const DiscretizedMicrostructure& dm,
                               const std::vector<char>& visited);

// Removes from `fov` every point hidden behind an aggregate as seen from tip.
// For each aggregate the pair of its discretization points subtending the
// widest angle at the tip spans a search cone; other aggregates' points
// strictly inside the cone and strictly beyond the chord between the pair are
// deleted, while the occluding aggregate's own boundary points are kept
// exactly when they lie on a side facing the tip. The combination matches
// exact segment visibility for convex aggregates. Points of the aggregate
// whose boundary carries the tip are exempt from that aggregate's own
// deletion (candidate-set assembly restricts them to the tip's sides).
std::vector<int> shadow_filter(Point2 tip, std::span<const int> fov,
                               const DiscretizedMicrostructure& dm);

struct Indicators {
  double d = 0.0;      // euclidean distance, m
  double theta = 0.0;  // absolute angle to the propagation direction, [0, pi/2]
};

// Throws Error{geometry} when y == tip.
Indicators indicators(Point2 tip, Point2 direction, Point2 y);

enum class Configuration { F1, F2 };

struct Candidate {
  int point_index = -1;
  double d = 0.0;
  double theta = 0.0;
  double d_norm = 0.0;
  double theta_norm = 0.0;
  bool same_aggregate = false;
};

// Min-max normalization of d and theta across one tip's candidate list.
// A degenerate spread (max == min) maps every value to 0.
void normalize_candidates(std::vector<Candidate>& candidates);

struct CandidateSet {
  Point2 tip;
  Point2 direction;
  Configuration configuration = Configuration::F2;
  std::vector<Candidate> candidates;
};

struct TipState {
  Point2 position;
  // Index into DiscretizedMicrostructure::points when the tip sits on a
  // discretization point, -1 otherwise (e.g. the crack start).
  int point_index = -1;
};

// field_of_view -> shadow_filter -> same-aggregate restriction -> indicators
// -> normalization. Returns nullopt when no candidate survives (the caller
// decides how to terminate). Configuration is F1 iff a same-aggregate
// candidate exists.
std::optional<CandidateSet> build_candidate_set(const TipState& tip, Point2 direction,
                                                const DiscretizedMicrostructure& dm,
                                                const std::vector<char>& visited);

// Position of the aggregate whose boundary passes within tol of p, or -1.
int aggregate_with_boundary_through(const Microstructure& m, Point2 p, double tol = 1e-9);

// True when p lies strictly inside some aggregate (H2 violation for crack points).
bool inside_any_aggregate(const Microstructure& m, Point2 p, double tol = kDetTol);

}  // namespace crackpath::geometry
