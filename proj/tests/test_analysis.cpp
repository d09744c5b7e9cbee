#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "crackpath/analysis.hpp"
#include "crackpath/oracles.hpp"
#include "crackpath/rng.hpp"

using namespace crackpath;
using geometry::Point2;
using prediction::CrackPath;
using prediction::Ensemble;

namespace {

CrackPath make_path(std::vector<Point2> pts) {
  CrackPath p;
  p.points = std::move(pts);
  p.point_indices.assign(p.points.size(), -1);
  p.start = p.points.front();
  p.steps = static_cast<int>(p.points.size()) - 1;
  return p;
}

std::vector<Point2> random_polyline(Rng& rng, int max_vertices, int min_vertices = 1) {
  const int n = min_vertices + rng.uniform_int(max_vertices - min_vertices + 1);
  std::vector<Point2> pts;
  for (int i = 0; i < n; ++i) pts.push_back({rng.uniform(0.0, 1.0), rng.uniform(0.0, 1.0)});
  return pts;
}

}  // namespace

TEST_CASE("discrete_frechet: identical, offset and error cases") {
  const std::vector<Point2> a{{0, 0}, {1, 0.2}, {2, 0}};
  CHECK(analysis::discrete_frechet(a, a) == 0.0);
  const std::vector<Point2> b{{0, 0}, {1, 0}};
  const std::vector<Point2> c{{0, 0.3}, {1, 0.3}};
  CHECK(analysis::discrete_frechet(b, c) == doctest::Approx(0.3));
  CHECK_THROWS_AS(analysis::discrete_frechet({}, a), Error);
}

TEST_CASE("discrete_frechet equals exhaustive coupling enumeration") {
  Rng rng(515);
  for (int trial = 0; trial < 150; ++trial) {
    const auto a = random_polyline(rng, 8);
    const auto b = random_polyline(rng, 8);
    const double dp = analysis::discrete_frechet(a, b);
    const double brute = oracles::frechet_enumeration(a, b);
    CHECK(std::abs(dp - brute) <= 1e-12);
  }
}

TEST_CASE("discrete_frechet: pseudometric properties on random triples") {
  Rng rng(99);
  for (int trial = 0; trial < 40; ++trial) {
    const auto a = random_polyline(rng, 6);
    const auto b = random_polyline(rng, 6);
    const auto c = random_polyline(rng, 6);
    const double ab = analysis::discrete_frechet(a, b);
    const double ba = analysis::discrete_frechet(b, a);
    const double ac = analysis::discrete_frechet(a, c);
    const double cb = analysis::discrete_frechet(c, b);
    CHECK(ab == doctest::Approx(ba));
    CHECK(ab >= 0.0);
    CHECK(ab <= ac + cb + 1e-12);
    // Endpoints bound the distance from below.
    CHECK(ab + 1e-12 >= geometry::distance(a.front(), b.front()));
    CHECK(ab + 1e-12 >= geometry::distance(a.back(), b.back()));
  }
}

TEST_CASE("median path: majority, brute force, membership") {
  Ensemble e;
  e.width = 2.0;
  e.height = 1.0;
  const auto base = make_path({{0, 0.5}, {2, 0.5}});
  const auto outlier = make_path({{0, 0.9}, {2, 0.95}});
  e.paths = {base, base, outlier, base};
  CHECK(analysis::median_path_index(e) == 0);  // ties break to the lowest index

  Rng rng(7);
  Ensemble r;
  r.width = 1.0;
  r.height = 1.0;
  for (int k = 0; k < 10; ++k) r.paths.push_back(make_path(random_polyline(rng, 7)));
  const std::size_t idx = analysis::median_path_index(r);
  // Brute-force re-evaluation of all the sums.
  double best = 1e300;
  std::size_t best_k = 0;
  for (std::size_t k = 0; k < r.paths.size(); ++k) {
    double sum = 0.0;
    for (std::size_t j = 0; j < r.paths.size(); ++j) {
      if (j != k) sum += analysis::discrete_frechet(r.paths[k].points, r.paths[j].points);
    }
    if (sum < best) {
      best = sum;
      best_k = k;
    }
  }
  CHECK(idx == best_k);
}

TEST_CASE("path_function: interpolation, breakpoints, vertical runs") {
  const auto f = analysis::path_function(make_path({{0, 0}, {1, 1}}));
  CHECK(f.eval(0.5) == doctest::Approx(0.5));
  CHECK(f.eval(1.0) == doctest::Approx(1.0));

  // Vertical run at x = 1: the final position wins.
  const auto g = analysis::path_function(make_path({{0, 0}, {1, 0}, {1, 0.4}, {1, 0.2}, {2, 0.2}}));
  CHECK(g.eval(1.0) == doctest::Approx(0.2));
  CHECK(g.eval(0.5) == doctest::Approx(0.0));
  CHECK(g.eval(1.5) == doctest::Approx(0.2));

  const auto grid_vals = g.eval_grid({0.0, 0.5, 1.0, 1.5, 2.0});
  CHECK(grid_vals[2] == doctest::Approx(0.2));
}

TEST_CASE("confidence_region: degenerate ensemble has zero diameter") {
  Ensemble e;
  e.width = 2.0;
  e.height = 1.0;
  const auto p = make_path({{0, 0.5}, {1, 0.7}, {2, 0.5}});
  e.paths.assign(30, p);
  const auto region = analysis::confidence_region(e, 50);
  CHECK(region.diameter == 0.0);
  for (std::size_t j = 0; j < region.grid.size(); ++j) {
    CHECK(region.lower[j] == region.upper[j]);
  }
}

TEST_CASE("confidence_region: M=100 uses ordered indices 5 and 95") {
  Ensemble e;
  e.width = 1.0;
  e.height = 1.0;
  for (int k = 0; k < 100; ++k) {
    const double y = 0.005 * (k + 1);  // distinct constant paths: order = index
    e.paths.push_back(make_path({{0, y}, {1, y}}));
  }
  const auto region = analysis::confidence_region(e, 11);
  CHECK(region.lower_order_index == 5);
  CHECK(region.upper_order_index == 95);
  for (std::size_t j = 0; j < region.grid.size(); ++j) {
    CHECK(region.lower[j] == doctest::Approx(0.005 * 5));
    CHECK(region.upper[j] == doctest::Approx(0.005 * 95));
  }
  CHECK(region.diameter == doctest::Approx(0.005 * 90));
}

TEST_CASE("confidence_region: median stays inside the pointwise envelope") {
  Rng rng(3);
  Ensemble e;
  e.width = 1.0;
  e.height = 1.0;
  for (int k = 0; k < 25; ++k) {
    std::vector<Point2> pts{{0.0, rng.uniform(0.2, 0.8)}};
    double x = 0.0;
    while (x < 1.0) {
      x += rng.uniform(0.05, 0.3);
      pts.push_back({std::min(x, 1.0), rng.uniform(0.2, 0.8)});
    }
    e.paths.push_back(make_path(std::move(pts)));
  }
  const auto region = analysis::confidence_region(e, 40);
  const auto median_vals =
      analysis::path_function(e.paths[analysis::median_path_index(e)]).eval_grid(region.grid);
  std::vector<analysis::PathFunction> fns;
  for (const auto& p : e.paths) fns.push_back(analysis::path_function(p));
  for (std::size_t j = 0; j < region.grid.size(); ++j) {
    double lo = 1e300, hi = -1e300;
    for (const auto& f : fns) {
      const double v = f.eval(region.grid[j]);
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
    CHECK(region.lower[j] >= lo - 1e-12);
    CHECK(region.upper[j] <= hi + 1e-12);
    CHECK(median_vals[j] >= lo - 1e-12);
    CHECK(median_vals[j] <= hi + 1e-12);
  }
}

TEST_CASE("tortuosity: straight, roof, invariance, errors") {
  CHECK(analysis::tortuosity(make_path({{0, 0}, {2, 0}})) == doctest::Approx(1.0));
  CHECK(analysis::tortuosity(make_path({{0, 0}, {1, 1}, {2, 0}})) ==
        doctest::Approx(std::numbers::sqrt2));

  // Rigid motions leave the value unchanged.
  Rng rng(9);
  for (int trial = 0; trial < 20; ++trial) {
    auto pts = random_polyline(rng, 8);
    if (pts.size() < 2 || geometry::distance(pts.front(), pts.back()) < 1e-6) continue;
    const double tau = analysis::tortuosity(make_path(pts));
    CHECK(tau >= 1.0 - 1e-12);
    const double ang = rng.uniform(0.0, 6.28);
    const Point2 shift{rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0)};
    std::vector<Point2> moved;
    for (const auto p : pts) {
      moved.push_back({p.x * std::cos(ang) - p.y * std::sin(ang) + shift.x,
                       p.x * std::sin(ang) + p.y * std::cos(ang) + shift.y});
    }
    CHECK(analysis::tortuosity(make_path(moved)) == doctest::Approx(tau).epsilon(1e-9));
  }

  CHECK_THROWS_AS(analysis::tortuosity(make_path({{0, 0}, {1, 1}, {0, 0}})), Error);
  CHECK_THROWS_AS(analysis::tortuosity(make_path({{0, 0}})), Error);
}

TEST_CASE("tortuosity_stats: medians, intervals, histogram") {
  Ensemble single;
  single.width = 1.0;
  single.paths = {make_path({{0, 0}, {1, 0.5}, {2, 0}})};
  const auto s1 = analysis::tortuosity_stats(single);
  CHECK(s1.median == doctest::Approx(s1.values[0]));
  CHECK(s1.p05 == s1.p95);

  Ensemble same;
  same.width = 1.0;
  same.paths.assign(12, make_path({{0, 0}, {1, 0.3}, {2, 0}}));
  const auto s2 = analysis::tortuosity_stats(same);
  CHECK(s2.p05 == s2.p95);  // zero-width interval

  Rng rng(12);
  Ensemble mixed;
  mixed.width = 1.0;
  for (int k = 0; k < 50; ++k) {
    auto pts = random_polyline(rng, 8, 2);
    pts.front() = {0.0, 0.5};
    pts.back() = {1.0, 0.5};
    mixed.paths.push_back(make_path(pts));
  }
  const auto s3 = analysis::tortuosity_stats(mixed, 10);
  CHECK(s3.median >= s3.p05);
  CHECK(s3.median <= s3.p95);
  long long total = 0;
  for (const auto c : s3.histogram.counts) total += c;
  CHECK(total == 50);
  CHECK(s3.histogram.edges.size() == 11);
}

TEST_CASE("kde: symmetry, normalization, degenerate input") {
  const auto sym = analysis::kde({-1.0, 1.0}, 0.5, 401);
  const std::size_t n = sym.grid.size();
  for (std::size_t i = 0; i < n / 2; ++i) {
    CHECK(sym.density[i] == doctest::Approx(sym.density[n - 1 - i]).epsilon(1e-9));
  }

  Rng rng(77);
  std::vector<double> sample;
  for (int i = 0; i < 400; ++i) sample.push_back(rng.uniform(0.0, 2.0));
  const auto est = analysis::kde(sample);
  double integral = 0.0;
  for (std::size_t i = 0; i + 1 < est.grid.size(); ++i) {
    integral += 0.5 * (est.density[i] + est.density[i + 1]) * (est.grid[i + 1] - est.grid[i]);
  }
  CHECK(std::abs(integral - 1.0) <= 1e-3);

  CHECK_THROWS_AS(analysis::kde({1.0, 1.0, 1.0}), Error);           // degenerate, auto bandwidth
  CHECK_NOTHROW(analysis::kde({1.0, 1.0, 1.0}, 0.1));               // explicit bandwidth is fine
  CHECK_THROWS_AS(analysis::kde({1.0}), Error);                     // too few values
}

TEST_CASE("kde: mode recovery for a gaussian sample") {
  // Box-Muller from the project rng; test-only sampling.
  Rng rng(2025);
  const double mean = 3.0;
  const double sd = 0.7;
  std::vector<double> sample;
  for (int i = 0; i < 4000; ++i) {
    const double u1 = std::max(rng.uniform01(), 1e-16);
    const double u2 = rng.uniform01();
    sample.push_back(mean + sd * std::sqrt(-2.0 * std::log(u1)) *
                                std::cos(2.0 * std::numbers::pi * u2));
  }
  const auto est = analysis::kde(sample);
  const auto it = std::max_element(est.density.begin(), est.density.end());
  const double mode = est.grid[static_cast<std::size_t>(it - est.density.begin())];
  const double se = sd / std::sqrt(static_cast<double>(sample.size()));
  CHECK(std::abs(mode - mean) <= 3.0 * se + est.bandwidth);
}

TEST_CASE("compute_statistics bundles the pieces") {
  Rng rng(5);
  Ensemble e;
  e.width = 1.0;
  e.height = 1.0;
  for (int k = 0; k < 20; ++k) {
    auto pts = random_polyline(rng, 6, 2);
    pts.front() = {0.0, 0.5};
    pts.back() = {1.0, rng.uniform(0.3, 0.7)};
    e.paths.push_back(make_path(pts));
  }
  const auto stats = analysis::compute_statistics(e);
  CHECK(stats.median_index < e.paths.size());
  REQUIRE(stats.region.has_value());
  CHECK(stats.region->grid.size() == 200);
  CHECK(stats.tortuosity.values.size() == 20);
}
