#include "crackpath/morphology.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>
#include <thread>

#include "crackpath/rng.hpp"

namespace crackpath::morphology {

using geometry::Aggregate;
using geometry::Microstructure;
using geometry::Point2;

void validate(const MorphologyConfig& c) {
  if (!(c.width > 0.0) || !(c.height > 0.0)) {
    throw Error(ErrorCategory::invalid_argument, "generate: domain must be positive");
  }
  if (c.target_volume_fraction < 0.0 || c.target_volume_fraction > 0.5) {
    throw Error(ErrorCategory::invalid_argument,
                "generate: target volume fraction must be in [0, 0.5]; sequential "
                "hard-core placement jams well below 0.5");
  }
  if (c.n_min < 3 || c.n_max < c.n_min) {
    throw Error(ErrorCategory::invalid_argument, "generate: invalid polygon side range");
  }
  if (!(c.circumradius_min > 0.0) || c.circumradius_max < c.circumradius_min) {
    throw Error(ErrorCategory::invalid_argument, "generate: invalid circumradius range");
  }
  if (2.0 * c.circumradius_max > std::min(c.width, c.height)) {
    throw Error(ErrorCategory::invalid_argument, "generate: circumradius too large for domain");
  }
  if (c.min_gap < 0.0) {
    throw Error(ErrorCategory::invalid_argument, "generate: min_gap must be >= 0");
  }
  if (c.max_attempts < 1) {
    throw Error(ErrorCategory::invalid_argument, "generate: max_attempts must be >= 1");
  }
}

namespace {

Aggregate regular_polygon(int id, Point2 center, double radius, int n, double phase) {
  Aggregate a{id, {}};
  a.vertices.reserve(static_cast<std::size_t>(n));
  for (int k = 0; k < n; ++k) {
    const double ang = phase + 2.0 * std::numbers::pi * k / n;
    a.vertices.push_back({center.x + radius * std::cos(ang), center.y + radius * std::sin(ang)});
  }
  return a;
}

}  // namespace

Microstructure generate(const MorphologyConfig& c) {
  validate(c);
  Microstructure m{c.width, c.height, {}};
  const double domain_area = c.width * c.height;
  // Stop in the middle of the tolerance band so the final overshoot of one
  // aggregate stays inside it.
  const double stop_at = c.target_volume_fraction - 0.5 * c.tolerance;

  Rng rng(c.seed);
  double covered = 0.0;
  long long attempts = 0;
  while (covered / domain_area < stop_at) {
    if (++attempts > c.max_attempts) {
      throw Error(ErrorCategory::geometry,
                  "generate: placement stalled after " + std::to_string(c.max_attempts) +
                      " attempts at volume fraction " + std::to_string(covered / domain_area));
    }
    const int n = c.n_min + rng.uniform_int(c.n_max - c.n_min + 1);
    const double r = rng.uniform(c.circumradius_min, c.circumradius_max);
    const Point2 center{rng.uniform(r, c.width - r), rng.uniform(r, c.height - r)};
    const double phase = rng.uniform(0.0, 2.0 * std::numbers::pi);
    Aggregate cand = regular_polygon(static_cast<int>(m.aggregates.size()), center, r, n, phase);

    bool ok = true;
    for (const Aggregate& other : m.aggregates) {
      const double gap = geometry::convex_distance(cand, other);
      if (gap < c.min_gap || gap == 0.0) {
        ok = false;
        break;
      }
    }
    if (!ok) continue;
    covered += cand.area();
    m.aggregates.push_back(std::move(cand));
  }
  return m;
}

double volume_fraction(const Microstructure& m) {
  if (!(m.width > 0.0) || !(m.height > 0.0)) {
    throw Error(ErrorCategory::invalid_argument, "volume_fraction: empty domain");
  }
  double covered = 0.0;
  for (const Aggregate& a : m.aggregates) covered += a.area();
  return covered / (m.width * m.height);
}

namespace {

// Uniform bucket grid over aggregate bounding boxes for O(1) point queries.
class AggregateIndex {
public:
  explicit AggregateIndex(const Microstructure& m) : m_(m) {
    double max_extent = 1e-6;
    for (const Aggregate& a : m.aggregates) {
      double lo_x = 1e300, hi_x = -1e300, lo_y = 1e300, hi_y = -1e300;
      for (const Point2 v : a.vertices) {
        lo_x = std::min(lo_x, v.x);
        hi_x = std::max(hi_x, v.x);
        lo_y = std::min(lo_y, v.y);
        hi_y = std::max(hi_y, v.y);
      }
      boxes_.push_back({lo_x, hi_x, lo_y, hi_y});
      max_extent = std::max({max_extent, hi_x - lo_x, hi_y - lo_y});
    }
    cell_ = std::max(max_extent, std::max(m.width, m.height) / 256.0);
    nx_ = std::max(1, static_cast<int>(m.width / cell_));
    ny_ = std::max(1, static_cast<int>(m.height / cell_));
    cells_.resize(static_cast<std::size_t>(nx_) * ny_);
    for (std::size_t i = 0; i < boxes_.size(); ++i) {
      const auto& b = boxes_[i];
      for (int gx = cell_of_x(b.lo_x); gx <= cell_of_x(b.hi_x); ++gx) {
        for (int gy = cell_of_y(b.lo_y); gy <= cell_of_y(b.hi_y); ++gy) {
          cells_[static_cast<std::size_t>(gy) * nx_ + gx].push_back(static_cast<int>(i));
        }
      }
    }
  }

  bool contains(Point2 p) const {
    if (m_.aggregates.empty()) return false;
    const auto& bucket =
        cells_[static_cast<std::size_t>(cell_of_y(p.y)) * nx_ + cell_of_x(p.x)];
    for (const int i : bucket) {
      const auto& b = boxes_[static_cast<std::size_t>(i)];
      if (p.x < b.lo_x || p.x > b.hi_x || p.y < b.lo_y || p.y > b.hi_y) continue;
      if (geometry::point_in_aggregate(p, m_.aggregates[static_cast<std::size_t>(i)])) {
        return true;
      }
    }
    return false;
  }

private:
  struct Box {
    double lo_x, hi_x, lo_y, hi_y;
  };

  int cell_of_x(double x) const {
    return std::clamp(static_cast<int>(x / cell_), 0, nx_ - 1);
  }
  int cell_of_y(double y) const {
    return std::clamp(static_cast<int>(y / cell_), 0, ny_ - 1);
  }

  const Microstructure& m_;
  std::vector<Box> boxes_;
  std::vector<std::vector<int>> cells_;
  double cell_ = 1.0;
  int nx_ = 1, ny_ = 1;
};

constexpr long long kChunk = 8192;

struct ChunkCounts {
  long long hits = 0;
  long long kept = 0;
};

ChunkCounts covariogram_chunk(const Microstructure& m, const AggregateIndex& index, double lag,
                              std::uint64_t chunk_seed, long long n) {
  Rng rng(chunk_seed);
  ChunkCounts out;
  for (long long i = 0; i < n; ++i) {
    const Point2 x{rng.uniform(0.0, m.width), rng.uniform(0.0, m.height)};
    const double ang = rng.uniform(0.0, 2.0 * std::numbers::pi);
    const Point2 y{x.x + lag * std::cos(ang), x.y + lag * std::sin(ang)};
    if (y.x < 0.0 || y.x > m.width || y.y < 0.0 || y.y > m.height) continue;
    ++out.kept;
    if (index.contains(x) && index.contains(y)) ++out.hits;
  }
  return out;
}

}  // namespace

CovariogramEstimate covariogram(const Microstructure& m, const std::vector<double>& lags,
                                long long n_samples, std::uint64_t seed, int threads) {
  if (lags.empty()) {
    throw Error(ErrorCategory::invalid_argument, "covariogram: no lags given");
  }
  for (const double lag : lags) {
    if (!(lag >= 0.0)) {
      throw Error(ErrorCategory::invalid_argument, "covariogram: lags must be >= 0");
    }
  }
  if (n_samples <= 0) {
    throw Error(ErrorCategory::invalid_argument, "covariogram: n_samples must be > 0");
  }
  geometry::validate(m);
  const AggregateIndex index(m);

  const long long n_chunks_per_lag = (n_samples + kChunk - 1) / kChunk;
  struct Task {
    std::size_t lag_idx;
    long long chunk_idx;
    long long count;
  };
  std::vector<Task> tasks;
  for (std::size_t li = 0; li < lags.size(); ++li) {
    for (long long ci = 0; ci < n_chunks_per_lag; ++ci) {
      tasks.push_back({li, ci, std::min(kChunk, n_samples - ci * kChunk)});
    }
  }

  // Integer counts per fixed chunk: any summation order gives the same totals,
  // so the estimate does not depend on the worker count.
  std::vector<ChunkCounts> results(tasks.size());
  const int n_workers = std::max(1, threads);
  const auto run_range = [&](std::size_t begin, std::size_t end) {
    for (std::size_t t = begin; t < end; ++t) {
      const Task& task = tasks[t];
      const std::uint64_t chunk_seed = derive_seed(
          derive_seed(seed, static_cast<std::uint64_t>(task.lag_idx)),
          static_cast<std::uint64_t>(task.chunk_idx));
      results[t] = covariogram_chunk(m, index, lags[task.lag_idx], chunk_seed, task.count);
    }
  };
  if (n_workers == 1) {
    run_range(0, tasks.size());
  } else {
    std::vector<std::thread> pool;
    const std::size_t per = (tasks.size() + n_workers - 1) / n_workers;
    for (int w = 0; w < n_workers; ++w) {
      const std::size_t begin = std::min(tasks.size(), static_cast<std::size_t>(w) * per);
      const std::size_t end = std::min(tasks.size(), begin + per);
      if (begin < end) pool.emplace_back(run_range, begin, end);
    }
    for (auto& th : pool) th.join();
  }

  CovariogramEstimate est;
  est.lags = lags;
  est.n_samples = n_samples;
  est.values.assign(lags.size(), 0.0);
  est.kept.assign(lags.size(), 0);
  std::vector<long long> hits(lags.size(), 0);
  for (std::size_t t = 0; t < tasks.size(); ++t) {
    hits[tasks[t].lag_idx] += results[t].hits;
    est.kept[tasks[t].lag_idx] += results[t].kept;
  }
  for (std::size_t li = 0; li < lags.size(); ++li) {
    if (est.kept[li] == 0) {
      throw Error(ErrorCategory::invalid_argument,
                  "covariogram: lag " + std::to_string(lags[li]) +
                      " leaves no sample inside the domain");
    }
    est.values[li] = static_cast<double>(hits[li]) / static_cast<double>(est.kept[li]);
  }
  return est;
}

}  // namespace crackpath::morphology
