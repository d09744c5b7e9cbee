#include "crackpath/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

namespace crackpath::analysis {

using geometry::Point2;
using prediction::CrackPath;
using prediction::Ensemble;

double discrete_frechet(const std::vector<Point2>& a, const std::vector<Point2>& b) {
  if (a.empty() || b.empty()) {
    throw Error(ErrorCategory::invalid_argument, "discrete_frechet: empty path");
  }
  const std::size_t n = a.size();
  const std::size_t m = b.size();
  std::vector<double> prev(m), row(m);
  for (std::size_t j = 0; j < m; ++j) {
    const double d = geometry::distance(a[0], b[j]);
    prev[j] = j == 0 ? d : std::max(prev[j - 1], d);
  }
  for (std::size_t i = 1; i < n; ++i) {
    row[0] = std::max(prev[0], geometry::distance(a[i], b[0]));
    for (std::size_t j = 1; j < m; ++j) {
      const double reach = std::min({prev[j], row[j - 1], prev[j - 1]});
      row[j] = std::max(reach, geometry::distance(a[i], b[j]));
    }
    std::swap(prev, row);
  }
  return prev[m - 1];
}

std::size_t median_path_index(const Ensemble& e) {
  const std::size_t m = e.paths.size();
  if (m == 0) {
    throw Error(ErrorCategory::invalid_argument, "median_path: empty ensemble");
  }
  if (m == 1) return 0;
  std::vector<double> sums(m, 0.0);
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = i + 1; j < m; ++j) {
      const double d = discrete_frechet(e.paths[i].points, e.paths[j].points);
      sums[i] += d;
      sums[j] += d;
    }
  }
  std::size_t best = 0;
  for (std::size_t k = 1; k < m; ++k) {
    if (sums[k] < sums[best]) best = k;
  }
  return best;
}

const CrackPath& median_path(const Ensemble& e) { return e.paths[median_path_index(e)]; }

double PathFunction::eval(double x) const {
  const auto& pts = breakpoints;
  if (pts.empty()) {
    throw Error(ErrorCategory::invalid_argument, "path function without breakpoints");
  }
  double value = pts.front().y;
  bool covered = false;
  for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
    const Point2 p = pts[i];
    const Point2 q = pts[i + 1];
    const double lo = std::min(p.x, q.x);
    const double hi = std::max(p.x, q.x);
    if (x < lo || x > hi) continue;
    covered = true;
    value = q.x == p.x ? q.y : p.y + (q.y - p.y) * (x - p.x) / (q.x - p.x);
  }
  if (!covered) {
    // Outside the traversed range: clamp to the nearest endpoint.
    value = x < pts.front().x ? pts.front().y : pts.back().y;
    if (pts.front().x > pts.back().x) {
      value = x < pts.back().x ? pts.back().y : pts.front().y;
    }
  }
  return value;
}

std::vector<double> PathFunction::eval_grid(const std::vector<double>& grid) const {
  std::vector<double> out(grid.size());
  for (std::size_t j = 0; j < grid.size(); ++j) out[j] = eval(grid[j]);
  return out;
}

PathFunction path_function(const CrackPath& p) {
  if (p.points.empty()) {
    throw Error(ErrorCategory::invalid_argument, "path_function: empty path");
  }
  return PathFunction{p.points};
}

ConfidenceRegion confidence_region(const Ensemble& e, int grid_size) {
  const int m = static_cast<int>(e.paths.size());
  if (m < 2) {
    throw Error(ErrorCategory::invalid_argument,
                "confidence_region: need at least two paths");
  }
  if (grid_size < 2) {
    throw Error(ErrorCategory::invalid_argument, "confidence_region: grid_size must be >= 2");
  }
  if (!(e.width > 0.0)) {
    throw Error(ErrorCategory::invalid_argument, "confidence_region: ensemble lacks a domain");
  }

  ConfidenceRegion region;
  region.grid.resize(static_cast<std::size_t>(grid_size));
  for (int j = 0; j < grid_size; ++j) {
    region.grid[static_cast<std::size_t>(j)] = e.width * j / (grid_size - 1);
  }

  std::vector<std::vector<double>> values;
  values.reserve(e.paths.size());
  for (const CrackPath& p : e.paths) {
    values.push_back(path_function(p).eval_grid(region.grid));
  }

  // 1-based ordered-sample indices floor(0.05 M) and ceil(0.95 M), clamped
  // into the sample.
  region.lower_order_index = std::max(1, static_cast<int>(std::floor(0.05 * m)));
  region.upper_order_index = std::min(m, static_cast<int>(std::ceil(0.95 * m)));

  region.lower.resize(region.grid.size());
  region.upper.resize(region.grid.size());
  std::vector<double> column(static_cast<std::size_t>(m));
  for (std::size_t j = 0; j < region.grid.size(); ++j) {
    for (int k = 0; k < m; ++k) column[static_cast<std::size_t>(k)] = values[static_cast<std::size_t>(k)][j];
    std::sort(column.begin(), column.end());
    region.lower[j] = column[static_cast<std::size_t>(region.lower_order_index - 1)];
    region.upper[j] = column[static_cast<std::size_t>(region.upper_order_index - 1)];
  }

  std::vector<Point2> lower_curve(region.grid.size()), upper_curve(region.grid.size());
  for (std::size_t j = 0; j < region.grid.size(); ++j) {
    lower_curve[j] = {region.grid[j], region.lower[j]};
    upper_curve[j] = {region.grid[j], region.upper[j]};
  }
  region.diameter = discrete_frechet(lower_curve, upper_curve);
  return region;
}

double tortuosity(const CrackPath& p) {
  if (p.points.size() < 2) {
    throw Error(ErrorCategory::invalid_argument, "tortuosity: need at least two points");
  }
  const double chord = geometry::distance(p.points.front(), p.points.back());
  if (chord <= 1e-12) {
    throw Error(ErrorCategory::invalid_argument, "tortuosity: coincident endpoints");
  }
  double length = 0.0;
  for (std::size_t i = 0; i + 1 < p.points.size(); ++i) {
    length += geometry::distance(p.points[i], p.points[i + 1]);
  }
  return length / chord;
}

namespace {

double ordered_value(std::vector<double> sorted, int one_based) {
  return sorted[static_cast<std::size_t>(one_based - 1)];
}

}  // namespace

TortuosityStats tortuosity_stats(const Ensemble& e, int bins) {
  if (e.paths.empty()) {
    throw Error(ErrorCategory::invalid_argument, "tortuosity_stats: empty ensemble");
  }
  if (bins < 1) {
    throw Error(ErrorCategory::invalid_argument, "tortuosity_stats: bins must be >= 1");
  }
  TortuosityStats stats;
  stats.values.reserve(e.paths.size());
  for (const CrackPath& p : e.paths) stats.values.push_back(tortuosity(p));

  std::vector<double> sorted = stats.values;
  std::sort(sorted.begin(), sorted.end());
  const int m = static_cast<int>(sorted.size());
  stats.median = m % 2 == 1 ? sorted[static_cast<std::size_t>(m / 2)]
                            : 0.5 * (sorted[static_cast<std::size_t>(m / 2 - 1)] +
                                     sorted[static_cast<std::size_t>(m / 2)]);
  const int lo_idx = std::max(1, static_cast<int>(std::floor(0.05 * m)));
  const int hi_idx = std::min(m, static_cast<int>(std::ceil(0.95 * m)));
  stats.p05 = ordered_value(sorted, lo_idx);
  stats.p95 = ordered_value(sorted, hi_idx);

  double lo = sorted.front();
  double hi = sorted.back();
  if (hi == lo) {
    lo -= 0.5;
    hi += 0.5;
  }
  stats.histogram.edges.resize(static_cast<std::size_t>(bins) + 1);
  for (int b = 0; b <= bins; ++b) {
    stats.histogram.edges[static_cast<std::size_t>(b)] = lo + (hi - lo) * b / bins;
  }
  stats.histogram.counts.assign(static_cast<std::size_t>(bins), 0);
  for (const double v : stats.values) {
    int b = static_cast<int>((v - lo) / (hi - lo) * bins);
    b = std::clamp(b, 0, bins - 1);
    ++stats.histogram.counts[static_cast<std::size_t>(b)];
  }
  return stats;
}

KdeResult kde(const std::vector<double>& values, std::optional<double> bandwidth,
              int grid_size) {
  if (values.size() < 2) {
    throw Error(ErrorCategory::invalid_argument, "kde: need at least two values");
  }
  if (grid_size < 2) {
    throw Error(ErrorCategory::invalid_argument, "kde: grid_size must be >= 2");
  }
  const std::size_t n = values.size();

  double h;
  if (bandwidth) {
    h = *bandwidth;
    if (!(h > 0.0)) {
      throw Error(ErrorCategory::invalid_argument, "kde: bandwidth must be > 0");
    }
  } else {
    double mean = 0.0;
    for (const double v : values) mean += v;
    mean /= static_cast<double>(n);
    double var = 0.0;
    for (const double v : values) var += (v - mean) * (v - mean);
    var /= static_cast<double>(n - 1);
    const double sd = std::sqrt(var);

    std::vector<double> sorted = values;
    std::sort(sorted.begin(), sorted.end());
    const auto quantile = [&](double q) {
      const double pos = q * static_cast<double>(n - 1);
      const std::size_t i = static_cast<std::size_t>(pos);
      const double frac = pos - static_cast<double>(i);
      return i + 1 < n ? sorted[i] * (1.0 - frac) + sorted[i + 1] * frac : sorted[i];
    };
    const double iqr = quantile(0.75) - quantile(0.25);

    // Silverman's rule of thumb.
    double spread = sd;
    if (iqr > 0.0) spread = std::min(spread, iqr / 1.34);
    h = 0.9 * spread * std::pow(static_cast<double>(n), -0.2);
    if (!(h > 0.0)) {
      throw Error(ErrorCategory::invalid_argument,
                  "kde: degenerate sample; pass an explicit bandwidth");
    }
  }

  const double lo = *std::min_element(values.begin(), values.end()) - 5.0 * h;
  const double hi = *std::max_element(values.begin(), values.end()) + 5.0 * h;

  KdeResult out;
  out.bandwidth = h;
  out.grid.resize(static_cast<std::size_t>(grid_size));
  out.density.resize(static_cast<std::size_t>(grid_size));
  const double inv = 1.0 / (static_cast<double>(n) * h * std::sqrt(2.0 * std::numbers::pi));
  for (int j = 0; j < grid_size; ++j) {
    const double x = lo + (hi - lo) * j / (grid_size - 1);
    double acc = 0.0;
    for (const double v : values) {
      const double u = (x - v) / h;
      acc += std::exp(-0.5 * u * u);
    }
    out.grid[static_cast<std::size_t>(j)] = x;
    out.density[static_cast<std::size_t>(j)] = acc * inv;
  }
  return out;
}

EnsembleStatistics compute_statistics(const Ensemble& e, const StatisticsOptions& options) {
  EnsembleStatistics stats;
  stats.median_index = median_path_index(e);
  if (e.paths.size() >= 2) {
    stats.region = confidence_region(e, options.grid_size);
  }
  stats.tortuosity = tortuosity_stats(e, options.bins);
  if (options.with_kde && stats.tortuosity.values.size() >= 2) {
    const auto& vals = stats.tortuosity.values;
    const bool degenerate =
        *std::max_element(vals.begin(), vals.end()) == *std::min_element(vals.begin(), vals.end());
    if (options.kde_bandwidth || !degenerate) {
      stats.kde_density = kde(vals, options.kde_bandwidth);
    }
  }
  return stats;
}

}  // namespace crackpath::analysis
