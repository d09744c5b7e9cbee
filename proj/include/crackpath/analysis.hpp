#pragma once

// Ensemble statistics: discrete Frechet distance, median path, percentile
// confidence region with its Frechet diameter, tortuosity distribution and
// Gaussian kernel density estimates.

#include <optional>
#include <vector>

#include "crackpath/geometry.hpp"
#include "crackpath/prediction.hpp"

namespace crackpath::analysis {

// Discrete Frechet distance over the vertex sequences (dynamic programming):
// minimum over monotone couplings of the maximum pointwise distance.
double discrete_frechet(const std::vector<geometry::Point2>& a,
                        const std::vector<geometry::Point2>& b);

// Index of the ensemble member minimizing the sum of Frechet distances to all
// other members; ties break to the lowest index.
std::size_t median_path_index(const prediction::Ensemble& e);
const prediction::CrackPath& median_path(const prediction::Ensemble& e);

// Piecewise-linear crack function h(x1). Where the path is vertical or
// multivalued the last traversal wins (the crack's final position there);
// outside the traversed range the nearest endpoint value is returned.
struct PathFunction {
  std::vector<geometry::Point2> breakpoints;

  double eval(double x) const;
  // Values on an increasing grid in one sweep.
  std::vector<double> eval_grid(const std::vector<double>& grid) const;
};

PathFunction path_function(const prediction::CrackPath& p);

struct ConfidenceRegion {
  std::vector<double> grid;
  std::vector<double> lower;  // ordered-sample index floor(0.05 M), 1-based
  std::vector<double> upper;  // ordered-sample index ceil(0.95 M), 1-based
  double diameter = 0.0;      // Frechet distance between the two curves
  int lower_order_index = 0;
  int upper_order_index = 0;
};

// Pointwise order statistics of the path functions on a uniform grid over
// [0, width]. Requires at least two paths.
ConfidenceRegion confidence_region(const prediction::Ensemble& e, int grid_size = 200);

// Crack length over end-to-end chord length; >= 1. Throws when the endpoints
// coincide.
double tortuosity(const prediction::CrackPath& p);

struct Histogram {
  std::vector<double> edges;  // bins + 1 entries
  std::vector<long long> counts;
};

struct TortuosityStats {
  std::vector<double> values;
  double median = 0.0;
  double p05 = 0.0;  // same ordered-index rule as the confidence region
  double p95 = 0.0;
  Histogram histogram;
};

TortuosityStats tortuosity_stats(const prediction::Ensemble& e, int bins = 20);

struct KdeResult {
  std::vector<double> grid;
  std::vector<double> density;
  double bandwidth = 0.0;
};

// Gaussian kernel density on a uniform grid spanning the sample plus five
// bandwidths on each side (the trapezoid integral stays within 1e-3 of 1).
// Auto bandwidth uses Silverman's rule; a degenerate sample with auto
// bandwidth is an error suggesting an explicit one.
KdeResult kde(const std::vector<double>& values, std::optional<double> bandwidth = std::nullopt,
              int grid_size = 401);

struct StatisticsOptions {
  int grid_size = 200;
  int bins = 20;
  bool with_kde = true;
  std::optional<double> kde_bandwidth;
};

struct EnsembleStatistics {
  std::size_t median_index = 0;
  std::optional<ConfidenceRegion> region;  // absent for single-path ensembles
  TortuosityStats tortuosity;
  std::optional<KdeResult> kde_density;  // absent for degenerate samples
};

EnsembleStatistics compute_statistics(const prediction::Ensemble& e,
                                      const StatisticsOptions& options = {});

}  // namespace crackpath::analysis
