#pragma once

// Random microstructure generation (hard-core placement of convex regular
// polygons) and morphological descriptors: volume fraction and the isotropic
// covariogram C(||h||).

#include <cstdint>
#include <vector>

#include "crackpath/geometry.hpp"

namespace crackpath::morphology {

struct MorphologyConfig {
  double width = 0.600;   // m
  double height = 0.225;  // m
  double target_volume_fraction = 0.25;
  // Number of polygon sides drawn uniformly in [n_min, n_max]; n_min == n_max
  // fixes the shape (4 = squares).
  int n_min = 4;
  int n_max = 4;
  // Circumradius drawn uniformly in [circumradius_min, circumradius_max].
  double circumradius_min = 0.015;
  double circumradius_max = 0.015;
  double min_gap = 0.002;  // minimal clearance between aggregates, m
  std::uint64_t seed = 0;
  long long max_attempts = 200000;
  double tolerance = 0.01;  // acceptable shortfall on the volume fraction
};

void validate(const MorphologyConfig& config);

// Sequential hard-core placement: random center/orientation/shape, accepted
// iff the polygon keeps min_gap clearance from everything already placed and
// stays inside the domain. Deterministic for a fixed seed. Throws
// Error{geometry} with the achieved fraction when max_attempts runs out.
geometry::Microstructure generate(const MorphologyConfig& config);

// Sum of polygon areas over the domain area.
double volume_fraction(const geometry::Microstructure& m);

struct CovariogramEstimate {
  std::vector<double> lags;    // m
  std::vector<double> values;  // P(x in aggregates, x+h in aggregates)
  std::vector<long long> kept; // samples that stayed inside the domain, per lag
  long long n_samples = 0;     // requested samples per lag
};

// Monte Carlo estimate over uniform points and uniform directions; draws whose
// displaced point leaves the domain are discarded. Fixed sample chunks with
// per-chunk derived seeds make the result independent of the thread count.
CovariogramEstimate covariogram(const geometry::Microstructure& m,
                                const std::vector<double>& lags, long long n_samples,
                                std::uint64_t seed, int threads = 1);

}  // namespace crackpath::morphology
