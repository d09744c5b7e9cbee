#pragma once

// Independent reference implementations used to cross-check the production
// code paths. None of these share machinery with the implementations they
// verify: visibility is decided by segment clipping instead of shadow cones,
// the Frechet distance by exhaustive coupling enumeration instead of dynamic
// programming, and kernel weights by direct formula evaluation instead of the
// log-space pipeline. Intended for test suites and the built-in selftest.

#include <vector>

#include "crackpath/geometry.hpp"

namespace crackpath::oracles {

// Does the open segment (a, b) pass through the strict interior of the polygon?
bool segment_crosses_interior(geometry::Point2 a, geometry::Point2 b,
                              const geometry::Aggregate& poly);

// Visibility by brute force: z is visible from tip iff the open segment
// tip-z crosses no aggregate interior.
bool visible(geometry::Point2 tip, geometry::Point2 z, const geometry::Microstructure& m);

// Discrete Frechet distance by exhaustive enumeration of monotone couplings.
// Exponential; intended for sequences of at most ~10 vertices.
double frechet_enumeration(const std::vector<geometry::Point2>& a,
                           const std::vector<geometry::Point2>& b);

// Kernel weights evaluated directly from their closed forms.
double kernel_f1_direct(double d_norm, double theta_norm, bool same_aggregate,
                        const double mu[6]);
double kernel_f2_direct(double d_norm, double theta_norm, const double lambda[6]);

// Volume fraction by uniform point sampling.
double sampled_volume_fraction(const geometry::Microstructure& m, long long n_samples,
                               unsigned long long seed);

}  // namespace crackpath::oracles
