#pragma once

// Stochastic crack simulation: local weighted draws over the candidate set,
// iterated from a start point until the domain boundary, plus seeded
// ensembles of independent paths.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "crackpath/geometry.hpp"
#include "crackpath/model.hpp"
#include "crackpath/rng.hpp"

namespace crackpath::prediction {

struct CrackPath {
  std::vector<geometry::Point2> points;
  // Parallel to points: discretization-point index, or -1 for the start and
  // for a projected terminal point.
  std::vector<int> point_indices;
  std::uint64_t seed = 0;
  geometry::Point2 start;
  int steps = 0;
};

struct Ensemble {
  std::string microstructure_id;
  double width = 0.0;
  double height = 0.0;
  std::uint64_t master_seed = 0;
  std::vector<CrackPath> paths;
};

class SimulationError : public Error {
public:
  SimulationError(const std::string& what, CrackPath partial)
      : Error(ErrorCategory::simulation, what), partial_path(std::move(partial)) {}

  CrackPath partial_path;
};

struct SimulateOptions {
  // Hard cap on steps; <= 0 means 10 * (number of discretization points).
  long long max_steps = 0;
};

// One local prediction: build the candidate set, evaluate the transition
// probabilities, draw the next point by inverse-CDF sampling. Returns nullopt
// when no candidate remains (termination condition for the caller).
std::optional<int> local_step(const geometry::TipState& tip, geometry::Point2 direction,
                              const geometry::DiscretizedMicrostructure& dm,
                              const model::ModelParams& params,
                              const std::vector<char>& visited, Rng& rng);

// Iterates local_step from `start`, marking visited points, until the tip
// reaches x >= width or no candidate remains; an empty candidate set appends
// the straight projection of the tip along `direction` onto the domain
// boundary. Throws SimulationError (with the partial path) at the step cap.
CrackPath simulate_crack(const geometry::DiscretizedMicrostructure& dm, geometry::Point2 start,
                         geometry::Point2 direction, const model::ModelParams& params,
                         std::uint64_t seed, const SimulateOptions& options = {});

// M independent paths with per-path seeds derive_seed(master_seed, k); content
// is identical for any thread count, and the first paths of a larger ensemble
// replicate a smaller one with the same master seed.
Ensemble simulate_ensemble(const geometry::DiscretizedMicrostructure& dm,
                           geometry::Point2 start, geometry::Point2 direction,
                           const model::ModelParams& params, int n_paths,
                           std::uint64_t master_seed, int threads = 1,
                           const SimulateOptions& options = {});

}  // namespace crackpath::prediction
