#include "crackpath/prediction.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <mutex>
#include <thread>

namespace crackpath::prediction {

using geometry::DiscretizedMicrostructure;
using geometry::Point2;
using geometry::TipState;

std::optional<int> local_step(const TipState& tip, Point2 direction,
                              const DiscretizedMicrostructure& dm,
                              const model::ModelParams& params,
                              const std::vector<char>& visited, Rng& rng) {
  const auto cs = geometry::build_candidate_set(tip, direction, dm, visited);
  if (!cs) return std::nullopt;
  const std::vector<double> probs = model::transition_probabilities(*cs, params);
  const double u = rng.uniform01();
  double cdf = 0.0;
  std::size_t pick = probs.size() - 1;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    cdf += probs[i];
    if (u < cdf) {
      pick = i;
      break;
    }
  }
  return cs->candidates[pick].point_index;
}

namespace {

// First intersection of the ray tip + t*direction, t > 0, with the domain
// rectangle boundary; the hit coordinate is set exactly.
Point2 project_to_boundary(Point2 tip, Point2 direction, double width, double height) {
  double best_t = std::numeric_limits<double>::max();
  Point2 hit = tip;
  const auto consider = [&](double t, Point2 p) {
    if (t > 0.0 && t < best_t) {
      best_t = t;
      hit = p;
    }
  };
  if (direction.x > 0.0) {
    const double t = (width - tip.x) / direction.x;
    consider(t, {width, tip.y + t * direction.y});
  } else if (direction.x < 0.0) {
    const double t = (0.0 - tip.x) / direction.x;
    consider(t, {0.0, tip.y + t * direction.y});
  }
  if (direction.y > 0.0) {
    const double t = (height - tip.y) / direction.y;
    consider(t, {tip.x + t * direction.x, height});
  } else if (direction.y < 0.0) {
    const double t = (0.0 - tip.y) / direction.y;
    consider(t, {tip.x + t * direction.x, 0.0});
  }
  return hit;
}

}  // namespace

CrackPath simulate_crack(const DiscretizedMicrostructure& dm, Point2 start, Point2 direction,
                         const model::ModelParams& params, std::uint64_t seed,
                         const SimulateOptions& options) {
  if (start.x < 0.0 || start.x > dm.source.width || start.y < 0.0 ||
      start.y > dm.source.height) {
    throw Error(ErrorCategory::invalid_argument, "simulate_crack: start outside the domain");
  }
  const double dir_norm = geometry::norm(direction);
  if (std::abs(dir_norm - 1.0) > 1e-9) {
    throw Error(ErrorCategory::invalid_argument, "simulate_crack: direction must be unit");
  }
  model::validate(params);

  const long long max_steps =
      options.max_steps > 0 ? options.max_steps
                            : 10 * static_cast<long long>(std::max<std::size_t>(dm.points.size(), 1));

  CrackPath path;
  path.seed = seed;
  path.start = start;
  path.points.push_back(start);
  path.point_indices.push_back(-1);

  Rng rng(seed);
  std::vector<char> visited(dm.points.size(), 0);
  TipState tip{start, -1};
  long long steps = 0;
  while (tip.position.x < dm.source.width) {
    const auto next = local_step(tip, direction, dm, params, visited, rng);
    if (!next) {
      const Point2 exit = project_to_boundary(tip.position, direction, dm.source.width,
                                              dm.source.height);
      if (!(exit == tip.position)) {
        path.points.push_back(exit);
        path.point_indices.push_back(-1);
      }
      break;
    }
    if (++steps > max_steps) {
      throw SimulationError("simulate_crack: step cap reached (" + std::to_string(max_steps) +
                                ") before the boundary",
                            path);
    }
    const int idx = *next;
    visited[static_cast<std::size_t>(idx)] = 1;
    tip = TipState{dm.points[static_cast<std::size_t>(idx)].position, idx};
    path.points.push_back(tip.position);
    path.point_indices.push_back(idx);
  }
  path.steps = static_cast<int>(path.points.size()) - 1;
  return path;
}

Ensemble simulate_ensemble(const DiscretizedMicrostructure& dm, Point2 start, Point2 direction,
                           const model::ModelParams& params, int n_paths,
                           std::uint64_t master_seed, int threads,
                           const SimulateOptions& options) {
  if (n_paths < 1) {
    throw Error(ErrorCategory::invalid_argument, "simulate_ensemble: need at least one path");
  }
  Ensemble e;
  e.width = dm.source.width;
  e.height = dm.source.height;
  e.master_seed = master_seed;
  e.paths.resize(static_cast<std::size_t>(n_paths));

  std::exception_ptr first_error;
  std::mutex error_mutex;
  const auto run_range = [&](int begin, int end) {
    for (int k = begin; k < end; ++k) {
      try {
        e.paths[static_cast<std::size_t>(k)] = simulate_crack(
            dm, start, direction, params, derive_seed(master_seed, static_cast<std::uint64_t>(k)),
            options);
      } catch (...) {
        const std::lock_guard<std::mutex> lock(error_mutex);
        if (!first_error) first_error = std::current_exception();
        return;
      }
    }
  };

  const int n_workers = std::max(1, std::min(threads, n_paths));
  if (n_workers == 1) {
    run_range(0, n_paths);
  } else {
    std::vector<std::thread> pool;
    const int per = (n_paths + n_workers - 1) / n_workers;
    for (int w = 0; w < n_workers; ++w) {
      const int begin = std::min(n_paths, w * per);
      const int end = std::min(n_paths, begin + per);
      if (begin < end) pool.emplace_back(run_range, begin, end);
    }
    for (auto& th : pool) th.join();
  }
  if (first_error) std::rethrow_exception(first_error);
  return e;
}

}  // namespace crackpath::prediction
