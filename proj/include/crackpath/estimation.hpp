#pragma once

// Maximum-likelihood estimation of the kernel parameters from training crack
// paths: per-step record extraction by geometric replay, the log-likelihood of
// the chosen transitions, and a multi-start quasi-Newton fit in log-parameter
// space. The F1 and F2 configurations are independent maximizations.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "crackpath/geometry.hpp"
#include "crackpath/model.hpp"
#include "crackpath/prediction.hpp"

namespace crackpath::estimation {

struct CandidateFeatures {
  double d_norm = 0.0;
  double theta_norm = 0.0;
  bool same_aggregate = false;
};

struct StepRecord {
  geometry::Configuration configuration = geometry::Configuration::F2;
  std::vector<CandidateFeatures> candidates;
  int chosen_index = 0;
  int source = 0;  // index into TrainingSet::provenance
};

struct TrainingSet {
  std::vector<StepRecord> records_f1;
  std::vector<StepRecord> records_f2;
  std::vector<std::string> provenance;  // microstructure ids, prefix order

  std::size_t record_count() const { return records_f1.size() + records_f2.size(); }
};

// Replays a crack path through the candidate-set machinery and records, at
// every step, the normalized indicators of all candidates plus the index of
// the point the crack actually chose. Every path point after the first must be
// a discretization point; a terminal non-discretization point is accepted only
// when the candidate set at the previous tip is empty (boundary projection).
std::vector<StepRecord> extract_steps(const geometry::DiscretizedMicrostructure& dm,
                                      const prediction::CrackPath& path,
                                      geometry::Point2 direction);

enum class Which { F1, F2, Both };

// Sum over the selected records of log P(chosen candidate). Compensated
// summation over fixed-size chunks keeps the value independent of threading.
double log_likelihood(const model::ModelParams& params, const TrainingSet& ts,
                      Which which = Which::Both, int threads = 1);

struct FitOptions {
  Which which = Which::Both;
  int n_starts = 10;
  int max_iterations = 500;
  double tol = 1e-9;           // convergence on |delta log-likelihood|
  std::uint64_t seed = 0xC0FFEE;
  // Log-uniform ranges for random starts.
  double mult_lo = 0.1, mult_hi = 50.0;  // multiplicative factors
  double exp_lo = 0.1, exp_hi = 5.0;     // exponents
  // Box for the optimizer in parameter space; values at the upper clamp are
  // flagged. The lower clamp keeps exponents away from 0 where the kernel
  // loses differentiability.
  double param_lo = 1e-4, param_hi = 50.0;
  int threads = 1;
  // Extra deterministic first start (the shipped defaults, or a caller-chosen
  // warm start); the random starts follow.
  std::optional<model::ModelParams> warm_start;
};

struct ConfigFit {
  std::array<double, 6> params{};
  double log_likelihood = 0.0;
  int iterations = 0;
  bool converged = false;
  bool identifiable = true;
  bool clamped = false;
};

struct FitResult {
  model::ModelParams params;
  double log_likelihood = 0.0;  // over the records that were fit
  int iterations = 0;
  bool converged = false;
  int n_starts = 0;
  bool identifiable = true;
  bool clamped = false;
  ConfigFit f1;
  ConfigFit f2;
};

// Maximizes the log-likelihood per configuration with multi-start BFGS over
// the log-parameters. Throws Error{estimation} on empty record lists or when
// no start yields a finite likelihood.
FitResult fit(const TrainingSet& ts, const FitOptions& options = {});

struct StabilityRow {
  int size = 0;
  model::ModelParams params;
  double log_likelihood_f1 = 0.0;
  double log_likelihood_f2 = 0.0;
};

struct StabilityOptions {
  FitOptions fit;
  // Refits after the first size warm-start from the previous estimate and use
  // fewer random starts; the first size runs the full fit.
  int continuation_starts = 3;
};

// Refits on nested prefixes of the provenance list (records with source <
// size). sizes must be within [1, provenance.size()].
std::vector<StabilityRow> stability_curve(const TrainingSet& ts, const std::vector<int>& sizes,
                                          const StabilityOptions& options = {});

// Central finite-difference gradient of the log-likelihood in log-parameter
// space; exposed for cross-checking the analytic gradient.
std::array<double, 6> fd_gradient(const TrainingSet& ts, Which which,
                                  const std::array<double, 6>& params, double step);

// Analytic gradient in log-parameter space together with the value.
double value_and_gradient(const TrainingSet& ts, Which which,
                          const std::array<double, 6>& params, std::array<double, 6>& grad,
                          int threads = 1);

}  // namespace crackpath::estimation
