#pragma once

// Structured-text serialization for every artifact the tool reads or writes:
// microstructures, kernel parameters, training sets, ensembles, statistics and
// CSV tables. JSON numbers use shortest round-trip formatting, so files are
// bit-faithful and byte-stable for identical inputs.

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "crackpath/analysis.hpp"
#include "crackpath/estimation.hpp"
#include "crackpath/geometry.hpp"
#include "crackpath/model.hpp"
#include "crackpath/morphology.hpp"
#include "crackpath/prediction.hpp"

namespace crackpath::io {

std::string read_file(const std::string& path);
void write_file(const std::string& path, std::string_view content);

std::uint64_t fnv1a64(std::string_view bytes);
std::string format_double(double v);  // shortest round-trip decimal

// --- microstructures ---
std::string to_json(const geometry::Microstructure& m);
geometry::Microstructure microstructure_from_json(const std::string& text);
void save_microstructure(const geometry::Microstructure& m, const std::string& path);
geometry::Microstructure load_microstructure(const std::string& path);
// Content hash over the canonical JSON form, "fnv1a:<16 hex>".
std::string microstructure_id(const geometry::Microstructure& m);

// --- generation config ---
std::string to_json(const morphology::MorphologyConfig& c);
morphology::MorphologyConfig morphology_config_from_json(const std::string& text);

// --- kernel parameters ---
std::string to_json(const model::ModelParams& p);
model::ModelParams params_from_json(const std::string& text);
void save_params(const model::ModelParams& p, const std::string& path);
model::ModelParams load_params(const std::string& path);
std::string params_fingerprint(const model::ModelParams& p);

// --- training sets ---
std::string to_json(const estimation::TrainingSet& ts);
estimation::TrainingSet training_from_json(const std::string& text);
void save_training(const estimation::TrainingSet& ts, const std::string& path);
estimation::TrainingSet load_training(const std::string& path);

// --- ensembles ---
std::string to_json(const prediction::Ensemble& e, const std::string& params_fingerprint);
prediction::Ensemble ensemble_from_json(const std::string& text);
void save_ensemble(const prediction::Ensemble& e, const std::string& params_fingerprint,
                   const std::string& path);
prediction::Ensemble load_ensemble(const std::string& path);

// --- derived outputs ---
std::string discretized_to_json(const geometry::DiscretizedMicrostructure& dm);
std::string statistics_to_json(const prediction::Ensemble& e,
                               const analysis::EnsembleStatistics& stats);
std::string fit_report_json(const estimation::FitResult& r);
std::string covariogram_csv(const morphology::CovariogramEstimate& est);
std::string stability_csv(const std::vector<estimation::StabilityRow>& rows);
std::string region_csv(const analysis::ConfidenceRegion& region,
                       const std::vector<double>& median_values);

}  // namespace crackpath::io
