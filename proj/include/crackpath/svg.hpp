#pragma once

// Deterministic SVG overlay of a microstructure with an ensemble of crack
// paths, the median path and the confidence-region curves.

#include <string>

#include "crackpath/analysis.hpp"
#include "crackpath/geometry.hpp"
#include "crackpath/prediction.hpp"

namespace crackpath::svg {

std::string render_overlay(const geometry::Microstructure& m,
                           const prediction::Ensemble* ensemble,
                           const analysis::EnsembleStatistics* stats);

}  // namespace crackpath::svg
