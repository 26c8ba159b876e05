#pragma once

#include <string>

#include "ccshap/attribution.hpp"

namespace ccshap {

/// Beeswarm plot: one row per feature, x = phi, one circle per
/// (row, feature) colored from low (blue) to high (red) feature value.
/// Vertical jitter is a hash of the row id, so output is reproducible.
std::string render_beeswarm_svg(const AttributionResult& result, const std::string& title);

} // namespace ccshap
