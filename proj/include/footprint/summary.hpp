#pragma once

#include <string>

#include "footprint/geo.hpp"
#include "footprint/model.hpp"
#include "footprint/timeline.hpp"

namespace footprint {

/// Plain-text day report: segment counts per bar, an ASCII rendering of the
/// four bars (one column per 15 minutes), places by dwell, and event totals.
/// Output depends only on its arguments.
std::string render_summary(const DayLog& day, const DayAnalysis& analysis, const Timeline& timeline);

}  // namespace footprint
