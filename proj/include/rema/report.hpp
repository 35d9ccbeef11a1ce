#pragma once

// Static SVG charts and a plain-text table for comparing agents.

#include <iosfwd>
#include <string>
#include <vector>

#include "rema/env.hpp"
#include "rema/exp.hpp"

namespace rema::report {

/// Grouped bars per agent: mean detectable signals vs mean detected signals per episode.
void detections_chart(std::ostream& out, const std::vector<RunSummary>& summaries);

/// Grouped bars per band, one bar per agent, with +-1 std whiskers.
void visits_chart(std::ostream& out, const std::vector<RunSummary>& summaries);

/// Step vs band scatter, one colour per receiver.
void trace_chart(std::ostream& out, const std::vector<Action>& trace, int n_bands, const std::string& title);

/// Fixed-width table: agent, episodes, DR mean/std, detections, detectable, visits per band.
void table(std::ostream& out, const std::vector<RunSummary>& summaries);

}  // namespace rema::report
