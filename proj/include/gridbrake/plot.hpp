#pragma once

// Deterministic SVG rendering of traces and eigenvalue sweeps.

#include "gridbrake/engine.hpp"
#include "gridbrake/io.hpp"

#include <string>
#include <vector>

namespace gridbrake {

struct PlotMarker {
    double time_s = 0.0;
    std::string label;
};

struct PlotSpec {
    std::vector<std::string> channels;   ///< one panel per channel
    std::string title;
    std::string x_label = "time (s)";
    std::vector<std::string> y_labels;   ///< per panel; defaults to the channel name
    std::vector<PlotMarker> markers;
};

/// A trace table (time_s plus channels) drawn as one curve per panel.
struct LabeledTable {
    std::string label;
    CsvTable table;
};

CsvTable trace_table(const SimTrace& trace);

/// Load steps, breaker switching and dip boundaries as vertical markers.
std::vector<PlotMarker> event_markers(const SimTrace& trace);

/// Stacked panels, every table overlaid in each panel. Throws ConfigError for
/// an empty table list, an empty table or a missing channel.
std::string render_trace_svg(const std::vector<LabeledTable>& tables, const PlotSpec& spec);

/// Complex-plane scatter of an eigen CSV table, one series per SCR value.
std::string render_eigen_svg(const CsvTable& eigen, const std::string& title);

}  // namespace gridbrake
