#pragma once

// Scenario files (YAML) and CSV emission.

#include "gridbrake/engine.hpp"
#include "gridbrake/scenario.hpp"
#include "gridbrake/small_signal.hpp"

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

namespace gridbrake {

/// Parses and fully validates a scenario document. Every error is a
/// ScenarioFileError carrying the offending line; `source` prefixes messages.
Scenario parse_scenario_text(const std::string& text, const std::string& source = "<scenario>");
Scenario parse_scenario(const std::filesystem::path& path);

/// Fully expanded document; parse_scenario_text(serialize_scenario(s)) == s.
std::string serialize_scenario(const Scenario& scenario);

/// A built-in name or a path to a scenario file.
Scenario load_scenario(const std::string& name_or_path);

/// Shortest text that reads back to the same double, always with '.'.
std::string format_double(double x);

/// `time_s` followed by `channels` (all trace channels when empty).
void write_trace_csv(std::ostream& os, const SimTrace& trace, const std::vector<std::string>& channels = {});
void write_events_csv(std::ostream& os, const SimTrace& trace);
/// One `metric,value` row per field.
void write_metrics_csv(std::ostream& os, const TraceMetrics& m);
void write_sweep_csv(std::ostream& os, const std::vector<SweepResult>& results);
void write_eigen_csv(std::ostream& os, const std::vector<EigenPoint>& points);

/// Columns of a CSV file read back as numbers; the header gives the names.
struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<double>> columns;
    const std::vector<double>& column(const std::string& name) const;
};
CsvTable read_csv(std::istream& is);

void write_text_file(const std::filesystem::path& path, const std::string& text);

}  // namespace gridbrake
