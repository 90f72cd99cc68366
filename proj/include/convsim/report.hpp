#pragma once

#include <string>

#include "convsim/harness.hpp"

namespace convsim {

// Writes metrics.csv, metrics.json, and self-contained SVG bar charts
// (sales/user per agent with CI whiskers; mean tau per scheme) into dir.
// Output is byte-stable: the same report always produces the same files.
void emit_report(const MetricsReport& report, const std::string& dir);

std::string metrics_to_csv(const MetricsReport& report);
std::string metrics_to_json(const MetricsReport& report);
std::string sales_chart_svg(const MetricsReport& report);
std::string tau_chart_svg(const MetricsReport& report);

MetricsReport metrics_from_json_file(const std::string& path);

}  // namespace convsim
