#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "surgeflow/forecast.hpp"
#include "surgeflow/simulation.hpp"

namespace surgeflow::io {

struct ChartResult {
  std::vector<std::string> files;
  std::vector<std::string> warnings;  // charts skipped for lack of data
};

// Hand-written SVG, no renderer involved. Line charts use <polyline>, bar
// charts one <rect> per category.
ChartResult render_loss_chart(const forecast::TrainReport& report,
                              const std::filesystem::path& out_dir);

// relocations.svg (bar), distribution.svg (bar), cost.svg (line),
// acuity.svg (bar).
ChartResult render_metric_charts(const sim::SimulationMetrics& metrics,
                                 const std::filesystem::path& out_dir);

}  // namespace surgeflow::io
