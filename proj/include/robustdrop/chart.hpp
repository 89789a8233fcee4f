#pragma once

#include <filesystem>
#include <string>

namespace robustdrop {

// Renders one CSV produced by write_csv into a self-contained SVG line
// chart. The last sweep_* column is the x axis; every other sweep column
// plus the metric name keys one series. Error bars come from the ci95
// column. Output bytes are deterministic for identical input.
std::string render_chart_svg(const std::filesystem::path& csv_path);

// render_chart_svg for every *.csv in the directory, writing .svg siblings.
// Returns the number of charts written.
int render_directory(const std::filesystem::path& dir);

}  // namespace robustdrop
