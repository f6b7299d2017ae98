#pragma once

#include <string>
#include <vector>

namespace tactile::plot {

struct Series {
  std::string name;
  std::vector<double> values;
};

/// Grouped bar chart as a standalone SVG document.
std::string grouped_bar_svg(const std::string& title, const std::string& y_label,
                            const std::vector<std::string>& categories, const std::vector<Series>& series);

/// Renders a wide CSV table (first column = category, remaining columns =
/// numeric series) as a grouped bar chart.
std::string csv_to_svg(const std::string& title, const std::string& y_label, const std::string& csv);

}  // namespace tactile::plot
