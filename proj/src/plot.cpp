#include "tactile/plot.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "tactile/common.hpp"

namespace tactile::plot {

namespace {

constexpr const char* kPalette[] = {"#4c72b0", "#dd8452", "#55a868", "#c44e52", "#8172b3", "#937860"};

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.1f", v);
  return buf;
}

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    if (c == '<') out += "&lt;";
    else if (c == '>') out += "&gt;";
    else if (c == '&') out += "&amp;";
    else out += c;
  }
  return out;
}

}  // namespace

std::string grouped_bar_svg(const std::string& title, const std::string& y_label,
                            const std::vector<std::string>& categories, const std::vector<Series>& series) {
  const double width = 720, height = 420, left = 70, right = 160, top = 50, bottom = 60;
  const double plot_w = width - left - right, plot_h = height - top - bottom;
  double ymax = 0.0;
  for (const auto& s : series)
    for (double v : s.values) ymax = std::max(ymax, v);
  ymax = ymax <= 0.0 ? 1.0 : ymax * 1.1;

  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
      << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  svg << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  svg << "<text x=\"" << width / 2 << "\" y=\"24\" text-anchor=\"middle\" font-size=\"15\">" << escape(title)
      << "</text>\n";
  // axes and gridlines
  for (int g = 0; g <= 5; ++g) {
    const double v = ymax * g / 5.0;
    const double y = top + plot_h - plot_h * g / 5.0;
    svg << "<line x1=\"" << left << "\" y1=\"" << num(y) << "\" x2=\"" << left + plot_w << "\" y2=\"" << num(y)
        << "\" stroke=\"#ddd\"/>\n";
    svg << "<text x=\"" << left - 6 << "\" y=\"" << num(y + 4) << "\" text-anchor=\"end\">"
        << (ymax < 2.0 ? std::to_string(std::lround(v * 100) / 100.0).substr(0, 4) : num(v)) << "</text>\n";
  }
  svg << "<text transform=\"translate(18," << top + plot_h / 2 << ") rotate(-90)\" text-anchor=\"middle\">"
      << escape(y_label) << "</text>\n";

  const double group_w = categories.empty() ? plot_w : plot_w / static_cast<double>(categories.size());
  const double bar_w = series.empty() ? 0.0 : group_w * 0.8 / static_cast<double>(series.size());
  for (std::size_t c = 0; c < categories.size(); ++c) {
    const double gx = left + group_w * static_cast<double>(c) + group_w * 0.1;
    for (std::size_t s = 0; s < series.size(); ++s) {
      if (c >= series[s].values.size()) continue;
      const double v = series[s].values[c];
      const double h = plot_h * std::max(0.0, v) / ymax;
      svg << "<rect x=\"" << num(gx + bar_w * static_cast<double>(s)) << "\" y=\"" << num(top + plot_h - h)
          << "\" width=\"" << num(bar_w * 0.95) << "\" height=\"" << num(h) << "\" fill=\""
          << kPalette[s % std::size(kPalette)] << "\"/>\n";
    }
    svg << "<text x=\"" << num(gx + group_w * 0.4) << "\" y=\"" << top + plot_h + 18
        << "\" text-anchor=\"middle\">" << escape(categories[c]) << "</text>\n";
  }
  svg << "<line x1=\"" << left << "\" y1=\"" << top + plot_h << "\" x2=\"" << left + plot_w << "\" y2=\""
      << top + plot_h << "\" stroke=\"black\"/>\n";
  for (std::size_t s = 0; s < series.size(); ++s) {
    const double y = top + 10 + 20.0 * static_cast<double>(s);
    svg << "<rect x=\"" << left + plot_w + 15 << "\" y=\"" << num(y - 10) << "\" width=\"12\" height=\"12\" fill=\""
        << kPalette[s % std::size(kPalette)] << "\"/>\n";
    svg << "<text x=\"" << left + plot_w + 32 << "\" y=\"" << num(y) << "\">" << escape(series[s].name) << "</text>\n";
  }
  svg << "</svg>\n";
  return svg.str();
}

std::string csv_to_svg(const std::string& title, const std::string& y_label, const std::string& csv) {
  std::istringstream in(csv);
  std::string line;
  std::vector<std::string> header;
  std::vector<std::string> categories;
  std::vector<Series> series;
  bool first = true;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (first) {
      header = cells;
      for (std::size_t i = 1; i < header.size(); ++i) series.push_back({header[i], {}});
      first = false;
      continue;
    }
    require(cells.size() == header.size(), "plot table is ragged");
    categories.push_back(cells[0]);
    for (std::size_t i = 1; i < cells.size(); ++i) series[i - 1].values.push_back(std::stod(cells[i]));
  }
  return grouped_bar_svg(title, y_label, categories, series);
}

}  // namespace tactile::plot
