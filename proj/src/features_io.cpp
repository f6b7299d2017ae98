#include "tactile/features_io.hpp"

#include <charconv>
#include <sstream>

#include "tactile/common.hpp"

namespace tactile {

namespace {

std::string num(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

double cell_double(const std::string& s, std::size_t line) {
  double v = 0.0;
  auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || res.ec != std::errc() || res.ptr != s.data() + s.size())
    fail("parse_error", "line " + std::to_string(line) + ": non-numeric cell '" + s + "'");
  return v;
}

}  // namespace

std::string taxel_feature_row(const SpikeArray& spikes, const SingleTaxelFeatures& f) {
  return spikes.info.label + "," + num(spikes.info.velocity_mm_s) + "," + std::to_string(spikes.info.trial) + "," +
         std::to_string(f.taxel_index) + "," + num(f.msr_hz) + "," + num(f.cv.value) + "," + num(f.fano.value) + "," +
         std::to_string(f.defined_flags());
}

std::string glcm_feature_row(const SpikeArray& spikes, GlcmMode mode, const HaralickFeatures& f) {
  return spikes.info.label + "," + num(spikes.info.velocity_mm_s) + "," + std::to_string(spikes.info.trial) + "," +
         to_string(mode) + "," + num(f.contrast) + "," + num(f.correlation) + "," + num(f.asm_);
}

Dataset parse_feature_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  Dataset d;
  bool taxel_layout = false;
  bool header = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    if (!header) {
      if (line == kTaxelFeatureHeader) {
        taxel_layout = true;
        d.feature_names = {"msr", "cv_isi", "fano"};
      } else if (line == kGlcmFeatureHeader) {
        d.feature_names = {"contrast", "correlation", "asm"};
      } else {
        fail("parse_error", "line " + std::to_string(line_no) + ": unrecognized feature CSV header");
      }
      header = true;
      continue;
    }
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    const std::size_t expected = taxel_layout ? 8 : 7;
    if (cells.size() != expected)
      fail("parse_error", "line " + std::to_string(line_no) + ": ragged row, expected " + std::to_string(expected) +
                              " cells");
    Sample s;
    s.label = cells[0];
    s.velocity = cell_double(cells[1], line_no);
    s.trial = static_cast<int>(cell_double(cells[2], line_no));
    for (std::size_t j = 4; j < 7; ++j) s.features.push_back(cell_double(cells[j], line_no));
    d.rows.push_back(std::move(s));
  }
  if (!header) fail("parse_error", "feature CSV is empty");
  d.validate();
  return d;
}

}  // namespace tactile
