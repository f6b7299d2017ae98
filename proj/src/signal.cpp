#include "tactile/signal.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

#include "tactile/common.hpp"
#include "tactile/simd/kernels.hpp"

namespace tactile {

namespace {

// Roughness profile wraps after this many millimetres of surface.
constexpr double kProfileLengthMm = 400.0;
constexpr int kValuePrecision = 6;

void append_fixed(std::string& out, double value, int precision) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, value, std::chars_format::fixed, precision);
  out.append(buf, res.ptr);
}

std::string format_number(double value) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, value);
  return std::string(buf, res.ptr);
}

[[noreturn]] void parse_error(std::size_t line, const std::string& what) {
  fail("parse_error", "line " + std::to_string(line) + ": " + what);
}

double parse_double(std::string_view s, std::size_t line) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  double v = 0.0;
  auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || res.ec != std::errc() || res.ptr != s.data() + s.size())
    parse_error(line, "non-numeric cell '" + std::string(s) + "'");
  if (!std::isfinite(v)) parse_error(line, "non-finite value '" + std::string(s) + "'");
  return v;
}

long long parse_integer(std::string_view s, std::size_t line, const std::string& key) {
  long long v = 0;
  auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || res.ec != std::errc() || res.ptr != s.data() + s.size())
    parse_error(line, "malformed header: " + key + " expects an integer, got '" + std::string(s) + "'");
  return v;
}

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> parts;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = s.find(sep, start);
    if (pos == std::string_view::npos) {
      parts.push_back(s.substr(start));
      break;
    }
    parts.push_back(s.substr(start, pos - start));
    start = pos + 1;
  }
  return parts;
}

std::string taxel_column(std::size_t r, std::size_t c) {
  return "tx" + std::to_string(r) + std::to_string(c);
}

}  // namespace

// ---------------------------------------------------------------------------
// GridGeometry / SensorTrace

void GridGeometry::validate() const {
  require(rows >= 1 && cols >= 1, "grid must have at least one row and one column");
  require(pitch_mm > 0.0 && std::isfinite(pitch_mm), "grid pitch must be positive");
  require(taxel_area_mm2 > 0.0, "taxel area must be positive");
}

GridGeometry GridGeometry::from_active_area(std::size_t rows, std::size_t cols,
                                            double active_area_mm2, double taxel_area_mm2) {
  require(active_area_mm2 > 0.0, "active area must be positive");
  GridGeometry g{rows, cols, std::sqrt(active_area_mm2) / static_cast<double>(cols), taxel_area_mm2};
  g.validate();
  return g;
}

SensorTrace::SensorTrace(GridGeometry geometry, double sample_rate_hz, std::size_t num_samples,
                         std::vector<double> channel_major, TraceInfo info)
    : geometry_(geometry),
      rate_(sample_rate_hz),
      samples_(num_samples),
      values_(std::move(channel_major)),
      info_(std::move(info)) {
  geometry_.validate();
  require(rate_ > 0.0 && std::isfinite(rate_), "sample rate must be positive");
  require(samples_ >= 1, "trace must contain at least one sample");
  require(values_.size() == geometry_.taxels() * samples_,
          "channel data size does not match taxels x samples");
  for (double v : values_) require(std::isfinite(v), "trace contains a non-finite sample");
}

std::span<const double> SensorTrace::channel(std::size_t taxel) const {
  require(taxel < num_taxels(), "taxel index out of range");
  return std::span<const double>(values_).subspan(taxel * samples_, samples_);
}

SensorTrace sliding_phase(const SensorTrace& trace) {
  const auto& phases = trace.info().phases;
  if (!phases) return trace;
  const std::size_t begin = phases->slide;
  const std::size_t end = std::min(phases->retract, trace.num_samples());
  require(begin < end, "sliding phase is empty");
  const std::size_t n = end - begin;
  std::vector<double> values(trace.num_taxels() * n);
  for (std::size_t t = 0; t < trace.num_taxels(); ++t) {
    auto ch = trace.channel(t);
    std::copy(ch.begin() + static_cast<std::ptrdiff_t>(begin),
              ch.begin() + static_cast<std::ptrdiff_t>(end), values.begin() + static_cast<std::ptrdiff_t>(t * n));
  }
  TraceInfo info = trace.info();
  info.phases.reset();
  return SensorTrace(trace.geometry(), trace.sample_rate_hz(), n, std::move(values), std::move(info));
}

// ---------------------------------------------------------------------------
// Trace CSV

std::string format_trace(const SensorTrace& trace) {
  const auto& g = trace.geometry();
  const auto& info = trace.info();
  std::string out;
  out += "# rows=" + std::to_string(g.rows) + " cols=" + std::to_string(g.cols) +
         " pitch_mm=" + format_number(g.pitch_mm) + " rate_hz=" + format_number(trace.sample_rate_hz()) +
         " label=" + (info.label.empty() ? std::string("unlabeled") : info.label) +
         " velocity_mm_s=" + format_number(info.velocity_mm_s) + " trial=" + std::to_string(info.trial);
  if (g.taxel_area_mm2 != 4.0) out += " taxel_area_mm2=" + format_number(g.taxel_area_mm2);
  if (info.synthetic) out += " source=synthetic";
  if (info.phases) {
    const auto& p = *info.phases;
    out += " phases=" + std::to_string(p.contact) + ":" + std::to_string(p.hold) + ":" +
           std::to_string(p.slide) + ":" + std::to_string(p.retract);
  }
  out += "\nt_ms";
  for (std::size_t r = 0; r < g.rows; ++r)
    for (std::size_t c = 0; c < g.cols; ++c) out += "," + taxel_column(r, c);
  out += '\n';

  const std::size_t taxels = trace.num_taxels();
  const auto data = trace.data();
  for (std::size_t n = 0; n < trace.num_samples(); ++n) {
    append_fixed(out, static_cast<double>(n) * 1000.0 / trace.sample_rate_hz(), 3);
    for (std::size_t t = 0; t < taxels; ++t) {
      out += ',';
      append_fixed(out, data[t * trace.num_samples() + n], kValuePrecision);
    }
    out += '\n';
  }
  return out;
}

SensorTrace parse_trace(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;

  GridGeometry geometry;
  double rate = 0.0;
  TraceInfo info;
  bool have_rows = false, have_cols = false, have_rate = false;

  // metadata block
  std::string header_row;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line[0] != '#') {
      header_row = line;
      break;
    }
    std::istringstream tokens(line.substr(1));
    std::string tok;
    while (tokens >> tok) {
      const auto eq = tok.find('=');
      if (eq == std::string::npos || eq == 0) parse_error(line_no, "malformed header token '" + tok + "'");
      const std::string key = tok.substr(0, eq);
      const std::string value = tok.substr(eq + 1);
      if (key == "rows") {
        const long long v = parse_integer(value, line_no, key);
        if (v < 1) parse_error(line_no, "malformed header: rows must be >= 1");
        geometry.rows = static_cast<std::size_t>(v);
        have_rows = true;
      } else if (key == "cols") {
        const long long v = parse_integer(value, line_no, key);
        if (v < 1) parse_error(line_no, "malformed header: cols must be >= 1");
        geometry.cols = static_cast<std::size_t>(v);
        have_cols = true;
      } else if (key == "pitch_mm") {
        geometry.pitch_mm = parse_double(value, line_no);
      } else if (key == "taxel_area_mm2") {
        geometry.taxel_area_mm2 = parse_double(value, line_no);
      } else if (key == "rate_hz") {
        rate = parse_double(value, line_no);
        have_rate = true;
      } else if (key == "label") {
        info.label = value;
      } else if (key == "velocity_mm_s") {
        info.velocity_mm_s = parse_double(value, line_no);
      } else if (key == "trial") {
        info.trial = static_cast<int>(parse_integer(value, line_no, key));
      } else if (key == "source") {
        info.synthetic = value == "synthetic";
      } else if (key == "phases") {
        auto parts = split(value, ':');
        if (parts.size() != 4) parse_error(line_no, "malformed header: phases expects 4 indices");
        PhaseMarkers p;
        p.contact = static_cast<std::size_t>(parse_integer(parts[0], line_no, key));
        p.hold = static_cast<std::size_t>(parse_integer(parts[1], line_no, key));
        p.slide = static_cast<std::size_t>(parse_integer(parts[2], line_no, key));
        p.retract = static_cast<std::size_t>(parse_integer(parts[3], line_no, key));
        info.phases = p;
      }
      // unknown keys are ignored
    }
  }
  if (!have_rows || !have_cols || !have_rate)
    parse_error(line_no, "malformed header: rows, cols and rate_hz are required");
  if (rate <= 0.0) parse_error(line_no, "malformed header: rate_hz must be positive");
  if (header_row.empty()) parse_error(line_no, "missing column header row");

  const std::size_t taxels = geometry.taxels();
  const std::size_t header_line = line_no;
  auto columns = split(header_row, ',');
  if (columns.empty() || columns[0] != "t_ms")
    parse_error(header_line, "malformed header: first column must be t_ms");
  if (columns.size() - 1 != taxels)
    parse_error(header_line, "channel count mismatch: expected " + std::to_string(taxels) +
                                 " taxel columns, found " + std::to_string(columns.size() - 1));

  std::vector<std::vector<double>> channels(taxels);
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto cells = split(line, ',');
    if (cells.size() != taxels + 1)
      parse_error(line_no, "ragged row: expected " + std::to_string(taxels + 1) + " cells, found " +
                               std::to_string(cells.size()));
    parse_double(cells[0], line_no);
    for (std::size_t t = 0; t < taxels; ++t) channels[t].push_back(parse_double(cells[t + 1], line_no));
  }
  const std::size_t samples = channels.empty() ? 0 : channels[0].size();
  if (samples == 0) parse_error(line_no, "trace has no samples");

  std::vector<double> values;
  values.reserve(taxels * samples);
  for (auto& ch : channels) values.insert(values.end(), ch.begin(), ch.end());
  return SensorTrace(geometry, rate, samples, std::move(values), std::move(info));
}

SensorTrace load_trace(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail("io_error", "cannot open trace file " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  try {
    return parse_trace(buf.str());
  } catch (const Error& e) {
    throw Error(e.kind(), path.string() + ": " + e.what());
  }
}

void save_trace(const SensorTrace& trace, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail("io_error", "cannot write trace file " + path.string());
  out << format_trace(trace);
}

// ---------------------------------------------------------------------------
// Synthetic generator

void TextureParams::validate() const {
  require(spatial_period_mm > 0.0, "texture '" + label + "': spatial period must be positive");
  require(amplitude > 0.0 && amplitude <= 1.0, "texture '" + label + "': amplitude must lie in (0, 1]");
  require(roughness_noise_sd >= 0.0, "texture '" + label + "': roughness sd must be non-negative");
  require(roughness_scale_mm > 0.0, "texture '" + label + "': roughness scale must be positive");
  require(baseline + amplitude <= 1.0 + 1e-12, "texture '" + label + "': baseline + amplitude exceeds 1");
  require(!harmonic_weights.empty(), "texture '" + label + "': at least one harmonic weight required");
}

SurfaceProfile::SurfaceProfile(const TextureParams& texture) : texture_(texture) {
  texture_.validate();
  Rng rng(texture_.profile_seed);
  phases_.resize(texture_.harmonic_weights.size());
  for (auto& ph : phases_) ph = 2.0 * std::numbers::pi * rng.uniform();
  weight_norm_ = 0.0;
  for (double w : texture_.harmonic_weights) weight_norm_ += std::abs(w);
  if (weight_norm_ <= 0.0) weight_norm_ = 1.0;

  const auto cells = static_cast<std::size_t>(std::ceil(kProfileLengthMm / texture_.roughness_scale_mm));
  length_mm_ = static_cast<double>(cells) * texture_.roughness_scale_mm;
  roughness_.resize(cells);
  for (auto& r : roughness_) r = texture_.roughness_noise_sd * rng.normal();
}

double SurfaceProfile::operator()(double x_mm) const noexcept {
  double periodic = 0.0;
  const double k0 = 2.0 * std::numbers::pi / texture_.spatial_period_mm;
  for (std::size_t h = 0; h < phases_.size(); ++h)
    periodic += texture_.harmonic_weights[h] * std::sin(k0 * static_cast<double>(h + 1) * x_mm + phases_[h]);
  periodic /= weight_norm_;

  double rough = 0.0;
  if (texture_.roughness_noise_sd > 0.0) {
    double pos = std::fmod(x_mm, length_mm_);
    if (pos < 0.0) pos += length_mm_;
    const double cell = pos / texture_.roughness_scale_mm;
    const auto i0 = static_cast<std::size_t>(cell) % roughness_.size();
    const std::size_t i1 = (i0 + 1) % roughness_.size();
    const double frac = cell - std::floor(cell);
    rough = roughness_[i0] + frac * (roughness_[i1] - roughness_[i0]);
  }
  return texture_.baseline + texture_.amplitude * (0.5 + 0.5 * periodic) + rough;
}

SensorTrace generate_trace(const TextureParams& texture, const GridGeometry& geometry,
                           const GeneratorSettings& s) {
  geometry.validate();
  require(s.velocity_mm_s > 0.0, "velocity must be positive");
  require(s.slide_distance_mm > 0.0, "slide distance must be positive");
  require(s.sample_rate_hz > 0.0, "sample rate must be positive");
  require(s.noise_sd >= 0.0, "noise sd must be non-negative");

  const SurfaceProfile profile(texture);
  const double duration = s.slide_distance_mm / s.velocity_mm_s;
  const auto samples = static_cast<std::size_t>(std::llround(duration * s.sample_rate_hz));
  require(samples >= 1, "slide is shorter than one sample");

  Rng rng(s.seed);
  const double x0 = s.random_start ? rng.uniform() * profile.length_mm() : 0.0;

  const std::size_t taxels = geometry.taxels();
  std::vector<double> values(taxels * samples);
  // Rows share a column's position along the sliding axis.
  std::vector<double> column(samples);
  for (std::size_t c = 0; c < geometry.cols; ++c) {
    const double offset = x0 - static_cast<double>(c) * geometry.pitch_mm;
    for (std::size_t n = 0; n < samples; ++n) {
      const double t = static_cast<double>(n) / s.sample_rate_hz;
      column[n] = profile(offset + s.velocity_mm_s * t);
    }
    for (std::size_t r = 0; r < geometry.rows; ++r)
      std::copy(column.begin(), column.end(), values.begin() + static_cast<std::ptrdiff_t>((r * geometry.cols + c) * samples));
  }
  // Measurement noise is drawn in channel order after the start position.
  if (s.noise_sd > 0.0)
    for (auto& v : values) v += s.noise_sd * rng.normal();
  for (auto& v : values) v = std::clamp(v, 0.0, 1.0);

  TraceInfo info;
  info.label = texture.label;
  info.velocity_mm_s = s.velocity_mm_s;
  info.trial = s.trial;
  info.synthetic = true;
  return SensorTrace(geometry, s.sample_rate_hz, samples, std::move(values), std::move(info));
}

// ---------------------------------------------------------------------------
// Preprocessing

double lowpass_alpha(double cutoff_hz, double sample_rate_hz) {
  return 1.0 - std::exp(-2.0 * std::numbers::pi * cutoff_hz / sample_rate_hz);
}

SensorTrace preprocess(const SensorTrace& trace, double cutoff_hz) {
  const double rate = trace.sample_rate_hz();
  require(cutoff_hz > 0.0 && cutoff_hz < rate / 2.0, "cutoff must lie in (0, sample_rate / 2)");

  const std::size_t taxels = trace.num_taxels();
  const std::size_t samples = trace.num_samples();
  const auto src = trace.data();

  std::vector<double> interleaved(taxels * samples);
  for (std::size_t n = 0; n < samples; ++n)
    for (std::size_t t = 0; t < taxels; ++t) interleaved[n * taxels + t] = src[t * samples + n];

  simd::lowpass_inplace(interleaved, taxels, lowpass_alpha(cutoff_hz, rate));

  const double peak = *std::max_element(interleaved.begin(), interleaved.end());
  if (!(peak > 0.0)) fail("degenerate_input", "global maximum is not positive; cannot normalize trace");

  std::vector<double> out(taxels * samples);
  const double* in = interleaved.data();
  for (std::size_t n = 0; n < samples; ++n, in += taxels)
    for (std::size_t t = 0; t < taxels; ++t) out[t * samples + n] = in[t] / peak;
  return SensorTrace(trace.geometry(), rate, samples, std::move(out), trace.info());
}

}  // namespace tactile
