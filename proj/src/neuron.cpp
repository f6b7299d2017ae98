#include "tactile/neuron.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include "tactile/common.hpp"
#include "tactile/simd/kernels.hpp"

namespace tactile {

void NeuronParams::validate() const {
  require(a > 0.0, "neuron parameter a must be positive");
  require(v_peak > c, "spike threshold must exceed the reset potential");
  require(gain > 0.0, "neuron gain must be positive");
  require(std::isfinite(b) && std::isfinite(d), "neuron parameters must be finite");
}

void SpikeTrain::validate() const {
  require(duration_s > 0.0 && std::isfinite(duration_s), "spike train duration must be positive");
  for (std::size_t k = 0; k < times_s.size(); ++k) {
    require(times_s[k] >= 0.0 && times_s[k] < duration_s, "spike time outside [0, duration)");
    if (k > 0) require(times_s[k] > times_s[k - 1], "spike times must be strictly increasing");
  }
}

void SpikeArray::validate() const {
  geometry.validate();
  require(trains.size() == geometry.taxels(), "spike array must hold one train per taxel");
  for (const auto& t : trains) {
    t.validate();
    require(t.duration_s == trains.front().duration_s, "spike trains must share one duration");
  }
}

namespace {

simd::IzhikevichStep step_for(const NeuronParams& p, double rate) {
  return simd::IzhikevichStep{p.a, p.b, p.c, p.d, p.v_peak, p.gain, 1000.0 / rate};
}

std::vector<SpikeTrain> run_lanes(std::span<const double> interleaved, std::size_t lanes,
                                  std::size_t samples, double rate, const NeuronParams& params) {
  params.validate();
  require(rate > 0.0, "sample rate must be positive");
  require(samples >= 1, "cannot encode an empty channel");
  std::vector<double> v(lanes, params.c);
  std::vector<double> u(lanes, params.b * params.c);
  std::vector<std::vector<std::uint32_t>> fired(lanes);
  const std::size_t fault = simd::izhikevich_run(step_for(params, rate), interleaved, lanes, v, u, fired);
  if (fault != simd::kNoFault)
    fail("numeric_error", "neuron state became non-finite at t = " +
                              std::to_string(static_cast<double>(fault) / rate) + " s");

  const double duration = static_cast<double>(samples) / rate;
  std::vector<SpikeTrain> trains(lanes);
  for (std::size_t l = 0; l < lanes; ++l) {
    trains[l].duration_s = duration;
    trains[l].times_s.reserve(fired[l].size());
    for (auto n : fired[l]) trains[l].times_s.push_back(static_cast<double>(n) / rate);
  }
  return trains;
}

}  // namespace

SpikeTrain encode(std::span<const double> channel, double sample_rate_hz, const NeuronParams& params) {
  for (double x : channel) require(std::isfinite(x), "channel contains a non-finite sample");
  return std::move(run_lanes(channel, 1, channel.size(), sample_rate_hz, params).front());
}

SpikeArray encode_array(const SensorTrace& trace, const NeuronParams& params) {
  const std::size_t taxels = trace.num_taxels();
  const std::size_t samples = trace.num_samples();
  const auto src = trace.data();
  std::vector<double> interleaved(taxels * samples);
  for (std::size_t n = 0; n < samples; ++n)
    for (std::size_t t = 0; t < taxels; ++t) interleaved[n * taxels + t] = src[t * samples + n];

  SpikeArray out;
  out.trains = run_lanes(interleaved, taxels, samples, trace.sample_rate_hz(), params);
  out.geometry = trace.geometry();
  out.info = trace.info();
  out.info.phases.reset();
  return out;
}

IsiHistogram isi_histogram(std::span<const SpikeTrain> trains, double bin_width_s, double max_isi_s) {
  require(bin_width_s > 0.0, "ISI bin width must be positive");
  require(max_isi_s > bin_width_s, "ISI range must exceed one bin");
  IsiHistogram h;
  h.bin_width_s = bin_width_s;
  h.counts.assign(whole_bins(max_isi_s, bin_width_s), 0);
  double sum = 0.0;
  for (const auto& train : trains) {
    for (std::size_t k = 1; k < train.times_s.size(); ++k) {
      const double isi = train.times_s[k] - train.times_s[k - 1];
      sum += isi;
      ++h.intervals;
      const std::size_t bin = bin_index(isi, bin_width_s);
      if (bin < h.counts.size())
        ++h.counts[bin];
      else
        ++h.overflow;
    }
  }
  h.empty = h.intervals == 0;
  h.normalized.assign(h.counts.size(), 0.0);
  if (!h.empty) {
    h.mean_isi_s = sum / static_cast<double>(h.intervals);
    for (std::size_t i = 0; i < h.counts.size(); ++i)
      h.normalized[i] = static_cast<double>(h.counts[i]) / static_cast<double>(h.intervals);
  }
  return h;
}

GainSweep isi_histogram_sweep(std::span<const SensorTrace> traces, std::span<const double> gains,
                              const NeuronParams& params, double bin_width_s, double max_isi_s) {
  require(!gains.empty(), "gain sweep needs at least one gain");
  require(!traces.empty(), "gain sweep needs at least one trace");
  GainSweep sweep;
  sweep.gains.assign(gains.begin(), gains.end());
  for (const auto& tr : traces)
    if (std::find(sweep.labels.begin(), sweep.labels.end(), tr.info().label) == sweep.labels.end())
      sweep.labels.push_back(tr.info().label);
  std::sort(sweep.labels.begin(), sweep.labels.end());

  for (double g : gains) {
    NeuronParams p = params;
    p.gain = g;
    std::map<std::string, std::vector<SpikeTrain>> pooled;
    for (const auto& tr : traces) {
      auto arr = encode_array(tr, p);
      auto& dst = pooled[tr.info().label];
      for (auto& t : arr.trains) dst.push_back(std::move(t));
    }
    for (const auto& label : sweep.labels) {
      auto h = isi_histogram(pooled[label], bin_width_s, max_isi_s);
      h.label = label;
      h.gain = g;
      sweep.histograms.push_back(std::move(h));
    }
  }
  return sweep;
}

// ---------------------------------------------------------------------------
// Spike CSV

namespace {

std::string shortest(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

[[noreturn]] void spike_parse_error(std::size_t line, const std::string& what) {
  fail("parse_error", "line " + std::to_string(line) + ": " + what);
}

template <typename T>
T parse_cell(std::string_view s, std::size_t line) {
  while (!s.empty() && (s.back() == '\r' || s.back() == ' ')) s.remove_suffix(1);
  while (!s.empty() && s.front() == ' ') s.remove_prefix(1);
  T v{};
  auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || res.ec != std::errc() || res.ptr != s.data() + s.size())
    spike_parse_error(line, "non-numeric cell '" + std::string(s) + "'");
  return v;
}

}  // namespace

std::string format_spikes(const SpikeArray& spikes) {
  const auto& g = spikes.geometry;
  std::string out = "# rows=" + std::to_string(g.rows) + " cols=" + std::to_string(g.cols) +
                    " pitch_mm=" + shortest(g.pitch_mm) + " duration_s=" + shortest(spikes.duration_s()) +
                    " label=" + (spikes.info.label.empty() ? std::string("unlabeled") : spikes.info.label) +
                    " velocity_mm_s=" + shortest(spikes.info.velocity_mm_s) +
                    " trial=" + std::to_string(spikes.info.trial);
  if (spikes.info.synthetic) out += " source=synthetic";
  out += "\ntaxel_id,spike_time_s\n";
  for (std::size_t t = 0; t < spikes.trains.size(); ++t)
    for (double time : spikes.trains[t].times_s) out += std::to_string(t) + "," + shortest(time) + "\n";
  return out;
}

SpikeArray parse_spikes(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  SpikeArray out;
  double duration = -1.0;
  bool header_seen = false;
  std::vector<std::pair<std::size_t, double>> events;

  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line[0] == '#') {
      std::istringstream tokens(line.substr(1));
      std::string tok;
      while (tokens >> tok) {
        const auto eq = tok.find('=');
        if (eq == std::string::npos) spike_parse_error(line_no, "malformed header token '" + tok + "'");
        const std::string key = tok.substr(0, eq), value = tok.substr(eq + 1);
        if (key == "rows") out.geometry.rows = parse_cell<std::size_t>(value, line_no);
        else if (key == "cols") out.geometry.cols = parse_cell<std::size_t>(value, line_no);
        else if (key == "pitch_mm") out.geometry.pitch_mm = parse_cell<double>(value, line_no);
        else if (key == "duration_s") duration = parse_cell<double>(value, line_no);
        else if (key == "label") out.info.label = value;
        else if (key == "velocity_mm_s") out.info.velocity_mm_s = parse_cell<double>(value, line_no);
        else if (key == "trial") out.info.trial = parse_cell<int>(value, line_no);
        else if (key == "source") out.info.synthetic = value == "synthetic";
      }
      continue;
    }
    if (!header_seen) {
      if (line != "taxel_id,spike_time_s") spike_parse_error(line_no, "expected header 'taxel_id,spike_time_s'");
      header_seen = true;
      continue;
    }
    const auto comma = line.find(',');
    if (comma == std::string::npos || line.find(',', comma + 1) != std::string::npos)
      spike_parse_error(line_no, "ragged row: expected 2 cells");
    events.emplace_back(parse_cell<std::size_t>(std::string_view(line).substr(0, comma), line_no),
                        parse_cell<double>(std::string_view(line).substr(comma + 1), line_no));
  }
  if (duration <= 0.0) spike_parse_error(line_no, "malformed header: duration_s is required");
  if (!header_seen) spike_parse_error(line_no, "missing column header row");
  out.geometry.validate();
  out.trains.assign(out.geometry.taxels(), SpikeTrain{{}, duration});
  for (auto [taxel, time] : events) {
    if (taxel >= out.trains.size()) fail("parse_error", "taxel id " + std::to_string(taxel) + " out of range");
    out.trains[taxel].times_s.push_back(time);
  }
  for (auto& t : out.trains) std::sort(t.times_s.begin(), t.times_s.end());
  out.validate();
  return out;
}

void save_spikes(const SpikeArray& spikes, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail("io_error", "cannot write spike file " + path.string());
  out << format_spikes(spikes);
}

SpikeArray load_spikes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail("io_error", "cannot open spike file " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  try {
    return parse_spikes(buf.str());
  } catch (const Error& e) {
    throw Error(e.kind(), path.string() + ": " + e.what());
  }
}

}  // namespace tactile
