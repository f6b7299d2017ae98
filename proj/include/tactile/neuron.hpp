#pragma once

// Izhikevich regular-spiking encoder: preprocessed analog channels in,
// spike trains out.

#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "tactile/signal.hpp"

namespace tactile {

struct NeuronParams {
  double a = 0.02;
  double b = 0.2;
  double c = -65.0;
  double d = 8.0;
  double v_peak = 30.0;
  double gain = 8.0;

  void validate() const;
};

struct SpikeTrain {
  std::vector<double> times_s;
  double duration_s = 0.0;

  std::size_t size() const noexcept { return times_s.size(); }
  /// Checks ordering and range invariants.
  void validate() const;
};

struct SpikeArray {
  std::vector<SpikeTrain> trains;  ///< one per taxel, row-major
  GridGeometry geometry;
  TraceInfo info;

  double duration_s() const noexcept { return trains.empty() ? 0.0 : trains.front().duration_s; }
  const SpikeTrain& at(std::size_t row, std::size_t col) const { return trains.at(row * geometry.cols + col); }
  void validate() const;
};

/// Encodes one channel. Input current is gain * sample (zero-order hold);
/// v takes two half steps of dt / 2 per sample, u one full step driven by
/// min(v, v_peak); a spike is recorded at the sample time when v >= v_peak, followed by the reset
/// v <- c, u <- u + d. Initial state v = c, u = b * c.
SpikeTrain encode(std::span<const double> channel, double sample_rate_hz, const NeuronParams& params);

/// Encodes every channel of a trace independently. Identical, bit for bit,
/// to calling encode() on each channel.
SpikeArray encode_array(const SensorTrace& trace, const NeuronParams& params);

struct IsiHistogram {
  std::string label;
  double gain = 0.0;
  double bin_width_s = 0.0;
  std::vector<std::size_t> counts;  ///< bin i covers [i * w, (i + 1) * w)
  std::vector<double> normalized;
  std::size_t overflow = 0;  ///< intervals beyond the last bin
  std::size_t intervals = 0;
  double mean_isi_s = 0.0;
  /// Fewer than two spikes in every pooled train: no intervals to bin.
  bool empty = true;
};

/// Pools inter-spike intervals (all taxels, all trials) per label and bins
/// them with `bin_width_s` over [0, max_isi_s).
IsiHistogram isi_histogram(std::span<const SpikeTrain> trains, double bin_width_s, double max_isi_s);

struct GainSweep {
  std::vector<double> gains;
  std::vector<std::string> labels;
  /// histograms[g * labels.size() + l]
  std::vector<IsiHistogram> histograms;
};

GainSweep isi_histogram_sweep(std::span<const SensorTrace> traces, std::span<const double> gains,
                              const NeuronParams& params, double bin_width_s, double max_isi_s = 1.0);

// Spike CSV: "# rows=.. cols=.. pitch_mm=.. duration_s=.. label=.. velocity_mm_s=.. trial=.."
// followed by "taxel_id,spike_time_s" rows.
std::string format_spikes(const SpikeArray& spikes);
SpikeArray parse_spikes(const std::string& text);
void save_spikes(const SpikeArray& spikes, const std::filesystem::path& path);
SpikeArray load_spikes(const std::filesystem::path& path);

}  // namespace tactile
