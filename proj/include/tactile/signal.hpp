#pragma once

// Analog trace model, trace CSV I/O, the synthetic sliding-contact
// generator and preprocessing (low-pass + global normalization).

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace tactile {

struct GridGeometry {
  std::size_t rows = 4;
  std::size_t cols = 4;
  double pitch_mm = 3.25;
  double taxel_area_mm2 = 4.0;

  std::size_t taxels() const noexcept { return rows * cols; }
  void validate() const;

  /// Square grid of rows x cols spread uniformly over `active_area_mm2`;
  /// pitch = sqrt(active_area) / cols.
  static GridGeometry from_active_area(std::size_t rows, std::size_t cols,
                                       double active_area_mm2, double taxel_area_mm2);

  bool operator==(const GridGeometry&) const = default;
};

/// Sample indices bounding the four protocol phases (contact, hold, slide,
/// retract). Only [slide, retract) is consumed by the pipeline.
struct PhaseMarkers {
  std::size_t contact = 0;
  std::size_t hold = 0;
  std::size_t slide = 0;
  std::size_t retract = 0;
};

struct TraceInfo {
  std::string label;
  double velocity_mm_s = 0.0;
  int trial = 0;
  bool synthetic = false;
  std::optional<PhaseMarkers> phases;
};

/// Multi-channel analog recording; channels are ordered row-major by grid
/// position and stored channel-major.
class SensorTrace {
 public:
  SensorTrace() = default;
  SensorTrace(GridGeometry geometry, double sample_rate_hz, std::size_t num_samples,
              std::vector<double> channel_major, TraceInfo info);

  const GridGeometry& geometry() const noexcept { return geometry_; }
  double sample_rate_hz() const noexcept { return rate_; }
  std::size_t num_taxels() const noexcept { return geometry_.taxels(); }
  std::size_t num_samples() const noexcept { return samples_; }
  double duration_s() const noexcept { return static_cast<double>(samples_) / rate_; }
  const TraceInfo& info() const noexcept { return info_; }

  std::span<const double> channel(std::size_t taxel) const;
  std::span<const double> data() const noexcept { return values_; }

 private:
  GridGeometry geometry_;
  double rate_ = 1000.0;
  std::size_t samples_ = 0;
  std::vector<double> values_;
  TraceInfo info_;
};

/// Restricts a trace to its sliding phase if phase markers are present.
SensorTrace sliding_phase(const SensorTrace& trace);

SensorTrace load_trace(const std::filesystem::path& path);
void save_trace(const SensorTrace& trace, const std::filesystem::path& path);
std::string format_trace(const SensorTrace& trace);
SensorTrace parse_trace(const std::string& text);

struct TextureParams {
  std::string label;
  double spatial_period_mm = 3.25;
  double amplitude = 0.5;
  std::vector<double> harmonic_weights{1.0};
  double roughness_noise_sd = 0.0;
  /// Spatial grid spacing of the frozen roughness profile.
  double roughness_scale_mm = 0.5;
  double baseline = 0.0;
  std::uint64_t profile_seed = 0;

  void validate() const;
};

struct GeneratorSettings {
  double velocity_mm_s = 5.0;
  double slide_distance_mm = 90.0;
  double sample_rate_hz = 1000.0;
  double noise_sd = 0.0;
  std::uint64_t seed = 0;
  int trial = 0;
  /// Draw the starting position along the surface from `seed`. Disabled,
  /// the slide starts at x = 0.
  bool random_start = true;
};

/// 1-D surface height profile built from a TextureParams: normalized
/// harmonic series of the spatial period plus a frozen roughness profile,
/// mapped into [baseline, baseline + amplitude] before roughness.
class SurfaceProfile {
 public:
  explicit SurfaceProfile(const TextureParams& texture);

  double operator()(double x_mm) const noexcept;
  double length_mm() const noexcept { return length_mm_; }

 private:
  TextureParams texture_;
  std::vector<double> phases_;
  std::vector<double> roughness_;
  double weight_norm_ = 1.0;
  double length_mm_ = 0.0;
};

/// Synthesizes the sliding phase. Taxel (r, c) samples the profile at
/// x = x0 + velocity * t - c * pitch, so column c + 1 is column c delayed by
/// pitch / velocity. Additive measurement noise, output clipped to [0, 1].
SensorTrace generate_trace(const TextureParams& texture, const GridGeometry& geometry,
                           const GeneratorSettings& settings);

/// First-order low-pass coefficient whose discrete step response equals the
/// continuous one, 1 - exp(-2 pi f_c t), at every sample.
double lowpass_alpha(double cutoff_hz, double sample_rate_hz);

/// Low-pass every channel, then divide all channels by the single global
/// maximum.
SensorTrace preprocess(const SensorTrace& trace, double cutoff_hz = 50.0);

}  // namespace tactile
