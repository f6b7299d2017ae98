#pragma once

// Spatio-temporal response volume (rows x cols x time bins of per-voxel
// mean spiking rate), gray-level quantization and the ablation transforms.

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "tactile/neuron.hpp"

namespace tactile {

class ResponseVolume {
 public:
  ResponseVolume() = default;
  ResponseVolume(std::size_t rows, std::size_t cols, std::size_t t_bins, double bin_s,
                 std::vector<double> values, GridGeometry geometry = {}, TraceInfo info = {});

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  std::size_t t_bins() const noexcept { return t_bins_; }
  double bin_s() const noexcept { return bin_s_; }
  const GridGeometry& geometry() const noexcept { return geometry_; }
  const TraceInfo& info() const noexcept { return info_; }

  /// Layout: ((r * cols) + c) * t_bins + k.
  double at(std::size_t r, std::size_t c, std::size_t k) const noexcept {
    return values_[(r * cols_ + c) * t_bins_ + k];
  }
  std::span<const double> values() const noexcept { return values_; }
  double max_value() const noexcept;

 private:
  std::size_t rows_ = 0, cols_ = 0, t_bins_ = 0;
  double bin_s_ = 0.2;
  std::vector<double> values_;
  GridGeometry geometry_;
  TraceInfo info_;
};

/// Linear gray-level quantizer over [lo, hi] with `levels` bins; values
/// above hi clamp to the top level, below lo to level 0.
struct Quantizer {
  double lo = 0.0;
  double hi = 1.0;
  std::size_t levels = 8;

  std::size_t level(double value) const noexcept;
  double bin_width() const noexcept { return (hi - lo) / static_cast<double>(levels); }
  /// Centre of a level's bin.
  double center(std::size_t level) const noexcept;
};

class QuantizedVolume {
 public:
  QuantizedVolume() = default;
  QuantizedVolume(std::size_t rows, std::size_t cols, std::size_t depth, std::size_t num_levels,
                  std::vector<std::uint8_t> levels);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  std::size_t depth() const noexcept { return depth_; }
  std::size_t num_levels() const noexcept { return num_levels_; }
  std::size_t size() const noexcept { return levels_.size(); }

  /// Same layout as ResponseVolume.
  std::uint8_t at(std::size_t x, std::size_t y, std::size_t z) const noexcept {
    return levels_[(x * cols_ + y) * depth_ + z];
  }
  std::span<const std::uint8_t> levels() const noexcept { return levels_; }

 private:
  std::size_t rows_ = 0, cols_ = 0, depth_ = 0, num_levels_ = 0;
  std::vector<std::uint8_t> levels_;
};

inline constexpr std::size_t kMinLevels = 2;
inline constexpr std::size_t kMaxLevels = 32;

/// Voxel (r, c, k) = spikes of taxel (r, c) in [k * bin, (k + 1) * bin)
/// divided by bin_s. The trailing partial bin is discarded.
ResponseVolume build_volume(const SpikeArray& spikes, double bin_s = 0.2);

/// lo = 0, hi = largest voxel over the training volumes.
Quantizer fit_quantizer(std::span<const ResponseVolume> training, std::size_t num_levels);

QuantizedVolume quantize(const ResponseVolume& vol, const Quantizer& q);

/// Moves n distinct, uniformly chosen taxels to new grid positions by a
/// uniformly sampled derangement of those positions. Spike timing is
/// untouched; n = 0 returns the input unchanged.
SpikeArray perturb_spatial(const SpikeArray& spikes, std::size_t n, std::uint64_t seed);

/// Single-slab volume holding each taxel's time-averaged rate.
ResponseVolume collapse_time(const ResponseVolume& vol);

/// Keeps the first floor(fraction * t_bins) slabs.
ResponseVolume truncate_time(const ResponseVolume& vol, double fraction);

/// Debug export: "r,c,k,msr,level" rows.
std::string format_volume_csv(const ResponseVolume& vol, const Quantizer& q);

}  // namespace tactile
