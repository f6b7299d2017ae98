#include "tactile/volume.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <numeric>

#include "tactile/common.hpp"

namespace tactile {

ResponseVolume::ResponseVolume(std::size_t rows, std::size_t cols, std::size_t t_bins, double bin_s,
                               std::vector<double> values, GridGeometry geometry, TraceInfo info)
    : rows_(rows),
      cols_(cols),
      t_bins_(t_bins),
      bin_s_(bin_s),
      values_(std::move(values)),
      geometry_(geometry),
      info_(std::move(info)) {
  require(rows_ >= 1 && cols_ >= 1 && t_bins_ >= 1, "volume dimensions must be positive");
  require(bin_s_ > 0.0, "voxel depth must be positive");
  require(values_.size() == rows_ * cols_ * t_bins_, "volume data size mismatch");
  for (double v : values_) require(v >= 0.0 && std::isfinite(v), "voxel values must be finite and >= 0");
}

double ResponseVolume::max_value() const noexcept {
  return values_.empty() ? 0.0 : *std::max_element(values_.begin(), values_.end());
}

std::size_t Quantizer::level(double value) const noexcept {
  const double scaled = (value - lo) * static_cast<double>(levels) / (hi - lo);
  if (!(scaled > 0.0)) return 0;
  const double top = static_cast<double>(levels - 1);
  return static_cast<std::size_t>(std::min(std::floor(scaled), top));
}

double Quantizer::center(std::size_t level) const noexcept {
  return lo + (static_cast<double>(level) + 0.5) * bin_width();
}

QuantizedVolume::QuantizedVolume(std::size_t rows, std::size_t cols, std::size_t depth,
                                 std::size_t num_levels, std::vector<std::uint8_t> levels)
    : rows_(rows), cols_(cols), depth_(depth), num_levels_(num_levels), levels_(std::move(levels)) {
  require(rows_ >= 1 && cols_ >= 1 && depth_ >= 1, "volume dimensions must be positive");
  require(num_levels_ >= kMinLevels && num_levels_ <= 256, "gray-level count out of range");
  require(levels_.size() == rows_ * cols_ * depth_, "quantized volume size mismatch");
  for (auto l : levels_) require(l < num_levels_, "gray level out of range");
}

ResponseVolume build_volume(const SpikeArray& spikes, double bin_s) {
  require(bin_s > 0.0, "voxel depth must be positive");
  spikes.geometry.validate();
  require(spikes.trains.size() == spikes.geometry.taxels(), "spike array must hold one train per taxel");
  const double duration = spikes.duration_s();
  const std::size_t t_bins = whole_bins(duration, bin_s);
  if (t_bins < 1) fail("invalid_argument", "spike train duration is shorter than one voxel");

  const std::size_t taxels = spikes.trains.size();
  std::vector<double> values(taxels * t_bins, 0.0);
  for (std::size_t t = 0; t < taxels; ++t) {
    double* row = values.data() + t * t_bins;
    for (double time : spikes.trains[t].times_s) {
      const std::size_t k = bin_index(time, bin_s);
      if (k < t_bins) row[k] += 1.0;
    }
    for (std::size_t k = 0; k < t_bins; ++k) row[k] /= bin_s;
  }
  return ResponseVolume(spikes.geometry.rows, spikes.geometry.cols, t_bins, bin_s, std::move(values),
                        spikes.geometry, spikes.info);
}

Quantizer fit_quantizer(std::span<const ResponseVolume> training, std::size_t num_levels) {
  require(num_levels >= kMinLevels && num_levels <= kMaxLevels, "gray levels must lie in [2, 32]");
  require(!training.empty(), "quantizer needs at least one training volume");
  double hi = 0.0;
  for (const auto& v : training) hi = std::max(hi, v.max_value());
  if (!(hi > 0.0)) fail("degenerate_input", "training volumes are all zero; quantizer range is empty");
  return Quantizer{0.0, hi, num_levels};
}

QuantizedVolume quantize(const ResponseVolume& vol, const Quantizer& q) {
  require(q.hi > q.lo, "quantizer range is empty");
  require(q.levels >= kMinLevels && q.levels <= kMaxLevels, "gray levels must lie in [2, 32]");
  std::vector<std::uint8_t> levels(vol.values().size());
  std::transform(vol.values().begin(), vol.values().end(), levels.begin(),
                 [&](double v) { return static_cast<std::uint8_t>(q.level(v)); });
  return QuantizedVolume(vol.rows(), vol.cols(), vol.t_bins(), q.levels, std::move(levels));
}

SpikeArray perturb_spatial(const SpikeArray& spikes, std::size_t n, std::uint64_t seed) {
  if (n == 0) return spikes;
  const std::size_t taxels = spikes.trains.size();
  require(n >= 2, "perturbation needs at least two taxels (no derangement of one)");
  require(n <= taxels, "cannot perturb more taxels than the grid holds");

  Rng rng(seed);
  std::vector<std::size_t> order(taxels);
  std::iota(order.begin(), order.end(), std::size_t{0});
  // partial Fisher-Yates: the first n entries are a uniform n-subset
  for (std::size_t i = 0; i < n; ++i) std::swap(order[i], order[i + rng.index(taxels - i)]);
  std::vector<std::size_t> selected(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n));

  // uniform derangement by rejection (expected e draws)
  std::vector<std::size_t> perm(n);
  while (true) {
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    for (std::size_t i = n - 1; i > 0; --i) std::swap(perm[i], perm[rng.index(i + 1)]);
    bool fixed_point = false;
    for (std::size_t i = 0; i < n && !fixed_point; ++i) fixed_point = perm[i] == i;
    if (!fixed_point) break;
  }

  SpikeArray out = spikes;
  for (std::size_t i = 0; i < n; ++i) out.trains[selected[perm[i]]] = spikes.trains[selected[i]];
  return out;
}

ResponseVolume collapse_time(const ResponseVolume& vol) {
  if (vol.t_bins() == 1) return vol;
  const std::size_t cells = vol.rows() * vol.cols();
  std::vector<double> values(cells, 0.0);
  for (std::size_t cell = 0; cell < cells; ++cell) {
    double sum = 0.0;
    for (std::size_t k = 0; k < vol.t_bins(); ++k) sum += vol.values()[cell * vol.t_bins() + k];
    values[cell] = sum / static_cast<double>(vol.t_bins());
  }
  return ResponseVolume(vol.rows(), vol.cols(), 1, vol.bin_s() * static_cast<double>(vol.t_bins()),
                        std::move(values), vol.geometry(), vol.info());
}

ResponseVolume truncate_time(const ResponseVolume& vol, double fraction) {
  require(fraction > 0.0 && fraction <= 1.0, "truncation fraction must lie in (0, 1]");
  const auto keep = static_cast<std::size_t>(std::floor(fraction * static_cast<double>(vol.t_bins()) + 1e-9));
  require(keep >= 1, "truncation fraction leaves no time slabs");
  if (keep == vol.t_bins()) return vol;
  const std::size_t cells = vol.rows() * vol.cols();
  std::vector<double> values(cells * keep);
  for (std::size_t cell = 0; cell < cells; ++cell)
    for (std::size_t k = 0; k < keep; ++k) values[cell * keep + k] = vol.values()[cell * vol.t_bins() + k];
  return ResponseVolume(vol.rows(), vol.cols(), keep, vol.bin_s(), std::move(values), vol.geometry(),
                        vol.info());
}

std::string format_volume_csv(const ResponseVolume& vol, const Quantizer& q) {
  std::string out = "r,c,k,msr,level\n";
  char buf[64];
  for (std::size_t r = 0; r < vol.rows(); ++r)
    for (std::size_t c = 0; c < vol.cols(); ++c)
      for (std::size_t k = 0; k < vol.t_bins(); ++k) {
        const double v = vol.at(r, c, k);
        auto res = std::to_chars(buf, buf + sizeof buf, v);
        out += std::to_string(r) + "," + std::to_string(c) + "," + std::to_string(k) + "," +
               std::string(buf, res.ptr) + "," + std::to_string(q.level(v)) + "\n";
      }
  return out;
}

}  // namespace tactile
