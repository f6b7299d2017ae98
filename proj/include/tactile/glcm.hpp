#pragma once

// 3-D gray-level co-occurrence matrices over the 13-direction x 4-distance
// offset set, their normalized mean, and the contrast / correlation /
// angular-second-moment statistics.

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "tactile/volume.hpp"

namespace tactile {

/// (dx, dy, dz) act on (row, column, time bin).
struct OffsetVector {
  int dx = 0;
  int dy = 0;
  int dz = 0;
  int direction = 0;  ///< 1..13
  int distance = 0;

  bool operator==(const OffsetVector&) const = default;
};

/// Unit templates of the 13 directions; multiply by the distance.
inline constexpr std::array<std::array<int, 3>, 13> kDirectionTemplates{{
    {0, 1, 0},    // 1  (0, D, 0)
    {-1, 1, 0},   // 2  (-D, D, 0)
    {-1, 0, 0},   // 3  (-D, 0, 0)
    {-1, -1, 0},  // 4  (-D, -D, 0)
    {0, 1, -1},   // 5  (0, D, -D)
    {0, 0, -1},   // 6  (0, 0, -D)
    {0, -1, -1},  // 7  (0, -D, -D)
    {-1, 0, -1},  // 8  (-D, 0, -D)
    {1, 0, -1},   // 9  (D, 0, -D)
    {-1, 1, -1},  // 10 (-D, D, -D)
    {1, -1, -1},  // 11 (D, -D, -D)
    {-1, -1, -1}, // 12 (-D, -D, -D)
    {1, 1, -1},   // 13 (D, D, -D)
}};

inline constexpr std::array<int, 4> kStandardDistances{1, 2, 4, 8};

/// Every direction crossed with every distance, direction-major.
std::vector<OffsetVector> standard_offsets(std::span<const int> distances = kStandardDistances);

struct Glcm {
  std::size_t levels = 0;
  std::vector<std::uint64_t> counts;  ///< counts[i * levels + j]
  OffsetVector offset;
  std::uint64_t pair_count = 0;

  std::uint64_t at(std::size_t i, std::size_t j) const { return counts[i * levels + j]; }
};

struct MeanGlcm {
  std::size_t levels = 0;
  std::vector<double> p;  ///< p[i * levels + j], sums to 1 when defined
  std::uint64_t source_pair_total = 0;
  bool defined = false;

  double at(std::size_t i, std::size_t j) const { return p[i * levels + j]; }
};

struct HaralickFeatures {
  double contrast = 0.0;
  double correlation = 0.0;
  double asm_ = 0.0;
  bool correlation_defined = false;

  std::vector<double> vector() const { return {contrast, correlation, asm_}; }
};

/// Ordered-pair counts G(i, j) of voxels with level i whose offset partner
/// lies inside the volume and has level j. Not symmetrized.
Glcm glcm(const QuantizedVolume& vol, const OffsetVector& offset);

/// Element-wise mean of the per-offset GLCMs (empty ones included),
/// normalized to unit mass. `defined` is false when no pair was counted.
MeanGlcm mean_glcm(const QuantizedVolume& vol, std::span<const OffsetVector> offsets);

/// Throws unless sum(p) is 1 within 1e-9. Correlation is undefined (and
/// reported as 0) when either marginal has zero variance.
HaralickFeatures haralick(const MeanGlcm& m);

enum class GlcmMode { glcm3d, glcm2d };

std::string to_string(GlcmMode mode);
GlcmMode glcm_mode_from_string(const std::string& s);

struct GlcmFeatureResult {
  HaralickFeatures features;
  bool mean_defined = false;
};

/// Quantize (after collapsing time in 2-D mode), average the GLCMs over
/// `offsets` and extract the Haralick features.
GlcmFeatureResult glcm_features(const ResponseVolume& vol, GlcmMode mode, const Quantizer& q,
                                std::span<const OffsetVector> offsets);

GlcmFeatureResult glcm_features(const SpikeArray& spikes, GlcmMode mode, double bin_s, const Quantizer& q,
                                std::span<const OffsetVector> offsets);

/// N x N CSV dump of a mean GLCM.
std::string format_mean_glcm_csv(const MeanGlcm& m);

}  // namespace tactile
