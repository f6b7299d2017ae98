#include "tactile/glcm.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>

#include "tactile/common.hpp"

namespace tactile {

std::vector<OffsetVector> standard_offsets(std::span<const int> distances) {
  std::vector<OffsetVector> out;
  out.reserve(kDirectionTemplates.size() * distances.size());
  for (std::size_t dir = 0; dir < kDirectionTemplates.size(); ++dir) {
    const auto& t = kDirectionTemplates[dir];
    for (int d : distances) {
      require(d >= 1, "offset distances must be positive");
      out.push_back({t[0] * d, t[1] * d, t[2] * d, static_cast<int>(dir) + 1, d});
    }
  }
  return out;
}

namespace {

struct Range {
  std::ptrdiff_t begin = 0;
  std::ptrdiff_t end = 0;
};

// Indices i in [0, n) whose partner i + delta also lies in [0, n).
Range valid_range(std::size_t n, int delta) {
  const auto size = static_cast<std::ptrdiff_t>(n);
  return {std::max<std::ptrdiff_t>(0, -delta), std::min<std::ptrdiff_t>(size, size - delta)};
}

std::uint64_t accumulate(const QuantizedVolume& vol, const OffsetVector& o, std::uint64_t* counts) {
  const std::size_t levels = vol.num_levels();
  const Range xr = valid_range(vol.rows(), o.dx);
  const Range yr = valid_range(vol.cols(), o.dy);
  const Range zr = valid_range(vol.depth(), o.dz);
  if (xr.begin >= xr.end || yr.begin >= yr.end || zr.begin >= zr.end) return 0;

  const auto data = vol.levels();
  const auto cols = static_cast<std::ptrdiff_t>(vol.cols());
  const auto depth = static_cast<std::ptrdiff_t>(vol.depth());
  const std::ptrdiff_t shift = (o.dx * cols + o.dy) * depth + o.dz;
  std::uint64_t pairs = 0;
  for (std::ptrdiff_t x = xr.begin; x < xr.end; ++x) {
    for (std::ptrdiff_t y = yr.begin; y < yr.end; ++y) {
      const std::ptrdiff_t base = (x * cols + y) * depth;
      for (std::ptrdiff_t z = zr.begin; z < zr.end; ++z) {
        const std::ptrdiff_t idx = base + z;
        ++counts[data[static_cast<std::size_t>(idx)] * levels + data[static_cast<std::size_t>(idx + shift)]];
      }
      pairs += static_cast<std::uint64_t>(zr.end - zr.begin);
    }
  }
  return pairs;
}

}  // namespace

Glcm glcm(const QuantizedVolume& vol, const OffsetVector& offset) {
  require(vol.size() > 0, "GLCM needs a non-empty volume");
  Glcm g;
  g.levels = vol.num_levels();
  g.offset = offset;
  g.counts.assign(g.levels * g.levels, 0);
  g.pair_count = accumulate(vol, offset, g.counts.data());
  return g;
}

MeanGlcm mean_glcm(const QuantizedVolume& vol, std::span<const OffsetVector> offsets) {
  require(!offsets.empty(), "mean GLCM needs at least one offset");
  require(vol.size() > 0, "GLCM needs a non-empty volume");
  const std::size_t levels = vol.num_levels();
  std::vector<std::uint64_t> sum(levels * levels, 0);
  MeanGlcm m;
  m.levels = levels;
  for (const auto& o : offsets) m.source_pair_total += accumulate(vol, o, sum.data());

  m.p.assign(levels * levels, 0.0);
  if (m.source_pair_total == 0) return m;
  const double count = static_cast<double>(offsets.size());
  double mass = 0.0;
  for (std::size_t i = 0; i < sum.size(); ++i) {
    m.p[i] = static_cast<double>(sum[i]) / count;
    mass += m.p[i];
  }
  for (auto& v : m.p) v /= mass;
  m.defined = true;
  return m;
}

HaralickFeatures haralick(const MeanGlcm& m) {
  const std::size_t n = m.levels;
  require(n >= 1 && m.p.size() == n * n, "GLCM shape mismatch");
  double total = 0.0;
  for (double v : m.p) {
    require(v >= 0.0, "GLCM probabilities must be non-negative");
    total += v;
  }
  if (std::abs(total - 1.0) > 1e-9) fail("invalid_argument", "GLCM is not normalized (sum = " + std::to_string(total) + ")");

  std::vector<double> px(n, 0.0), py(n, 0.0);
  HaralickFeatures f;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      const double p = m.p[i * n + j];
      const double diff = static_cast<double>(i) - static_cast<double>(j);
      f.contrast += p * diff * diff;
      f.asm_ += p * p;
      px[i] += p;
      py[j] += p;
    }
  }
  double mux = 0.0, muy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mux += static_cast<double>(i) * px[i];
    muy += static_cast<double>(i) * py[i];
  }
  double varx = 0.0, vary = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    varx += px[i] * (static_cast<double>(i) - mux) * (static_cast<double>(i) - mux);
    vary += py[i] * (static_cast<double>(i) - muy) * (static_cast<double>(i) - muy);
  }
  const double denom = std::sqrt(varx) * std::sqrt(vary);
  if (denom > 0.0) {
    double cov = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j)
        cov += m.p[i * n + j] * (static_cast<double>(i) - mux) * (static_cast<double>(j) - muy);
    f.correlation = cov / denom;
    f.correlation_defined = true;
  }
  return f;
}

std::string to_string(GlcmMode mode) { return mode == GlcmMode::glcm2d ? "glcm2d" : "glcm3d"; }

GlcmMode glcm_mode_from_string(const std::string& s) {
  if (s == "glcm3d") return GlcmMode::glcm3d;
  if (s == "glcm2d") return GlcmMode::glcm2d;
  fail("invalid_argument", "unknown GLCM mode '" + s + "'");
}

GlcmFeatureResult glcm_features(const ResponseVolume& vol, GlcmMode mode, const Quantizer& q,
                                std::span<const OffsetVector> offsets) {
  const QuantizedVolume qv = mode == GlcmMode::glcm2d ? quantize(collapse_time(vol), q) : quantize(vol, q);
  const MeanGlcm m = mean_glcm(qv, offsets);
  GlcmFeatureResult out;
  out.mean_defined = m.defined;
  if (m.defined) out.features = haralick(m);
  return out;
}

GlcmFeatureResult glcm_features(const SpikeArray& spikes, GlcmMode mode, double bin_s, const Quantizer& q,
                                std::span<const OffsetVector> offsets) {
  return glcm_features(build_volume(spikes, bin_s), mode, q, offsets);
}

std::string format_mean_glcm_csv(const MeanGlcm& m) {
  std::string out;
  char buf[64];
  for (std::size_t i = 0; i < m.levels; ++i) {
    for (std::size_t j = 0; j < m.levels; ++j) {
      if (j > 0) out += ',';
      auto res = std::to_chars(buf, buf + sizeof buf, m.at(i, j));
      out.append(buf, res.ptr);
    }
    out += '\n';
  }
  return out;
}

}  // namespace tactile
