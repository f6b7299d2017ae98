#include <cmath>

#include "tactile/simd/kernels.hpp"

namespace tactile::simd::detail {
namespace {

std::size_t izhikevich_scalar(const IzhikevichStep& p, std::span<const double> input,
                              std::size_t lanes, std::span<double> v, std::span<double> u,
                              std::vector<std::vector<std::uint32_t>>& spikes) {
  const std::size_t samples = lanes == 0 ? 0 : input.size() / lanes;
  const double half = 0.5 * p.dt_ms;
  const double adt = p.a * p.dt_ms;
  std::size_t fault = kNoFault;
  for (std::size_t n = 0; n < samples; ++n) {
    const double* x = input.data() + n * lanes;
    for (std::size_t l = 0; l < lanes; ++l) {
      const double current = p.gain * x[l];
      double vl = v[l];
      double ul = u[l];
      // two half steps for v, one full step for u; u sees v capped at the
      // peak so the overshoot of a firing step does not leak into adaptation
      vl = vl + half * ((((0.04 * vl) * vl + 5.0 * vl) + 140.0) - ul + current);
      vl = vl + half * ((((0.04 * vl) * vl + 5.0 * vl) + 140.0) - ul + current);
      const double capped = p.v_peak < vl ? p.v_peak : vl;
      ul = ul + adt * (p.b * capped - ul);
      if (fault == kNoFault && (vl * 0.0 != 0.0 || ul * 0.0 != 0.0)) fault = n;
      if (vl >= p.v_peak) {
        spikes[l].push_back(static_cast<std::uint32_t>(n));
        vl = p.c;
        ul = ul + p.d;
      }
      v[l] = vl;
      u[l] = ul;
    }
    if (fault != kNoFault) return fault;
  }
  return kNoFault;
}

void lowpass_scalar(std::span<double> data, std::size_t lanes, double alpha) {
  if (lanes == 0 || data.size() < lanes) return;
  const std::size_t samples = data.size() / lanes;
  for (std::size_t n = 1; n < samples; ++n) {
    double* y = data.data() + n * lanes;
    const double* prev = y - lanes;
    for (std::size_t l = 0; l < lanes; ++l) y[l] = prev[l] + alpha * (y[l] - prev[l]);
  }
}

void distances_scalar(std::span<const double> rows, std::size_t dim,
                      std::span<const double> query, std::span<double> out) {
  for (std::size_t r = 0; r < out.size(); ++r) {
    const double* row = rows.data() + r * dim;
    double acc = 0.0;
    for (std::size_t j = 0; j < dim; ++j) {
      const double diff = row[j] - query[j];
      acc = acc + diff * diff;
    }
    out[r] = acc;
  }
}

}  // namespace

const KernelTable& scalar_kernels() noexcept {
  static const KernelTable table{izhikevich_scalar, lowpass_scalar, distances_scalar};
  return table;
}

}  // namespace tactile::simd::detail
