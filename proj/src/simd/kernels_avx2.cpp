// AVX2 variants. Lanes of the neuron and filter kernels map onto channels
// (4 doubles per register); the distance kernel processes 4 rows at a time.
// Operation order mirrors kernels_scalar.cpp exactly.

#include <immintrin.h>

#include "tactile/simd/kernels.hpp"

namespace tactile::simd::detail {
namespace {

std::size_t izhikevich_avx2(const IzhikevichStep& p, std::span<const double> input,
                            std::size_t lanes, std::span<double> v, std::span<double> u,
                            std::vector<std::vector<std::uint32_t>>& spikes) {
  const std::size_t samples = lanes == 0 ? 0 : input.size() / lanes;
  const std::size_t wide = lanes - lanes % 4;
  const double half_s = 0.5 * p.dt_ms;
  const double adt_s = p.a * p.dt_ms;

  const __m256d k004 = _mm256_set1_pd(0.04);
  const __m256d k5 = _mm256_set1_pd(5.0);
  const __m256d k140 = _mm256_set1_pd(140.0);
  const __m256d zero = _mm256_setzero_pd();
  const __m256d half = _mm256_set1_pd(half_s);
  const __m256d adt = _mm256_set1_pd(adt_s);
  const __m256d gain = _mm256_set1_pd(p.gain);
  const __m256d b = _mm256_set1_pd(p.b);
  const __m256d c = _mm256_set1_pd(p.c);
  const __m256d d = _mm256_set1_pd(p.d);
  const __m256d peak = _mm256_set1_pd(p.v_peak);

  for (std::size_t n = 0; n < samples; ++n) {
    const double* x = input.data() + n * lanes;
    bool faulted = false;
    for (std::size_t l = 0; l < wide; l += 4) {
      const __m256d current = _mm256_mul_pd(gain, _mm256_loadu_pd(x + l));
      __m256d vl = _mm256_loadu_pd(v.data() + l);
      __m256d ul = _mm256_loadu_pd(u.data() + l);
      for (int step = 0; step < 2; ++step) {
        __m256d t = _mm256_add_pd(_mm256_mul_pd(_mm256_mul_pd(k004, vl), vl), _mm256_mul_pd(k5, vl));
        t = _mm256_add_pd(t, k140);
        t = _mm256_sub_pd(t, ul);
        t = _mm256_add_pd(t, current);
        vl = _mm256_add_pd(vl, _mm256_mul_pd(half, t));
      }
      const __m256d capped = _mm256_min_pd(peak, vl);  // (peak < v) ? peak : v, NaN stays
      ul = _mm256_add_pd(ul, _mm256_mul_pd(adt, _mm256_sub_pd(_mm256_mul_pd(b, capped), ul)));

      const __m256d vf = _mm256_cmp_pd(_mm256_mul_pd(vl, zero), zero, _CMP_EQ_OQ);
      const __m256d uf = _mm256_cmp_pd(_mm256_mul_pd(ul, zero), zero, _CMP_EQ_OQ);
      if (_mm256_movemask_pd(_mm256_and_pd(vf, uf)) != 0xF) faulted = true;

      const __m256d fired = _mm256_cmp_pd(vl, peak, _CMP_GE_OQ);
      int mask = _mm256_movemask_pd(fired);
      if (mask != 0) {
        vl = _mm256_blendv_pd(vl, c, fired);
        ul = _mm256_blendv_pd(ul, _mm256_add_pd(ul, d), fired);
        while (mask != 0) {
          const int bit = __builtin_ctz(static_cast<unsigned>(mask));
          spikes[l + static_cast<std::size_t>(bit)].push_back(static_cast<std::uint32_t>(n));
          mask &= mask - 1;
        }
      }
      _mm256_storeu_pd(v.data() + l, vl);
      _mm256_storeu_pd(u.data() + l, ul);
    }
    for (std::size_t l = wide; l < lanes; ++l) {
      const double current = p.gain * x[l];
      double vl = v[l];
      double ul = u[l];
      vl = vl + half_s * ((((0.04 * vl) * vl + 5.0 * vl) + 140.0) - ul + current);
      vl = vl + half_s * ((((0.04 * vl) * vl + 5.0 * vl) + 140.0) - ul + current);
      const double capped = p.v_peak < vl ? p.v_peak : vl;
      ul = ul + adt_s * (p.b * capped - ul);
      if (vl * 0.0 != 0.0 || ul * 0.0 != 0.0) faulted = true;
      if (vl >= p.v_peak) {
        spikes[l].push_back(static_cast<std::uint32_t>(n));
        vl = p.c;
        ul = ul + p.d;
      }
      v[l] = vl;
      u[l] = ul;
    }
    if (faulted) return n;
  }
  return kNoFault;
}

void lowpass_avx2(std::span<double> data, std::size_t lanes, double alpha) {
  if (lanes == 0 || data.size() < lanes) return;
  const std::size_t samples = data.size() / lanes;
  const std::size_t wide = lanes - lanes % 4;
  const __m256d k = _mm256_set1_pd(alpha);
  for (std::size_t n = 1; n < samples; ++n) {
    double* y = data.data() + n * lanes;
    const double* prev = y - lanes;
    for (std::size_t l = 0; l < wide; l += 4) {
      const __m256d p = _mm256_loadu_pd(prev + l);
      const __m256d x = _mm256_loadu_pd(y + l);
      _mm256_storeu_pd(y + l, _mm256_add_pd(p, _mm256_mul_pd(k, _mm256_sub_pd(x, p))));
    }
    for (std::size_t l = wide; l < lanes; ++l) y[l] = prev[l] + alpha * (y[l] - prev[l]);
  }
}

void distances_avx2(std::span<const double> rows, std::size_t dim,
                    std::span<const double> query, std::span<double> out) {
  const std::size_t count = out.size();
  const std::size_t wide = count - count % 4;
  const __m256i stride = _mm256_set_epi64x(static_cast<long long>(3 * dim),
                                           static_cast<long long>(2 * dim),
                                           static_cast<long long>(dim), 0);
  for (std::size_t r = 0; r < wide; r += 4) {
    const double* base = rows.data() + r * dim;
    __m256d acc = _mm256_setzero_pd();
    for (std::size_t j = 0; j < dim; ++j) {
      const __m256d x = _mm256_i64gather_pd(base + j, stride, 8);
      const __m256d diff = _mm256_sub_pd(x, _mm256_set1_pd(query[j]));
      acc = _mm256_add_pd(acc, _mm256_mul_pd(diff, diff));
    }
    _mm256_storeu_pd(out.data() + r, acc);
  }
  for (std::size_t r = wide; r < count; ++r) {
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

const KernelTable& avx2_kernels() noexcept {
  static const KernelTable table{izhikevich_avx2, lowpass_avx2, distances_avx2};
  return table;
}

}  // namespace tactile::simd::detail
