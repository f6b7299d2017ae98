#pragma once

// Data-parallel inner loops of the pipeline. Each kernel has a scalar
// reference implementation and, on x86-64, an AVX2 variant chosen at
// runtime. Variants perform the same IEEE operations in the same order per
// lane, so their outputs are bit-identical; tests/test_kernels.cpp holds
// them to that.
//
// The selected instruction set can be forced with the environment variable
// TACTILE_SIMD=scalar|avx2 or programmatically with set_isa().

#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

namespace tactile::simd {

enum class Isa { scalar, avx2 };

std::string_view isa_name(Isa isa) noexcept;
bool isa_supported(Isa isa) noexcept;
Isa active_isa() noexcept;
/// Throws tactile::Error if `isa` is not supported on this machine/build.
void set_isa(Isa isa);

struct IzhikevichStep {
  double a;
  double b;
  double c;
  double d;
  double v_peak;
  double gain;
  double dt_ms;
};

inline constexpr std::size_t kNoFault = static_cast<std::size_t>(-1);

/// Integrates `lanes` independent Izhikevich neurons over an interleaved
/// input buffer laid out time-major: input[n * lanes + lane].
/// v and u hold the per-lane state and are updated in place. Sample indices
/// at which a lane fired are appended to spikes[lane].
/// Returns the first sample index at which any lane's state became
/// non-finite, or kNoFault.
std::size_t izhikevich_run(const IzhikevichStep& p, std::span<const double> input,
                           std::size_t lanes, std::span<double> v, std::span<double> u,
                           std::vector<std::vector<std::uint32_t>>& spikes);

/// First-order low-pass y[n] = y[n-1] + alpha * (x[n] - y[n-1]), applied in
/// place to every lane of a time-major interleaved buffer. The state of each
/// lane starts at its first sample.
void lowpass_inplace(std::span<double> data, std::size_t lanes, double alpha);

/// out[r] = sum_j (rows[r * dim + j] - query[j])^2, summed in j order.
void squared_distances(std::span<const double> rows, std::size_t dim,
                       std::span<const double> query, std::span<double> out);

namespace detail {

using IzhikevichFn = std::size_t (*)(const IzhikevichStep&, std::span<const double>, std::size_t,
                                     std::span<double>, std::span<double>,
                                     std::vector<std::vector<std::uint32_t>>&);
using LowpassFn = void (*)(std::span<double>, std::size_t, double);
using DistanceFn = void (*)(std::span<const double>, std::size_t, std::span<const double>,
                            std::span<double>);

struct KernelTable {
  IzhikevichFn izhikevich;
  LowpassFn lowpass;
  DistanceFn distances;
};

const KernelTable& scalar_kernels() noexcept;
#if defined(TACTILE_HAVE_AVX2)
const KernelTable& avx2_kernels() noexcept;
#endif

}  // namespace detail
}  // namespace tactile::simd
