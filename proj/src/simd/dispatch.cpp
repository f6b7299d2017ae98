#include <atomic>
#include <cstdlib>
#include <string>

#include "tactile/common.hpp"
#include "tactile/simd/kernels.hpp"

namespace tactile::simd {
namespace {

bool cpu_has_avx2() noexcept {
#if defined(TACTILE_HAVE_AVX2) && (defined(__GNUC__) || defined(__clang__))
  return __builtin_cpu_supports("avx2");
#else
  return false;
#endif
}

Isa initial_isa() noexcept {
  const char* env = std::getenv("TACTILE_SIMD");
  if (env != nullptr && std::string(env) == "scalar") return Isa::scalar;
  return cpu_has_avx2() ? Isa::avx2 : Isa::scalar;
}

std::atomic<Isa>& current() noexcept {
  static std::atomic<Isa> isa{initial_isa()};
  return isa;
}

const detail::KernelTable& table() noexcept {
#if defined(TACTILE_HAVE_AVX2)
  if (current().load(std::memory_order_relaxed) == Isa::avx2) return detail::avx2_kernels();
#endif
  return detail::scalar_kernels();
}

}  // namespace

std::string_view isa_name(Isa isa) noexcept { return isa == Isa::avx2 ? "avx2" : "scalar"; }

bool isa_supported(Isa isa) noexcept { return isa == Isa::scalar || cpu_has_avx2(); }

Isa active_isa() noexcept { return current().load(std::memory_order_relaxed); }

void set_isa(Isa isa) {
  if (!isa_supported(isa))
    fail("unsupported", "instruction set " + std::string(isa_name(isa)) + " is not available");
  current().store(isa, std::memory_order_relaxed);
}

std::size_t izhikevich_run(const IzhikevichStep& p, std::span<const double> input,
                           std::size_t lanes, std::span<double> v, std::span<double> u,
                           std::vector<std::vector<std::uint32_t>>& spikes) {
  return table().izhikevich(p, input, lanes, v, u, spikes);
}

void lowpass_inplace(std::span<double> data, std::size_t lanes, double alpha) {
  table().lowpass(data, lanes, alpha);
}

void squared_distances(std::span<const double> rows, std::size_t dim,
                       std::span<const double> query, std::span<double> out) {
  table().distances(rows, dim, query, out);
}

}  // namespace tactile::simd
