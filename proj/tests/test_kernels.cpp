#include <doctest.h>

#include <cstdlib>
#include <cstring>
#include <random>
#include <vector>

#include "tactile/common.hpp"
#include "tactile/simd/kernels.hpp"

using namespace tactile;
using simd::Isa;

namespace {

bool bits_equal(const std::vector<double>& a, const std::vector<double>& b) {
  return a.size() == b.size() && std::memcmp(a.data(), b.data(), a.size() * sizeof(double)) == 0;
}

// Runs fn under each supported ISA and returns the results in order
// (scalar first).
template <typename Fn>
auto under_each_isa(Fn fn) {
  const Isa saved = simd::active_isa();
  std::vector<decltype(fn())> out;
  for (Isa isa : {Isa::scalar, Isa::avx2}) {
    if (!simd::isa_supported(isa)) continue;
    simd::set_isa(isa);
    out.push_back(fn());
  }
  simd::set_isa(saved);
  return out;
}

}  // namespace

TEST_CASE("isa selection") {
  CHECK(simd::isa_supported(Isa::scalar));
  CHECK(simd::isa_name(Isa::scalar) == "scalar");
  CHECK(simd::isa_name(Isa::avx2) == "avx2");
  const Isa saved = simd::active_isa();
  simd::set_isa(Isa::scalar);
  CHECK(simd::active_isa() == Isa::scalar);
  if (!simd::isa_supported(Isa::avx2)) CHECK_THROWS_AS(simd::set_isa(Isa::avx2), Error);
  simd::set_isa(saved);
  MESSAGE("avx2 available: " << simd::isa_supported(Isa::avx2));
}

TEST_CASE("neuron kernel variants are bit-identical") {
  std::mt19937_64 eng(5);
  std::uniform_real_distribution<double> u(0.0, 1.3);
  for (std::size_t lanes : {1, 2, 3, 4, 5, 7, 8, 13, 16, 33}) {
    const std::size_t samples = 2500;
    std::vector<double> input(lanes * samples);
    for (std::size_t n = 0; n < samples; ++n)
      for (std::size_t l = 0; l < lanes; ++l)
        input[n * lanes + l] = 0.5 + 0.5 * std::sin(0.004 * static_cast<double>(n) * static_cast<double>(l + 1)) + 0.2 * u(eng);
    const simd::IzhikevichStep p{0.02, 0.2, -65.0, 8.0, 30.0, 8.0, 1.0};
    struct Out {
      std::vector<double> v, u;
      std::vector<std::vector<std::uint32_t>> spikes;
      std::size_t fault;
    };
    const auto runs = under_each_isa([&] {
      Out o{std::vector<double>(lanes, -65.0), std::vector<double>(lanes, -13.0), std::vector<std::vector<std::uint32_t>>(lanes), 0};
      o.fault = simd::izhikevich_run(p, input, lanes, o.v, o.u, o.spikes);
      return o;
    });
    for (std::size_t i = 1; i < runs.size(); ++i) {
      CHECK(runs[i].fault == runs[0].fault);
      CHECK(bits_equal(runs[i].v, runs[0].v));
      CHECK(bits_equal(runs[i].u, runs[0].u));
      CHECK(runs[i].spikes == runs[0].spikes);
    }
    std::size_t total = 0;
    for (const auto& s : runs[0].spikes) total += s.size();
    CHECK(total > 0);
  }
}

TEST_CASE("neuron kernel reports the first non-finite sample") {
  const std::size_t lanes = 6, samples = 50;
  std::vector<double> input(lanes * samples, 0.5);
  input[20 * lanes + 4] = std::numeric_limits<double>::infinity();
  const simd::IzhikevichStep p{0.02, 0.2, -65.0, 8.0, 30.0, 8.0, 1.0};
  const auto faults = under_each_isa([&] {
    std::vector<double> v(lanes, -65.0), u(lanes, -13.0);
    std::vector<std::vector<std::uint32_t>> s(lanes);
    return simd::izhikevich_run(p, input, lanes, v, u, s);
  });
  for (auto f : faults) CHECK(f == 20);
}

TEST_CASE("low-pass kernel variants are bit-identical") {
  std::mt19937_64 eng(6);
  std::normal_distribution<double> n(0.0, 1.0);
  for (std::size_t lanes : {1, 3, 4, 6, 16, 17}) {
    std::vector<double> data(lanes * 777);
    for (auto& v : data) v = n(eng);
    const auto runs = under_each_isa([&] {
      auto copy = data;
      simd::lowpass_inplace(copy, lanes, 0.2695973);
      return copy;
    });
    for (std::size_t i = 1; i < runs.size(); ++i) CHECK(bits_equal(runs[i], runs[0]));
    // scalar reference
    auto ref = data;
    for (std::size_t t = 1; t < 777; ++t)
      for (std::size_t l = 0; l < lanes; ++l) {
        double& y = ref[t * lanes + l];
        const double prev = ref[(t - 1) * lanes + l];
        y = prev + 0.2695973 * (y - prev);
      }
    CHECK(bits_equal(runs[0], ref));
  }
}

TEST_CASE("distance kernel variants are bit-identical") {
  std::mt19937_64 eng(8);
  std::normal_distribution<double> n(0.0, 3.0);
  for (std::size_t rows : {1, 2, 3, 4, 5, 9, 64, 131}) {
    for (std::size_t dim : {1, 2, 3, 7}) {
      std::vector<double> m(rows * dim), q(dim);
      for (auto& v : m) v = n(eng);
      for (auto& v : q) v = n(eng);
      const auto runs = under_each_isa([&] {
        std::vector<double> out(rows);
        simd::squared_distances(m, dim, q, out);
        return out;
      });
      for (std::size_t i = 1; i < runs.size(); ++i) CHECK(bits_equal(runs[i], runs[0]));
      for (std::size_t r = 0; r < rows; ++r) {
        double s = 0.0;
        for (std::size_t j = 0; j < dim; ++j) s += (m[r * dim + j] - q[j]) * (m[r * dim + j] - q[j]);
        CHECK(runs[0][r] == s);
      }
    }
  }
}
