#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "oracles.hpp"
#include "tactile/common.hpp"
#include "tactile/neuron.hpp"

using namespace tactile;

namespace {

NeuronParams unit_gain() {
  NeuronParams p;
  p.gain = 1.0;
  return p;
}

}  // namespace

TEST_CASE("zero input never fires") {
  const std::vector<double> zeros(10000, 0.0);
  const auto t = encode(zeros, 1000.0, NeuronParams{});
  CHECK(t.size() == 0);
  CHECK(t.duration_s == doctest::Approx(10.0));
}

TEST_CASE("constant drive gives tonic spiking with settling intervals") {
  const std::vector<double> drive(10000, 10.0);
  const auto t = encode(drive, 1000.0, unit_gain());
  REQUIRE(t.size() > 10);
  for (std::size_t k = 2; k + 1 < t.size(); ++k) {
    const double prev = t.times_s[k] - t.times_s[k - 1];
    const double next = t.times_s[k + 1] - t.times_s[k];
    REQUIRE(next >= prev - 1e-12);
  }
  const auto ref = oracle::reference_izhikevich(10.0, 10.0);
  CHECK(std::abs(static_cast<double>(t.size()) - static_cast<double>(ref.size())) <= 1.0);
  // a 20x finer step lands within a few percent of the 1 ms scheme
  const auto fine = oracle::reference_izhikevich(10.0, 10.0, 0.05);
  CHECK(static_cast<double>(t.size()) == doctest::Approx(static_cast<double>(fine.size())).epsilon(0.06));
  // per-second agreement
  for (int s = 0; s < 10; ++s) {
    auto in = [s](const std::vector<double>& v) {
      return std::count_if(v.begin(), v.end(), [s](double x) { return x >= s && x < s + 1; });
    };
    CHECK(std::abs(in(t.times_s) - in(ref)) <= 1);
  }
}

TEST_CASE("gain 8 on a 1.25 channel is the same drive") {
  const auto t = encode(std::vector<double>(1000, 1.25), 1000.0, NeuronParams{});
  REQUIRE(t.size() > 5);
  for (std::size_t k = 2; k + 1 < t.size(); ++k)
    CHECK(t.times_s[k + 1] - t.times_s[k] >= t.times_s[k] - t.times_s[k - 1] - 1e-12);
  CHECK(t.times_s == encode(std::vector<double>(1000, 10.0), 1000.0, unit_gain()).times_s);
}

TEST_CASE("firing rate grows with gain") {
  const std::vector<double> drive(5000, 0.8);
  std::size_t last = 0;
  for (double gain : {5.0, 8.0, 12.0, 20.0}) {
    NeuronParams p;
    p.gain = gain;
    const auto n = encode(drive, 1000.0, p).size();
    CHECK(n >= last);
    last = n;
  }
  CHECK(last > 0);
}

TEST_CASE("array encoding equals per-channel encoding") {
  std::mt19937_64 eng(4);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  GridGeometry g{3, 5, 3.25, 4.0};
  const std::size_t samples = 3000;
  std::vector<double> data(g.taxels() * samples);
  for (std::size_t t = 0; t < g.taxels(); ++t)
    for (std::size_t n = 0; n < samples; ++n)
      data[t * samples + n] = 0.5 + 0.5 * std::sin(0.01 * static_cast<double>(n * (t + 1))) * u(eng);
  const SensorTrace trace(g, 1000.0, samples, data, TraceInfo{});
  const auto arr = encode_array(trace, NeuronParams{});
  REQUIRE(arr.trains.size() == g.taxels());
  for (std::size_t t = 0; t < g.taxels(); ++t) CHECK(arr.trains[t].times_s == encode(trace.channel(t), 1000.0, NeuronParams{}).times_s);
  CHECK_NOTHROW(arr.validate());
}

TEST_CASE("neuron parameter validation and numeric faults") {
  NeuronParams p;
  p.a = 0.0;
  CHECK_THROWS_AS(p.validate(), Error);
  p = NeuronParams{};
  p.v_peak = -70.0;
  CHECK_THROWS_AS(p.validate(), Error);
  const std::vector<double> huge(100, 1e300);
  try {
    encode(huge, 1000.0, NeuronParams{});
    FAIL("expected a numeric error");
  } catch (const Error& e) {
    CHECK(e.kind() == "numeric_error");
  }
}

TEST_CASE("spike CSV round trip") {
  SpikeArray a;
  a.geometry = GridGeometry{};
  a.info.label = "RT";
  a.info.velocity_mm_s = 10;
  a.info.trial = 3;
  a.info.synthetic = true;
  a.trains.resize(16);
  for (std::size_t t = 0; t < 16; ++t) {
    a.trains[t].duration_s = 9.0;
    for (std::size_t k = 0; k < t; ++k) a.trains[t].times_s.push_back(0.123 * static_cast<double>(k + 1) + 0.001 * t);
  }
  const auto text = format_spikes(a);
  const auto b = parse_spikes(text);
  CHECK(format_spikes(b) == text);
  CHECK(b.info.label == "RT");
  CHECK(b.info.synthetic);
  for (std::size_t t = 0; t < 16; ++t) CHECK(b.trains[t].times_s == a.trains[t].times_s);
  CHECK_THROWS_AS(parse_spikes("# rows=4 cols=4 pitch_mm=3.25 duration_s=1 label=A velocity_mm_s=5 trial=0\n"
                               "taxel_id,spike_time_s\n16,0.5\n"),
                  Error);
}

TEST_CASE("ISI histogram accounting") {
  SpikeTrain t;
  t.duration_s = 10.0;
  t.times_s = {0.0, 0.015, 0.035, 0.2, 1.5, 1.505};
  const auto h = isi_histogram(std::span<const SpikeTrain>(&t, 1), 0.01, 1.0);
  CHECK(h.intervals == 5);
  CHECK(h.overflow == 1);
  std::size_t sum = 0;
  for (auto c : h.counts) sum += c;
  CHECK(sum + h.overflow == h.intervals);
  CHECK(h.counts[0] == 1);  // 0.005
  CHECK(h.counts[1] == 1);  // 0.015
  CHECK(h.counts[2] == 1);  // 0.020
  CHECK(h.counts[16] == 1); // 0.165
  CHECK(h.mean_isi_s == doctest::Approx(1.505 / 5));
  SpikeTrain lonely;
  lonely.duration_s = 1.0;
  lonely.times_s = {0.5};
  CHECK(isi_histogram(std::span<const SpikeTrain>(&lonely, 1), 0.01, 1.0).empty);
}
