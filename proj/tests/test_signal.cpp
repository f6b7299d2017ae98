#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "tactile/common.hpp"
#include "tactile/signal.hpp"

using namespace tactile;

namespace {

TextureParams sine_texture(double period, double amplitude = 0.5, double baseline = 0.2) {
  TextureParams t;
  t.label = "S";
  t.spatial_period_mm = period;
  t.amplitude = amplitude;
  t.baseline = baseline;
  t.profile_seed = 11;
  return t;
}

std::vector<double> to_vec(std::span<const double> s) { return {s.begin(), s.end()}; }

std::string error_kind(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind() + ": " + e.what();
  }
  return "";
}

}  // namespace

TEST_CASE("grid geometry from active area") {
  const auto g = GridGeometry::from_active_area(4, 4, 169.0, 4.0);
  CHECK(g.pitch_mm == doctest::Approx(3.25).epsilon(1e-12));
  CHECK(g.taxels() == 16);
  GridGeometry bad;
  bad.pitch_mm = 0.0;
  CHECK_THROWS_AS(bad.validate(), Error);
}

TEST_CASE("texture parameter invariants") {
  auto t = sine_texture(3.25);
  CHECK_NOTHROW(t.validate());
  auto bad = t;
  bad.spatial_period_mm = 0.0;
  CHECK_THROWS_AS(bad.validate(), Error);
  bad = t;
  bad.amplitude = 0.0;
  CHECK_THROWS_AS(bad.validate(), Error);
  bad = t;
  bad.amplitude = 0.9;
  bad.baseline = 0.2;
  CHECK_THROWS_AS(bad.validate(), Error);
  bad = t;
  bad.roughness_noise_sd = -0.1;
  CHECK_THROWS_AS(bad.validate(), Error);
}

TEST_CASE("generated trace shape, range and determinism") {
  GeneratorSettings s;
  s.velocity_mm_s = 5.0;
  s.noise_sd = 0.3;
  s.seed = 42;
  const auto tex = sine_texture(3.25);
  const auto a = generate_trace(tex, GridGeometry{}, s);
  CHECK(a.num_samples() == 18000);
  CHECK(a.duration_s() == doctest::Approx(18.0));
  CHECK(a.num_taxels() == 16);
  CHECK(a.info().synthetic);
  for (double v : a.data()) REQUIRE((v >= 0.0 && v <= 1.0));

  const auto b = generate_trace(tex, GridGeometry{}, s);
  CHECK(std::equal(a.data().begin(), a.data().end(), b.data().begin()));
  s.seed = 43;
  const auto c = generate_trace(tex, GridGeometry{}, s);
  CHECK_FALSE(std::equal(a.data().begin(), a.data().end(), c.data().begin()));
}

TEST_CASE("dominant temporal frequency is velocity / period") {
  GeneratorSettings s;
  s.velocity_mm_s = 5.0;
  s.slide_distance_mm = 45.0;
  s.sample_rate_hz = 200.0;
  s.seed = 3;
  const auto trace = generate_trace(sine_texture(3.25), GridGeometry{}, s);
  const double peak = oracle::dft_peak_hz(to_vec(trace.channel(0)), 200.0);
  const double resolution = 1.0 / trace.duration_s();
  CHECK(std::abs(peak - 5.0 / 3.25) <= resolution);
}

TEST_CASE("adjacent columns are time shifts by pitch / velocity") {
  GeneratorSettings s;
  s.velocity_mm_s = 10.0;
  s.sample_rate_hz = 1000.0;
  s.noise_sd = 0.0;
  s.seed = 5;
  auto tex = sine_texture(13.0);
  tex.harmonic_weights = {1.0, 0.6, 0.3};
  tex.roughness_noise_sd = 0.05;
  const auto trace = generate_trace(tex, GridGeometry{}, s);
  const std::size_t expected = 325;  // 3.25 mm at 10 mm/s, 1 kHz
  for (std::size_t c = 0; c + 1 < 4; ++c) {
    const auto a = to_vec(trace.channel(c));
    const auto b = to_vec(trace.channel(c + 1));
    CHECK(oracle::best_lag(a, b, 600) == expected);
    // without clipping the shift is exact
    for (std::size_t n = 0; n + expected < a.size(); n += 97) CHECK(b[n + expected] == doctest::Approx(a[n]).epsilon(1e-9));
  }
  // rows of one column are identical without measurement noise
  CHECK(to_vec(trace.channel(1)) == to_vec(trace.channel(5)));
}

TEST_CASE("trace CSV round trip") {
  GeneratorSettings s;
  s.velocity_mm_s = 15.0;
  s.slide_distance_mm = 3.0;
  s.noise_sd = 0.1;
  s.seed = 9;
  s.trial = 7;
  const auto trace = generate_trace(sine_texture(5.0), GridGeometry{}, s);
  const std::string text = format_trace(trace);
  CHECK(text.rfind("# rows=4 cols=4 pitch_mm=3.25 rate_hz=1000 label=S velocity_mm_s=15 trial=7", 0) == 0);
  CHECK(text.find("\nt_ms,tx00,tx01,tx02,tx03,tx10") != std::string::npos);
  const auto back = parse_trace(text);
  CHECK(format_trace(back) == text);
  CHECK(back.info().label == "S");
  CHECK(back.info().trial == 7);
  CHECK(back.info().synthetic);
  CHECK(back.num_samples() == trace.num_samples());
  for (std::size_t i = 0; i < trace.data().size(); ++i)
    REQUIRE(std::abs(back.data()[i] - trace.data()[i]) <= 5e-7);
}

TEST_CASE("trace CSV errors carry line numbers") {
  const std::string head = "# rows=1 cols=2 pitch_mm=3.25 rate_hz=1000 label=A velocity_mm_s=5 trial=0\n";
  CHECK(error_kind([&] { parse_trace(head + "t_ms,tx00,tx01\n0,0.1,0.2\n1,0.1\n"); }).find("line 4: ragged row") !=
        std::string::npos);
  CHECK(error_kind([&] { parse_trace(head + "t_ms,tx00,tx01\n0,0.1,abc\n"); }).find("line 3") != std::string::npos);
  CHECK(error_kind([&] { parse_trace(head + "t_ms,tx00,tx01\n0,0.1,abc\n"); }).find("parse_error") == 0);
  CHECK(error_kind([&] { parse_trace(head + "t_ms,tx00\n0,0.1\n"); }).find("channel count mismatch") !=
        std::string::npos);
  CHECK(error_kind([&] { parse_trace("# rows=1 rate_hz=1000\nt_ms,tx00\n0,1\n"); }).find("malformed header") !=
        std::string::npos);
  CHECK(error_kind([&] { parse_trace("# rows=1 cols=1 rate_hz=1000 velocity\nt_ms,tx00\n0,1\n"); })
            .find("line 1") != std::string::npos);
}

TEST_CASE("low-pass step response and global normalization") {
  const double rate = 1000.0, fc = 50.0;
  const std::size_t n = 400;
  std::vector<double> ch(2 * n, 0.0);
  for (std::size_t i = 1; i < n; ++i) ch[i] = 1.0;       // step at sample 1
  for (std::size_t i = 0; i < n; ++i) ch[n + i] = 0.5;   // constant channel
  GridGeometry g{1, 2, 3.25, 4.0};
  const SensorTrace trace(g, rate, n, ch, TraceInfo{});
  const auto out = preprocess(trace, fc);
  const auto step = out.channel(0);
  const double peak = 1.0 - std::exp(-2.0 * M_PI * fc * static_cast<double>(n - 1) / rate);
  for (std::size_t i = 0; i < n; ++i) {
    const double expected = (1.0 - std::exp(-2.0 * M_PI * fc * static_cast<double>(i) / rate)) / peak;
    REQUIRE(step[i] == doctest::Approx(expected).epsilon(1e-12));
  }
  // filter state starts at the first sample, so a constant stays constant
  for (double v : out.channel(1)) REQUIRE(v == doctest::Approx(0.5 / peak).epsilon(1e-12));
  CHECK(*std::max_element(out.data().begin(), out.data().end()) == 1.0);
}

TEST_CASE("preprocess rejects bad cutoffs and flat traces") {
  GridGeometry g{1, 1, 3.25, 4.0};
  const SensorTrace zeros(g, 1000.0, 10, std::vector<double>(10, 0.0), TraceInfo{});
  CHECK(error_kind([&] { preprocess(zeros, 50.0); }).rfind("degenerate_input", 0) == 0);
  const SensorTrace ones(g, 1000.0, 10, std::vector<double>(10, 1.0), TraceInfo{});
  CHECK_THROWS_AS(preprocess(ones, 500.0), Error);
  CHECK_THROWS_AS(preprocess(ones, 0.0), Error);
}

TEST_CASE("sliding phase trims to [slide, retract)") {
  GridGeometry g{1, 1, 3.25, 4.0};
  std::vector<double> v(10);
  for (std::size_t i = 0; i < 10; ++i) v[i] = static_cast<double>(i) / 10.0;
  TraceInfo info;
  info.phases = PhaseMarkers{0, 2, 4, 7};
  const SensorTrace t(g, 1000.0, 10, v, info);
  const auto s = sliding_phase(t);
  REQUIRE(s.num_samples() == 3);
  CHECK(s.channel(0)[0] == doctest::Approx(0.4));
  CHECK(s.channel(0)[2] == doctest::Approx(0.6));
}

TEST_CASE("non-finite samples are rejected") {
  GridGeometry g{1, 1, 3.25, 4.0};
  CHECK_THROWS_AS(SensorTrace(g, 1000.0, 2, {0.0, std::nan("")}, TraceInfo{}), Error);
}
