// Acceptance suite: one PASS/FAIL line per criterion, non-zero exit if any
// criterion fails. Usage: tactile_acceptance [config.json]

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "tactile/classify.hpp"
#include "tactile/common.hpp"
#include "tactile/glcm.hpp"
#include "tactile/harness.hpp"
#include "tactile/neuron.hpp"
#include "tactile/spikestats.hpp"
#include "tactile/volume.hpp"

using namespace tactile;
namespace h = tactile::harness;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;

  void check(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      if (!detail.empty()) detail += "; ";
      detail += what;
    }
  }
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string sci(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.1e", x);
  return buf;
}

std::string f2(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3f", x);
  return buf;
}

using Csv = std::vector<std::vector<std::string>>;

Csv parse_csv(const std::string& text) {
  Csv rows;
  std::istringstream in(text);
  std::string line;
  std::getline(in, line);  // header
  while (std::getline(in, line)) {
    std::vector<std::string> cells;
    std::stringstream ls(line);
    std::string c;
    while (std::getline(ls, c, ',')) cells.push_back(c);
    rows.push_back(cells);
  }
  return rows;
}

double num(const std::string& s) { return std::stod(s); }

Outcome glcm_oracle() {
  Outcome o;
  const auto t0 = std::chrono::steady_clock::now();
  std::mt19937_64 eng(101);
  const auto offs = standard_offsets();
  int volumes = 0;
  for (int rep = 0; rep < 120; ++rep) {
    const std::size_t levels = std::array<std::size_t, 3>{2, 8, 16}[rep % 3];
    const std::size_t depth = 5 + eng() % 86;
    const auto vol = oracle::random_volume(eng, levels, depth);
    for (const auto& off : offs)
      if (glcm(vol, off).counts != oracle::naive_glcm(vol, off.dx, off.dy, off.dz)) {
        o.check(false, "mismatch at volume " + std::to_string(rep));
        break;
      }
    ++volumes;
  }
  const double s = seconds_since(t0);
  o.check(s < 10.0, "took " + f2(s) + " s");
  if (o.pass) o.detail = std::to_string(volumes) + " volumes x 52 offsets exact in " + f2(s) + " s";
  return o;
}

MeanGlcm matrix(std::vector<double> p, std::size_t n) {
  MeanGlcm m;
  m.levels = n;
  m.p = std::move(p);
  m.defined = true;
  return m;
}

Outcome haralick_identities() {
  Outcome o;
  for (std::size_t n : {2, 4, 8, 16, 32}) {
    const double nd = static_cast<double>(n);
    std::vector<double> diag(n * n, 0.0), uni(n * n, 1.0 / (nd * nd));
    for (std::size_t i = 0; i < n; ++i) diag[i * n + i] = 1.0 / nd;
    const auto d = haralick(matrix(diag, n));
    o.check(d.contrast == 0.0, "diag contrast");
    o.check(std::abs(d.correlation - 1.0) <= 1e-9, "diag correlation");
    o.check(std::abs(d.asm_ - 1.0 / nd) <= 1e-12, "diag asm");
    const auto u = haralick(matrix(uni, n));
    o.check(std::abs(u.asm_ - 1.0 / (nd * nd)) <= 1e-12, "uniform asm");
    o.check(std::abs(u.correlation) <= 1e-9, "uniform correlation");
  }
  std::mt19937_64 eng(202);
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  double worst = 0.0;
  for (int rep = 0; rep < 500; ++rep) {
    const std::size_t n = 2 + static_cast<std::size_t>(rep % 31);
    std::vector<double> p(n * n);
    double s = 0.0;
    for (auto& v : p) s += (v = u01(eng));
    for (auto& v : p) v /= s;
    const auto f = haralick(matrix(p, n));
    const auto r = oracle::direct_haralick(p, n);
    worst = std::max({worst, std::abs(f.contrast - r.contrast) / std::max(1.0, r.contrast),
                      std::abs(f.correlation - r.correlation), std::abs(f.asm_ - r.asm_)});
  }
  o.check(worst <= 1e-12, "max deviation " + sci(worst));
  if (o.pass) o.detail = "identities hold; 500 random matrices within " + sci(worst);
  return o;
}

Outcome neuron_dynamics() {
  Outcome o;
  const auto silent = encode(std::vector<double>(10000, 0.0), 1000.0, NeuronParams{});
  o.check(silent.size() == 0, "zero input fired");
  NeuronParams p;
  p.gain = 1.0;
  const auto t = encode(std::vector<double>(10000, 10.0), 1000.0, p);
  o.check(t.size() > 10, "no tonic spiking");
  for (std::size_t k = 2; k + 1 < t.size(); ++k)
    if (t.times_s[k + 1] - t.times_s[k] < t.times_s[k] - t.times_s[k - 1] - 1e-12) {
      o.check(false, "ISI decreased at spike " + std::to_string(k));
      break;
    }
  const auto ref = oracle::reference_izhikevich(10.0, 10.0);
  int worst = 0;
  for (int s = 0; s < 10; ++s) {
    auto count = [s](const std::vector<double>& v) {
      return static_cast<int>(std::count_if(v.begin(), v.end(), [s](double x) { return x >= s && x < s + 1; }));
    };
    worst = std::max(worst, std::abs(count(t.times_s) - count(ref)));
  }
  o.check(worst <= 1, "per-second count differs by " + std::to_string(worst));
  if (o.pass)
    o.detail = std::to_string(t.size()) + " spikes vs reference " + std::to_string(ref.size()) +
               ", worst per-second gap " + std::to_string(worst);
  return o;
}

Outcome spike_statistics() {
  Outcome o;
  // 0.1 s windows give 1000 counts per train, so the Fano estimate has an
  // sd near 0.045; the 0.5 s default window is checked on the pooled mean.
  double cv_lo = 9, cv_hi = 0, ff_lo = 9, ff_hi = 0, pooled = 0;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const auto t = oracle::poisson_train(20.0, 100.0, seed);
    const auto cv = cv_isi(t);
    const auto ff = fano(t, 0.1);
    pooled += fano(t, 0.5).value / 10.0;
    o.check(cv.defined && std::abs(cv.value - 1.0) <= 0.1, "Poisson CV " + f2(cv.value));
    o.check(ff.defined && std::abs(ff.value - 1.0) <= 0.2, "Poisson Fano " + f2(ff.value));
    cv_lo = std::min(cv_lo, cv.value), cv_hi = std::max(cv_hi, cv.value);
    ff_lo = std::min(ff_lo, ff.value), ff_hi = std::max(ff_hi, ff.value);
  }
  o.check(std::abs(pooled - 1.0) <= 0.1, "pooled 0.5 s Fano " + f2(pooled));
  for (int isi_ms : {10, 25, 50, 100}) {
    SpikeTrain t;
    t.duration_s = 20.0;
    for (int k = 0; (3 + k * isi_ms) < 20000; ++k) t.times_s.push_back((3.0 + k * isi_ms) / 1000.0);
    const auto cv = cv_isi(t);
    const auto ff = fano(t, 0.5);  // an integer multiple of each ISI
    o.check(cv.defined && cv.value < 1e-12, "periodic CV " + std::to_string(cv.value));
    o.check(ff.defined && ff.value == 0.0, "periodic Fano " + std::to_string(ff.value));
  }
  if (o.pass)
    o.detail = "Poisson CV in [" + f2(cv_lo) + ", " + f2(cv_hi) + "], Fano in [" + f2(ff_lo) + ", " + f2(ff_hi) +
               "], pooled 0.5 s Fano " + f2(pooled) + "; periodic CV = Fano = 0";
  return o;
}

Dataset rows_to_dataset(const std::vector<std::vector<double>>& X, const std::vector<std::string>& y) {
  Dataset d;
  for (std::size_t j = 0; j < X.front().size(); ++j) d.feature_names.push_back("f" + std::to_string(j));
  for (std::size_t i = 0; i < X.size(); ++i) d.rows.push_back({X[i], y[i], 5.0, static_cast<int>(i)});
  return d;
}

Outcome knn_oracle() {
  Outcome o;
  std::mt19937_64 eng(303);
  int mismatches = 0, cases = 0;
  for (int rep = 0; rep < 1500; ++rep) {
    const std::size_t n = 1 + eng() % 40, dim = 1 + eng() % 5, labels = 1 + eng() % 5;
    const bool lattice = rep % 2 == 0;
    std::uniform_int_distribution<int> grid(0, 2);
    std::normal_distribution<double> real(0.0, 1.0);
    std::vector<std::vector<double>> X(n, std::vector<double>(dim));
    std::vector<std::string> y(n);
    for (std::size_t i = 0; i < n; ++i) {
      for (auto& v : X[i]) v = lattice ? grid(eng) : real(eng);
      y[i] = "L" + std::to_string(eng() % labels);
    }
    std::vector<double> q(dim);
    for (auto& v : q) v = lattice ? grid(eng) : real(eng);
    const std::size_t k = 1 + eng() % n;
    mismatches += knn_predict(rows_to_dataset(X, y), q, k) != oracle::brute_knn(X, y, q, k);
    ++cases;
  }
  o.check(mismatches == 0, std::to_string(mismatches) + " oracle mismatches");
  double lo = 1, hi = 0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto d = oracle::permuted_labels_dataset(5000 + seed);
    const double acc = cross_validate(d, EvaluationOptions{}, 5, seed).accuracy;
    lo = std::min(lo, acc), hi = std::max(hi, acc);
    o.check(std::abs(acc - 0.125) <= 0.1, "null accuracy " + f2(acc));
  }
  if (o.pass)
    o.detail = std::to_string(cases) + " cases exact; null accuracy in [" + f2(lo) + ", " + f2(hi) + "] (1/L = 0.125)";
  return o;
}

Outcome trends(const h::Tables& t, double runtime_s) {
  Outcome o;
  std::ostringstream d;
  // (a) 3D beats single taxel by 5 points at every velocity
  for (const auto& r : parse_csv(t.at("accuracy.csv"))) {
    const double single = num(r[1]), g3 = num(r[2]);
    o.check(g3 >= single + 0.05, "(a) v=" + r[0] + " 3D " + f2(g3) + " vs single " + f2(single));
    d << "a:v" << r[0] << " " << f2(single) << "/" << f2(g3) << " ";
  }
  // (b) 2D below 3D
  for (const auto& r : parse_csv(t.at("temporal.csv"))) {
    const double g2 = num(r[2]), g3 = num(r[3]);
    o.check(g2 < g3, "(b) v=" + r[0] + " 2D " + f2(g2) + " vs 3D " + f2(g3));
    d << "b:v" << r[0] << " " << f2(g2) << "<" << f2(g3) << " ";
  }
  // (c) perturbation curve
  std::map<std::string, std::vector<double>> curves;
  for (const auto& r : parse_csv(t.at("perturbation.csv"))) curves[r[0]].push_back(num(r[2]));
  for (const auto& [v, acc] : curves) {
    double floor = acc.front();
    for (std::size_t i = 1; i < acc.size(); ++i) {
      o.check(acc[i] <= floor + 0.03, "(c) v=" + v + " rises to " + f2(acc[i]));
      floor = std::min(floor, acc[i]);
    }
    o.check(acc.front() - acc.back() >= 0.10, "(c) v=" + v + " drop " + f2(acc.front() - acc.back()));
    d << "c:v" << v << " drop " << f2(acc.front() - acc.back()) << " ";
  }
  // (d) a truncated signal reaches the full single-taxel reference
  std::map<std::string, bool> reached;
  for (const auto& r : parse_csv(t.at("tor.csv"))) {
    auto& ok = reached[r[0]];
    if (num(r[1]) < 1.0 && num(r[3]) >= num(r[4])) ok = true;
  }
  bool any = false;
  for (const auto& [v, ok] : reached) {
    any = any || ok;
    d << "d:v" << v << (ok ? " yes " : " no ");
  }
  o.check(any, "(d) no fraction below 1.0 meets the reference");
  // (e) held-out velocity
  for (const auto& r : parse_csv(t.at("velocity.csv"))) {
    const double single = num(r[1]), g3 = num(r[2]);
    o.check(g3 > single, "(e) held-out v=" + r[0] + " 3D " + f2(g3) + " vs single " + f2(single));
    d << "e:v" << r[0] << " " << f2(single) << "/" << f2(g3) << " ";
  }
  o.check(runtime_s < 300.0, "runtime " + f2(runtime_s) + " s");
  d << "runtime " << f2(runtime_s) << " s";
  if (o.pass) o.detail = d.str();
  return o;
}

Outcome conservation() {
  Outcome o;
  const auto offs = standard_offsets();
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    std::mt19937_64 eng(9000 + seed);
    SpikeArray a;
    a.trains.resize(16);
    const double duration = 2.0 + static_cast<double>(eng() % 80) / 10.0;
    for (std::size_t t = 0; t < 16; ++t)
      a.trains[t] = oracle::poisson_train(1.0 + static_cast<double>(eng() % 40), duration, eng());
    const auto vol = build_volume(a, 0.2);
    double mass = 0.0;
    for (double x : vol.values()) mass += x * vol.bin_s();
    std::size_t spikes = 0;
    for (const auto& t : a.trains)
      for (double s : t.times_s) spikes += bin_index(s, 0.2) < vol.t_bins();
    o.check(std::abs(mass - static_cast<double>(spikes)) <= 1e-9 * std::max<double>(1.0, spikes),
            "mass seed " + std::to_string(seed));

    const std::size_t n = std::array<std::size_t, 5>{2, 4, 8, 12, 16}[seed % 5];
    const auto b = perturb_spatial(a, n, seed);
    std::vector<std::vector<double>> before, after;
    std::size_t moved = 0;
    for (std::size_t t = 0; t < 16; ++t) {
      before.push_back(a.trains[t].times_s);
      after.push_back(b.trains[t].times_s);
      moved += a.trains[t].times_s != b.trains[t].times_s;
    }
    std::sort(before.begin(), before.end());
    std::sort(after.begin(), after.end());
    o.check(before == after && moved == n, "perturbation seed " + std::to_string(seed));

    const auto q = fit_quantizer(std::vector<ResponseVolume>{vol}, 8);
    const auto m = mean_glcm(quantize(vol, q), offs);
    double s = 0.0;
    for (double p : m.p) s += p;
    o.check(m.defined && std::abs(s - 1.0) <= 1e-12, "MGLCM sum seed " + std::to_string(seed));

    std::normal_distribution<double> nd(0.0, 1.0);
    Dataset d, scaled;
    d.feature_names = scaled.feature_names = {"a", "b", "c"};
    const double c = std::uniform_real_distribution<double>(0.01, 100.0)(eng);
    for (int i = 0; i < 30; ++i) {
      std::vector<double> x{nd(eng), nd(eng), nd(eng)};
      const std::string label = "L" + std::to_string(i % 3);
      d.rows.push_back({x, label, 5.0, i});
      for (auto& v : x) v *= c;
      scaled.rows.push_back({x, label, 5.0, i});
    }
    for (int k = 0; k < 10; ++k) {
      std::vector<double> x{nd(eng), nd(eng), nd(eng)}, xs = x;
      for (auto& v : xs) v *= c;
      if (knn_predict(d, x, 5) != knn_predict(scaled, xs, 5)) {
        o.check(false, "rescaling seed " + std::to_string(seed));
        break;
      }
    }
  }
  if (o.pass) o.detail = "mass, multiset, MGLCM sum and rescaling invariance hold on 50 seeds";
  return o;
}

}  // namespace

int main(int argc, char** argv) {
  const std::string config = argc > 1 ? argv[1] : TACTILE_DEFAULT_CONFIG;
  std::vector<std::pair<std::string, std::function<Outcome()>>> criteria;
  h::Json first;
  h::Tables tables;
  double runtime = 0.0;
  std::string load_error;
  criteria.emplace_back("1 GLCM oracle equivalence", glcm_oracle);
  criteria.emplace_back("2 Haralick identities", haralick_identities);
  criteria.emplace_back("3 neuron dynamics", neuron_dynamics);
  criteria.emplace_back("4 spike statistics", spike_statistics);
  criteria.emplace_back("5 k-NN oracle equivalence", knn_oracle);
  criteria.emplace_back("6 end-to-end trends", [&] {
    const auto t0 = std::chrono::steady_clock::now();
    const auto cfg = h::ExperimentConfig::load(config);
    first = h::run_experiment("all", cfg, tables);
    runtime = seconds_since(t0);
    return trends(tables, runtime);
  });
  criteria.emplace_back("7 determinism", [&] {
    Outcome o;
    const auto cfg = h::ExperimentConfig::load(config);
    h::Tables again;
    if (first.is_null()) first = h::run_experiment("all", cfg, tables);
    const auto second = h::run_experiment("all", cfg, again);
    o.check(first.dump() == second.dump(), "results payload differs");
    o.check(tables == again, "tables differ");
    if (o.pass) o.detail = "two runs of every experiment, " + std::to_string(first.dump().size()) + " payload bytes identical";
    return o;
  });
  criteria.emplace_back("8 conservation and invariance", conservation);

  int failed = 0;
  for (const auto& [name, fn] : criteria) {
    Outcome o;
    try {
      o = fn();
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail = std::string("exception: ") + e.what();
    }
    failed += !o.pass;
    std::cout << (o.pass ? "PASS " : "FAIL ") << name << ": " << o.detail << std::endl;
  }
  std::cout << (failed ? "FAILED " : "ALL PASSED ") << (criteria.size() - failed) << "/" << criteria.size() << "\n";
  return failed ? 1 : 0;
}
