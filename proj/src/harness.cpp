#include "tactile/harness.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "tactile/common.hpp"
#include "tactile/plot.hpp"

namespace tactile::harness {

namespace {

bool same_velocity(double a, double b) { return std::abs(a - b) <= 1e-9 * std::max(1.0, std::abs(a)); }

void check_keys(const Json& j, const std::string& where, std::initializer_list<const char*> allowed) {
  if (!j.is_object()) fail("config_error", where + " must be a JSON object");
  for (auto it = j.begin(); it != j.end(); ++it) {
    bool ok = false;
    for (const char* a : allowed) ok = ok || it.key() == a;
    if (!ok) fail("config_error", "unknown key '" + it.key() + "' in " + where);
  }
}

template <typename T>
void read(const Json& j, const char* key, T& out) {
  if (j.contains(key)) {
    try {
      out = j.at(key).get<T>();
    } catch (const nlohmann::json::exception& e) {
      fail("config_error", std::string("bad value for '") + key + "': " + e.what());
    }
  }
}

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

std::string pct(double acc) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", acc * 100.0);
  return buf;
}

std::string velocity_tag(double v) {
  std::string s = fmt(v);
  std::replace(s.begin(), s.end(), '.', 'p');
  return "v" + s;
}

TextureParams texture_from_json(const Json& j) {
  check_keys(j, "texture", {"label", "spatial_period_mm", "amplitude", "harmonic_weights", "roughness_noise_sd",
                            "roughness_scale_mm", "baseline", "profile_seed"});
  TextureParams t;
  read(j, "label", t.label);
  read(j, "spatial_period_mm", t.spatial_period_mm);
  read(j, "amplitude", t.amplitude);
  read(j, "harmonic_weights", t.harmonic_weights);
  read(j, "roughness_noise_sd", t.roughness_noise_sd);
  read(j, "roughness_scale_mm", t.roughness_scale_mm);
  read(j, "baseline", t.baseline);
  read(j, "profile_seed", t.profile_seed);
  if (t.label.empty()) fail("config_error", "every texture needs a label");
  t.validate();
  return t;
}

Json texture_to_json(const TextureParams& t) {
  return Json{{"label", t.label},
              {"spatial_period_mm", t.spatial_period_mm},
              {"amplitude", t.amplitude},
              {"harmonic_weights", t.harmonic_weights},
              {"roughness_noise_sd", t.roughness_noise_sd},
              {"roughness_scale_mm", t.roughness_scale_mm},
              {"baseline", t.baseline},
              {"profile_seed", t.profile_seed}};
}

std::vector<ResponseVolume> volumes_of(const std::vector<SpikeArray>& trials, double bin_s) {
  std::vector<ResponseVolume> out;
  out.reserve(trials.size());
  for (const auto& t : trials) out.push_back(build_volume(t, bin_s));
  return out;
}

std::vector<SpikeArray> select(const std::vector<SpikeArray>& all, const std::vector<std::size_t>& idx) {
  std::vector<SpikeArray> out;
  out.reserve(idx.size());
  for (auto i : idx) out.push_back(all[i]);
  return out;
}

Dataset label_skeleton(const std::vector<ResponseVolume>& volumes) {
  Dataset d;
  d.feature_names = {"contrast", "correlation", "asm"};
  for (const auto& v : volumes) d.rows.push_back({{0.0}, v.info().label, v.info().velocity_mm_s, v.info().trial});
  return d;
}

std::string velocity_list(const std::vector<double>& vs) {
  std::string s = "{";
  for (std::size_t i = 0; i < vs.size(); ++i) s += (i ? "," : "") + fmt(vs[i]);
  return s + "}";
}

}  // namespace

// ---------------------------------------------------------------------------
// Config

ExperimentConfig ExperimentConfig::from_json(const Json& j, const std::filesystem::path& base_dir) {
  check_keys(j, "config", {"data", "synthetic", "preprocess", "neuron", "volume", "glcm", "single_taxel", "knn",
                           "experiments", "seed", "comment"});
  ExperimentConfig cfg;
  if (j.contains("data")) {
    const auto& d = j["data"];
    check_keys(d, "data", {"source", "dir"});
    std::string source = "synthetic";
    read(d, "source", source);
    if (source == "traces") {
      cfg.synthetic = false;
      std::string dir;
      read(d, "dir", dir);
      if (dir.empty()) fail("config_error", "data.dir is required for source 'traces'");
      cfg.trace_dir = std::filesystem::path(dir).is_absolute() ? std::filesystem::path(dir) : base_dir / dir;
    } else if (source != "synthetic") {
      fail("config_error", "data.source must be 'synthetic' or 'traces'");
    }
  }
  if (j.contains("synthetic")) {
    const auto& s = j["synthetic"];
    check_keys(s, "synthetic", {"geometry", "velocities", "trials", "slide_distance_mm", "sample_rate_hz",
                                "noise_sd", "textures"});
    auto& c = cfg.corpus;
    if (s.contains("geometry")) {
      const auto& g = s["geometry"];
      check_keys(g, "synthetic.geometry", {"rows", "cols", "pitch_mm", "active_area_mm2", "taxel_area_mm2"});
      read(g, "rows", c.geometry.rows);
      read(g, "cols", c.geometry.cols);
      read(g, "taxel_area_mm2", c.geometry.taxel_area_mm2);
      if (g.contains("active_area_mm2")) {
        double area = 0.0;
        read(g, "active_area_mm2", area);
        c.geometry = GridGeometry::from_active_area(c.geometry.rows, c.geometry.cols, area, c.geometry.taxel_area_mm2);
      }
      read(g, "pitch_mm", c.geometry.pitch_mm);
    }
    read(s, "velocities", c.velocities);
    read(s, "trials", c.trials);
    read(s, "slide_distance_mm", c.slide_distance_mm);
    read(s, "sample_rate_hz", c.sample_rate_hz);
    read(s, "noise_sd", c.noise_sd);
    if (s.contains("textures")) {
      if (!s["textures"].is_array()) fail("config_error", "synthetic.textures must be an array");
      for (const auto& t : s["textures"]) c.textures.push_back(texture_from_json(t));
    }
  }
  if (j.contains("preprocess")) {
    check_keys(j["preprocess"], "preprocess", {"cutoff_hz"});
    read(j["preprocess"], "cutoff_hz", cfg.cutoff_hz);
  }
  if (j.contains("neuron")) {
    const auto& n = j["neuron"];
    check_keys(n, "neuron", {"a", "b", "c", "d", "gain", "v_peak"});
    read(n, "a", cfg.neuron.a);
    read(n, "b", cfg.neuron.b);
    read(n, "c", cfg.neuron.c);
    read(n, "d", cfg.neuron.d);
    read(n, "gain", cfg.neuron.gain);
    read(n, "v_peak", cfg.neuron.v_peak);
  }
  if (j.contains("volume")) {
    check_keys(j["volume"], "volume", {"bin_s", "num_levels"});
    read(j["volume"], "bin_s", cfg.bin_s);
    read(j["volume"], "num_levels", cfg.num_levels);
  }
  if (j.contains("glcm")) {
    check_keys(j["glcm"], "glcm", {"distances"});
    read(j["glcm"], "distances", cfg.distances);
  }
  if (j.contains("single_taxel")) {
    check_keys(j["single_taxel"], "single_taxel", {"taxel", "fano_window_s"});
    read(j["single_taxel"], "taxel", cfg.taxel);
    read(j["single_taxel"], "fano_window_s", cfg.fano_window_s);
  }
  if (j.contains("knn")) {
    check_keys(j["knn"], "knn", {"k", "folds", "standardize"});
    read(j["knn"], "k", cfg.knn.k);
    read(j["knn"], "folds", cfg.folds);
    read(j["knn"], "standardize", cfg.knn.standardize);
  }
  if (j.contains("experiments")) {
    const auto& e = j["experiments"];
    check_keys(e, "experiments", {"perturbation", "tor", "gain"});
    if (e.contains("perturbation")) {
      check_keys(e["perturbation"], "experiments.perturbation", {"n_values", "repeats"});
      read(e["perturbation"], "n_values", cfg.perturbation_n);
      read(e["perturbation"], "repeats", cfg.perturbation_repeats);
    }
    if (e.contains("tor")) {
      check_keys(e["tor"], "experiments.tor", {"fractions"});
      read(e["tor"], "fractions", cfg.tor_fractions);
    }
    if (e.contains("gain")) {
      check_keys(e["gain"], "experiments.gain", {"gains", "bin_width_s", "max_isi_s", "velocity"});
      read(e["gain"], "gains", cfg.gains);
      read(e["gain"], "bin_width_s", cfg.isi_bin_s);
      read(e["gain"], "max_isi_s", cfg.isi_max_s);
      read(e["gain"], "velocity", cfg.gain_velocity);
    }
  }
  read(j, "seed", cfg.master_seed);
  cfg.validate();
  return cfg;
}

ExperimentConfig ExperimentConfig::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail("io_error", "cannot open config " + path.string());
  Json j;
  try {
    j = Json::parse(in, nullptr, true, true);
  } catch (const nlohmann::json::parse_error& e) {
    fail("config_error", path.string() + ": " + e.what());
  }
  return from_json(j, path.parent_path());
}

Json ExperimentConfig::to_json() const {
  Json j;
  j["data"] = synthetic ? Json{{"source", "synthetic"}} : Json{{"source", "traces"}, {"dir", trace_dir.string()}};
  if (synthetic) {
    Json textures = Json::array();
    for (const auto& t : corpus.textures) textures.push_back(texture_to_json(t));
    j["synthetic"] = Json{{"geometry",
                           {{"rows", corpus.geometry.rows},
                            {"cols", corpus.geometry.cols},
                            {"pitch_mm", corpus.geometry.pitch_mm},
                            {"taxel_area_mm2", corpus.geometry.taxel_area_mm2}}},
                          {"velocities", corpus.velocities},
                          {"trials", corpus.trials},
                          {"slide_distance_mm", corpus.slide_distance_mm},
                          {"sample_rate_hz", corpus.sample_rate_hz},
                          {"noise_sd", corpus.noise_sd},
                          {"textures", textures}};
  }
  j["preprocess"] = {{"cutoff_hz", cutoff_hz}};
  j["neuron"] = {{"a", neuron.a}, {"b", neuron.b}, {"c", neuron.c}, {"d", neuron.d}, {"gain", neuron.gain},
                 {"v_peak", neuron.v_peak}};
  j["volume"] = {{"bin_s", bin_s}, {"num_levels", num_levels}};
  j["glcm"] = {{"distances", distances}};
  j["single_taxel"] = {{"taxel", taxel}, {"fano_window_s", fano_window_s}};
  j["knn"] = {{"k", knn.k}, {"folds", folds}, {"standardize", knn.standardize}};
  j["experiments"] = {
      {"perturbation", {{"n_values", perturbation_n}, {"repeats", perturbation_repeats}}},
      {"tor", {{"fractions", tor_fractions}}},
      {"gain", {{"gains", gains}, {"bin_width_s", isi_bin_s}, {"max_isi_s", isi_max_s}, {"velocity", gain_velocity}}}};
  j["seed"] = master_seed;
  return j;
}

void ExperimentConfig::validate() const {
  neuron.validate();
  if (synthetic) {
    corpus.geometry.validate();
    if (corpus.textures.empty()) fail("config_error", "synthetic corpus needs at least one texture");
    if (corpus.velocities.empty()) fail("config_error", "synthetic corpus needs at least one velocity");
    for (double v : corpus.velocities) require(v > 0.0, "velocities must be positive");
    require(corpus.trials >= 1, "trials must be positive");
    std::set<std::string> labels;
    for (const auto& t : corpus.textures)
      if (!labels.insert(t.label).second) fail("config_error", "duplicate texture label '" + t.label + "'");
  }
  require(bin_s > 0.0, "bin_s must be positive");
  require(num_levels >= kMinLevels && num_levels <= kMaxLevels, "num_levels must lie in [2, 32]");
  require(!distances.empty(), "at least one GLCM distance is required");
  require(fano_window_s > 0.0, "Fano window must be positive");
  require(knn.k >= 1, "k must be positive");
  require(folds >= 2, "folds must be at least 2");
  for (double f : tor_fractions) require(f > 0.0 && f <= 1.0, "TOR fractions must lie in (0, 1]");
  for (auto n : perturbation_n) require(n == 0 || n >= 2, "perturbation counts must be 0 or >= 2");
  require(perturbation_repeats >= 1, "perturbation repeats must be positive");
}

// ---------------------------------------------------------------------------
// Seeds

std::uint64_t trace_seed(std::uint64_t master, std::size_t texture, std::size_t velocity, int trial) {
  return derive_seed(master, kSeedTrace, texture, velocity, static_cast<std::uint64_t>(trial));
}

std::uint64_t fold_seed(std::uint64_t master, std::size_t velocity_index) {
  return derive_seed(master, kSeedFolds, velocity_index);
}

std::uint64_t perturbation_seed(std::uint64_t master, std::size_t n, std::size_t repeat) {
  return derive_seed(master, kSeedPerturbation, n, repeat);
}

// ---------------------------------------------------------------------------
// Corpus

std::vector<SensorTrace> corpus_traces(const ExperimentConfig& cfg) {
  std::vector<SensorTrace> traces;
  if (cfg.synthetic) {
    const auto& c = cfg.corpus;
    for (std::size_t vi = 0; vi < c.velocities.size(); ++vi)
      for (std::size_t ti = 0; ti < c.textures.size(); ++ti)
        for (int trial = 0; trial < c.trials; ++trial) {
          GeneratorSettings s;
          s.velocity_mm_s = c.velocities[vi];
          s.slide_distance_mm = c.slide_distance_mm;
          s.sample_rate_hz = c.sample_rate_hz;
          s.noise_sd = c.noise_sd;
          s.seed = trace_seed(cfg.master_seed, ti, vi, trial);
          s.trial = trial;
          traces.push_back(generate_trace(c.textures[ti], c.geometry, s));
        }
    return traces;
  }
  if (!std::filesystem::is_directory(cfg.trace_dir))
    fail("io_error", "trace directory " + cfg.trace_dir.string() + " does not exist");
  std::vector<std::filesystem::path> files;
  for (const auto& e : std::filesystem::directory_iterator(cfg.trace_dir))
    if (e.is_regular_file() && e.path().extension() == ".csv") files.push_back(e.path());
  std::sort(files.begin(), files.end());
  if (files.empty()) fail("io_error", "no trace CSV files in " + cfg.trace_dir.string());
  for (const auto& f : files) traces.push_back(sliding_phase(load_trace(f)));
  std::stable_sort(traces.begin(), traces.end(), [](const SensorTrace& a, const SensorTrace& b) {
    if (a.info().velocity_mm_s != b.info().velocity_mm_s) return a.info().velocity_mm_s < b.info().velocity_mm_s;
    if (a.info().label != b.info().label) return a.info().label < b.info().label;
    return a.info().trial < b.info().trial;
  });
  return traces;
}

std::vector<std::size_t> Corpus::at_velocity(double velocity) const {
  std::vector<std::size_t> idx;
  for (std::size_t i = 0; i < trials.size(); ++i)
    if (same_velocity(trials[i].info.velocity_mm_s, velocity)) idx.push_back(i);
  return idx;
}

Corpus encode_corpus(const std::vector<SensorTrace>& traces, const ExperimentConfig& cfg) {
  Corpus corpus;
  corpus.synthetic = true;
  std::set<std::string> labels;
  for (const auto& tr : traces) {
    corpus.trials.push_back(encode_array(preprocess(tr, cfg.cutoff_hz), cfg.neuron));
    labels.insert(tr.info().label);
    corpus.synthetic = corpus.synthetic && tr.info().synthetic;
    const double v = tr.info().velocity_mm_s;
    if (std::none_of(corpus.velocities.begin(), corpus.velocities.end(), [&](double x) { return same_velocity(x, v); }))
      corpus.velocities.push_back(v);
  }
  corpus.labels.assign(labels.begin(), labels.end());
  std::sort(corpus.velocities.begin(), corpus.velocities.end());
  return corpus;
}

Corpus build_corpus(const ExperimentConfig& cfg) { return encode_corpus(corpus_traces(cfg), cfg); }

// ---------------------------------------------------------------------------
// Pipelines

Dataset single_taxel_dataset(const std::vector<SpikeArray>& trials, std::size_t taxel, double window_s) {
  Dataset d;
  d.feature_names = {"msr", "cv_isi", "fano"};
  for (const auto& t : trials) {
    const auto f = single_taxel_features(t, taxel, window_s);
    d.rows.push_back({f.vector(), t.info.label, t.info.velocity_mm_s, t.info.trial});
  }
  return d;
}

VolumeSplit glcm_split(const std::vector<ResponseVolume>& volumes, std::span<const std::size_t> train_idx,
                       std::span<const std::size_t> test_idx, std::size_t num_levels,
                       std::span<const OffsetVector> offsets) {
  std::vector<ResponseVolume> training;
  training.reserve(train_idx.size());
  for (auto i : train_idx) training.push_back(volumes[i]);
  VolumeSplit split;
  split.quantizer = fit_quantizer(training, num_levels);

  auto rows_for = [&](std::span<const std::size_t> idx) {
    Dataset d;
    d.feature_names = {"contrast", "correlation", "asm"};
    for (auto i : idx) {
      const auto& v = volumes[i];
      const auto f = glcm_features(v, GlcmMode::glcm3d, split.quantizer, offsets);
      d.rows.push_back({f.features.vector(), v.info().label, v.info().velocity_mm_s, v.info().trial});
    }
    return d;
  };
  split.train = rows_for(train_idx);
  split.test = rows_for(test_idx);
  return split;
}

CvResult cross_validate_volumes(const std::vector<ResponseVolume>& volumes, const ExperimentConfig& cfg,
                                std::uint64_t seed, std::vector<Quantizer>* quantizers) {
  const Dataset skeleton = label_skeleton(volumes);
  const auto assignment = stratified_folds(skeleton, cfg.folds, seed);
  const auto labels = skeleton.labels();
  const auto offsets = standard_offsets(cfg.distances);
  CvResult result;
  result.confusion = ConfusionMatrix(labels);
  for (std::size_t f = 0; f < cfg.folds; ++f) {
    std::vector<std::size_t> train_idx, test_idx;
    for (std::size_t i = 0; i < volumes.size(); ++i) (assignment[i] == f ? test_idx : train_idx).push_back(i);
    const auto split = glcm_split(volumes, train_idx, test_idx, cfg.num_levels, offsets);
    if (quantizers != nullptr) quantizers->push_back(split.quantizer);
    const auto cm = evaluate_split(split.train, split.test, cfg.knn, labels);
    result.per_fold.push_back(cm.accuracy());
    result.confusion.merge(cm);
  }
  result.accuracy = result.confusion.accuracy();
  return result;
}

CvResult cross_validate_taxel(const std::vector<SpikeArray>& trials, const ExperimentConfig& cfg,
                              std::uint64_t seed) {
  return cross_validate(single_taxel_dataset(trials, cfg.taxel, cfg.fano_window_s), cfg.knn, cfg.folds, seed);
}

Json classification_json(const std::string& approach, const std::string& velocity_policy,
                         const ExperimentConfig& cfg, std::uint64_t seed, const CvResult& r) {
  Json confusion = Json::array();
  const std::size_t n = r.confusion.labels().size();
  for (std::size_t i = 0; i < n; ++i) {
    Json row = Json::array();
    for (std::size_t j = 0; j < n; ++j) row.push_back(r.confusion.at(i, j));
    confusion.push_back(row);
  }
  return Json{{"approach", approach},
              {"velocity_policy", velocity_policy},
              {"k", cfg.knn.k},
              {"folds", r.per_fold.size() > 1 ? cfg.folds : std::size_t{0}},
              {"seed", seed},
              {"accuracy", r.accuracy},
              {"per_fold", r.per_fold},
              {"labels", r.confusion.labels()},
              {"confusion", confusion},
              {"standardized", cfg.knn.standardize}};
}

namespace {

Json quantizers_json(const std::vector<Quantizer>& qs) {
  Json out = Json::array();
  for (const auto& q : qs) out.push_back({{"lo", q.lo}, {"hi", q.hi}, {"levels", q.levels}});
  return out;
}

}  // namespace

// ---------------------------------------------------------------------------
// Experiments

Json run_accuracy_comparison(const Corpus& corpus, const ExperimentConfig& cfg, Tables& tables) {
  Json conditions = Json::array();
  std::string table = "velocity,single_taxel,glcm3d,change_pct\n";
  std::string plot = "velocity_mm_s,single_taxel,glcm3d\n";
  for (std::size_t vi = 0; vi < corpus.velocities.size(); ++vi) {
    const double v = corpus.velocities[vi];
    const auto trials = select(corpus.trials, corpus.at_velocity(v));
    const auto seed = fold_seed(cfg.master_seed, vi);
    const auto taxel = cross_validate_taxel(trials, cfg, seed);
    std::vector<Quantizer> qs;
    const auto glcm = cross_validate_volumes(volumes_of(trials, cfg.bin_s), cfg, seed, &qs);
    const double change = taxel.accuracy > 0.0 ? (glcm.accuracy - taxel.accuracy) / taxel.accuracy * 100.0 : 0.0;
    const std::string policy = "cv@" + fmt(v);
    Json glcm_json = classification_json("glcm3d", policy, cfg, seed, glcm);
    glcm_json["quantizers"] = quantizers_json(qs);
    conditions.push_back({{"velocity", v},
                          {"single_taxel", classification_json("single_taxel", policy, cfg, seed, taxel)},
                          {"glcm3d", glcm_json},
                          {"change_pct", change},
                          {"change_formula", "(glcm3d - single_taxel) / single_taxel * 100"}});
    table += fmt(v) + "," + fmt(taxel.accuracy) + "," + fmt(glcm.accuracy) + "," + fmt(change) + "\n";
    plot += fmt(v) + "," + pct(taxel.accuracy) + "," + pct(glcm.accuracy) + "\n";
    tables["confusion_" + velocity_tag(v) + "_single_taxel.csv"] = taxel.confusion.to_csv();
    tables["confusion_" + velocity_tag(v) + "_glcm3d.csv"] = glcm.confusion.to_csv();
  }
  tables["accuracy.csv"] = table;
  tables["plot_accuracy.csv"] = plot;
  return Json{{"experiment", "accuracy"}, {"conditions", conditions}};
}

Json run_perturbation_study(const Corpus& corpus, const ExperimentConfig& cfg, Tables& tables) {
  Json conditions = Json::array();
  std::string table = "velocity,n,mean_accuracy,sd_accuracy,min_accuracy,max_accuracy,single_taxel\n";
  for (std::size_t vi = 0; vi < corpus.velocities.size(); ++vi) {
    const double v = corpus.velocities[vi];
    const auto idx = corpus.at_velocity(v);
    const auto trials = select(corpus.trials, idx);
    const auto seed = fold_seed(cfg.master_seed, vi);
    const double reference = cross_validate_taxel(trials, cfg, seed).accuracy;
    std::string plot = "n,glcm3d,single_taxel\n";
    Json levels = Json::array();
    for (std::size_t n : cfg.perturbation_n) {
      std::vector<double> accs;
      Json draws = Json::array();
      for (std::size_t r = 0; r < cfg.perturbation_repeats; ++r) {
        const auto draw = perturbation_seed(cfg.master_seed, n, r);
        if (n == 0 && r > 0) {
          accs.push_back(accs.front());
          draws.push_back({{"seed", draw}, {"accuracy", accs.front()}});
          continue;
        }
        std::vector<ResponseVolume> vols;
        vols.reserve(trials.size());
        for (std::size_t i = 0; i < trials.size(); ++i)
          vols.push_back(build_volume(perturb_spatial(trials[i], n, derive_seed(draw, idx[i])), cfg.bin_s));
        const double acc = cross_validate_volumes(vols, cfg, seed).accuracy;
        accs.push_back(acc);
        draws.push_back({{"seed", draw}, {"accuracy", acc}});
      }
      double mean = 0.0;
      for (double a : accs) mean += a;
      mean /= static_cast<double>(accs.size());
      double var = 0.0;
      for (double a : accs) var += (a - mean) * (a - mean);
      const double sd = std::sqrt(var / static_cast<double>(accs.size()));
      const auto [mn, mx] = std::minmax_element(accs.begin(), accs.end());
      levels.push_back({{"n", n}, {"mean_accuracy", mean}, {"sd_accuracy", sd}, {"draws", draws}});
      table += fmt(v) + "," + std::to_string(n) + "," + fmt(mean) + "," + fmt(sd) + "," + fmt(*mn) + "," +
               fmt(*mx) + "," + fmt(reference) + "\n";
      plot += std::to_string(n) + "," + pct(mean) + "," + pct(reference) + "\n";
    }
    conditions.push_back({{"velocity", v},
                          {"fold_seed", seed},
                          {"single_taxel_accuracy", reference},
                          {"perturbation", levels}});
    tables["plot_perturbation_" + velocity_tag(v) + ".csv"] = plot;
  }
  tables["perturbation.csv"] = table;
  return Json{{"experiment", "perturbation"},
              {"repeats", cfg.perturbation_repeats},
              {"draw_scope", "one seed per (n, repeat); per-trial derangements seeded from it"},
              {"conditions", conditions}};
}

Json run_temporal_collapse_study(const Corpus& corpus, const ExperimentConfig& cfg, Tables& tables) {
  Json conditions = Json::array();
  std::string table = "velocity,single_taxel,glcm2d,glcm3d\n";
  std::string plot = "velocity_mm_s,single_taxel,glcm2d,glcm3d\n";
  for (std::size_t vi = 0; vi < corpus.velocities.size(); ++vi) {
    const double v = corpus.velocities[vi];
    const auto trials = select(corpus.trials, corpus.at_velocity(v));
    const auto seed = fold_seed(cfg.master_seed, vi);
    const auto vols = volumes_of(trials, cfg.bin_s);
    std::vector<ResponseVolume> flat;
    flat.reserve(vols.size());
    for (const auto& vol : vols) flat.push_back(collapse_time(vol));
    const auto taxel = cross_validate_taxel(trials, cfg, seed);
    const auto g2 = cross_validate_volumes(flat, cfg, seed);
    const auto g3 = cross_validate_volumes(vols, cfg, seed);
    const std::string policy = "cv@" + fmt(v);
    conditions.push_back({{"velocity", v},
                          {"single_taxel", classification_json("single_taxel", policy, cfg, seed, taxel)},
                          {"glcm2d", classification_json("glcm2d", policy, cfg, seed, g2)},
                          {"glcm3d", classification_json("glcm3d", policy, cfg, seed, g3)}});
    table += fmt(v) + "," + fmt(taxel.accuracy) + "," + fmt(g2.accuracy) + "," + fmt(g3.accuracy) + "\n";
    plot += fmt(v) + "," + pct(taxel.accuracy) + "," + pct(g2.accuracy) + "," + pct(g3.accuracy) + "\n";
  }
  tables["temporal.csv"] = table;
  tables["plot_temporal.csv"] = plot;
  return Json{{"experiment", "temporal"}, {"conditions", conditions}};
}

Json run_tor_study(const Corpus& corpus, const ExperimentConfig& cfg, Tables& tables) {
  Json conditions = Json::array();
  std::string table = "velocity,fraction,slabs,glcm3d,single_taxel_full\n";
  for (std::size_t vi = 0; vi < corpus.velocities.size(); ++vi) {
    const double v = corpus.velocities[vi];
    const auto trials = select(corpus.trials, corpus.at_velocity(v));
    const auto seed = fold_seed(cfg.master_seed, vi);
    const double reference = cross_validate_taxel(trials, cfg, seed).accuracy;
    const auto vols = volumes_of(trials, cfg.bin_s);
    std::vector<double> fractions = cfg.tor_fractions;
    std::sort(fractions.begin(), fractions.end());
    Json points = Json::array();
    Json tor = nullptr;
    std::string plot = "fraction,glcm3d,single_taxel_full\n";
    for (double f : fractions) {
      std::vector<ResponseVolume> cut;
      cut.reserve(vols.size());
      for (const auto& vol : vols) cut.push_back(truncate_time(vol, f));
      const double acc = cross_validate_volumes(cut, cfg, seed).accuracy;
      const std::size_t slabs = cut.front().t_bins();
      points.push_back({{"fraction", f}, {"slabs", slabs}, {"accuracy", acc}});
      if (tor.is_null() && acc >= reference) tor = f;
      table += fmt(v) + "," + fmt(f) + "," + std::to_string(slabs) + "," + fmt(acc) + "," + fmt(reference) + "\n";
      plot += fmt(f) + "," + pct(acc) + "," + pct(reference) + "\n";
    }
    const double duration = trials.front().duration_s();
    conditions.push_back({{"velocity", v},
                          {"fold_seed", seed},
                          {"single_taxel_full_accuracy", reference},
                          {"points", points},
                          {"tor_fraction", tor},
                          {"tor_seconds", tor.is_null() ? Json(nullptr) : Json(tor.get<double>() * duration)}});
    tables["plot_tor_" + velocity_tag(v) + ".csv"] = plot;
  }
  tables["tor.csv"] = table;
  return Json{{"experiment", "tor"}, {"conditions", conditions}};
}

Json run_velocity_invariance_study(const Corpus& corpus, const ExperimentConfig& cfg, Tables& tables) {
  Json conditions = Json::array();
  std::string table = "test_velocity,single_taxel,glcm3d,change_pct\n";
  std::string plot = "test_velocity_mm_s,single_taxel,glcm3d\n";
  const Dataset taxel_all = single_taxel_dataset(corpus.trials, cfg.taxel, cfg.fano_window_s);
  const auto vols = volumes_of(corpus.trials, cfg.bin_s);
  const auto offsets = standard_offsets(cfg.distances);
  const auto& labels = corpus.labels;
  for (double v : corpus.velocities) {
    const auto [taxel_train, taxel_test] = split_by_velocity(taxel_all, v);
    std::vector<std::size_t> train_idx, test_idx;
    std::vector<double> train_vels;
    for (std::size_t i = 0; i < corpus.trials.size(); ++i)
      (same_velocity(corpus.trials[i].info.velocity_mm_s, v) ? test_idx : train_idx).push_back(i);
    for (double w : corpus.velocities)
      if (!same_velocity(w, v)) train_vels.push_back(w);

    CvResult taxel;
    taxel.confusion = evaluate_split(taxel_train, taxel_test, cfg.knn, labels);
    taxel.accuracy = taxel.confusion.accuracy();
    taxel.per_fold = {taxel.accuracy};

    const auto split = glcm_split(vols, train_idx, test_idx, cfg.num_levels, offsets);
    CvResult glcm;
    glcm.confusion = evaluate_split(split.train, split.test, cfg.knn, labels);
    glcm.accuracy = glcm.confusion.accuracy();
    glcm.per_fold = {glcm.accuracy};

    const double change = taxel.accuracy > 0.0 ? (glcm.accuracy - taxel.accuracy) / taxel.accuracy * 100.0 : 0.0;
    const std::string policy = "train" + velocity_list(train_vels) + "_test" + fmt(v);
    Json glcm_json = classification_json("glcm3d", policy, cfg, 0, glcm);
    glcm_json["quantizers"] = quantizers_json({split.quantizer});
    conditions.push_back({{"test_velocity", v},
                          {"train_velocities", train_vels},
                          {"single_taxel", classification_json("single_taxel", policy, cfg, 0, taxel)},
                          {"glcm3d", glcm_json},
                          {"change_pct", change},
                          {"change_formula", "(glcm3d - single_taxel) / single_taxel * 100"}});
    table += fmt(v) + "," + fmt(taxel.accuracy) + "," + fmt(glcm.accuracy) + "," + fmt(change) + "\n";
    plot += fmt(v) + "," + pct(taxel.accuracy) + "," + pct(glcm.accuracy) + "\n";
  }
  tables["velocity.csv"] = table;
  tables["plot_velocity.csv"] = plot;
  return Json{{"experiment", "velocity"}, {"conditions", conditions}};
}

Json run_gain_sweep(const std::vector<SensorTrace>& traces, const ExperimentConfig& cfg, Tables& tables) {
  std::vector<SensorTrace> selected;
  for (const auto& t : traces)
    if (same_velocity(t.info().velocity_mm_s, cfg.gain_velocity)) selected.push_back(preprocess(t, cfg.cutoff_hz));
  if (selected.empty()) fail("invalid_argument", "no traces recorded at the gain-sweep velocity " + fmt(cfg.gain_velocity));
  const auto sweep = isi_histogram_sweep(selected, cfg.gains, cfg.neuron, cfg.isi_bin_s, cfg.isi_max_s);

  std::string hist = "gain,label,bin_start_s,count,normalized\n";
  std::string summary = "gain,label,intervals,mean_isi_s,overflow,empty\n";
  std::string plot = "label";
  for (double g : sweep.gains) plot += ",G" + fmt(g);
  plot += "\n";
  Json entries = Json::array();
  for (const auto& h : sweep.histograms) {
    for (std::size_t b = 0; b < h.counts.size(); ++b)
      hist += fmt(h.gain) + "," + h.label + "," + fmt(static_cast<double>(b) * h.bin_width_s) + "," +
              std::to_string(h.counts[b]) + "," + fmt(h.normalized[b]) + "\n";
    summary += fmt(h.gain) + "," + h.label + "," + std::to_string(h.intervals) + "," + fmt(h.mean_isi_s) + "," +
               std::to_string(h.overflow) + "," + (h.empty ? "1" : "0") + "\n";
    entries.push_back({{"gain", h.gain},
                       {"label", h.label},
                       {"intervals", h.intervals},
                       {"mean_isi_s", h.mean_isi_s},
                       {"overflow", h.overflow},
                       {"empty", h.empty},
                       {"counts", h.counts}});
  }
  for (std::size_t l = 0; l < sweep.labels.size(); ++l) {
    plot += sweep.labels[l];
    for (std::size_t g = 0; g < sweep.gains.size(); ++g) {
      const auto& h = sweep.histograms[g * sweep.labels.size() + l];
      plot += "," + fmt(h.mean_isi_s * 1000.0);
    }
    plot += "\n";
  }
  tables["gain_isi_histograms.csv"] = hist;
  tables["gain_summary.csv"] = summary;
  tables["plot_gain_mean_isi_ms.csv"] = plot;
  return Json{{"experiment", "gain"},
              {"velocity", cfg.gain_velocity},
              {"selected_gain", cfg.neuron.gain},
              {"bin_width_s", cfg.isi_bin_s},
              {"max_isi_s", cfg.isi_max_s},
              {"histograms", entries}};
}

Json run_experiment(const std::string& name, const ExperimentConfig& cfg, Tables& tables) {
  const bool all = name == "all";
  if (!all && std::find(experiment_names().begin(), experiment_names().end(), name) == experiment_names().end())
    fail("invalid_argument", "unknown experiment '" + name + "'");
  const auto traces = corpus_traces(cfg);
  Json results;
  const bool needs_corpus = all || name != "gain";
  Corpus corpus;
  if (needs_corpus) corpus = encode_corpus(traces, cfg);
  if (all || name == "accuracy") results["accuracy"] = run_accuracy_comparison(corpus, cfg, tables);
  if (all || name == "perturbation") results["perturbation"] = run_perturbation_study(corpus, cfg, tables);
  if (all || name == "temporal") results["temporal"] = run_temporal_collapse_study(corpus, cfg, tables);
  if (all || name == "tor") results["tor"] = run_tor_study(corpus, cfg, tables);
  if (all || name == "velocity") results["velocity"] = run_velocity_invariance_study(corpus, cfg, tables);
  if (all || name == "gain") results["gain"] = run_gain_sweep(traces, cfg, tables);

  bool synthetic = true;
  for (const auto& t : traces) synthetic = synthetic && t.info().synthetic;
  return Json{{"experiment", name},
              {"data", synthetic ? "synthetic" : "recorded"},
              {"seed", cfg.master_seed},
              {"config", cfg.to_json()},
              {"results", results}};
}

void write_report(const std::filesystem::path& dir, const Json& payload, const Tables& tables, bool emit_plots) {
  std::filesystem::create_directories(dir);
  auto write = [](const std::filesystem::path& p, const std::string& text) {
    std::ofstream out(p, std::ios::binary);
    if (!out) fail("io_error", "cannot write " + p.string());
    out << text;
  };
  write(dir / "results.json", payload.dump(2) + "\n");
  for (const auto& [name, text] : tables) write(dir / name, text);
  if (!emit_plots) return;
  std::filesystem::create_directories(dir / "plots");
  const std::string tag = payload.value("data", std::string("synthetic")) == "synthetic" ? " (synthetic data)" : "";
  for (const auto& [name, text] : tables) {
    if (name.rfind("plot_", 0) != 0) continue;
    const std::string stem = name.substr(5, name.size() - 5 - 4);
    const std::string y = stem.rfind("gain", 0) == 0 ? "mean ISI (ms)" : "accuracy (%)";
    write(dir / "plots" / (stem + ".svg"), plot::csv_to_svg(stem + tag, y, text));
  }
}

}  // namespace tactile::harness
