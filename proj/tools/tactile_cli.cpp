// Batch command-line front end: generate, encode, features, classify,
// experiment. Failures print {"error": {"kind", "message"}} on stderr and
// exit non-zero.

#include <algorithm>
#include <chrono>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "tactile/common.hpp"
#include "tactile/features_io.hpp"
#include "tactile/harness.hpp"
#include "tactile/simd/kernels.hpp"

namespace fs = std::filesystem;
using tactile::harness::ExperimentConfig;
using tactile::harness::Json;

namespace {

int report_error(const std::string& kind, const std::string& message, int code) {
  Json err{{"error", {{"kind", kind}, {"message", message}}}};
  std::cerr << err.dump() << "\n";
  return code;
}

std::vector<fs::path> csv_inputs(const fs::path& in) {
  std::vector<fs::path> files;
  if (fs::is_directory(in)) {
    for (const auto& e : fs::directory_iterator(in))
      if (e.is_regular_file() && e.path().extension() == ".csv") files.push_back(e.path());
    std::sort(files.begin(), files.end());
  } else if (fs::is_regular_file(in)) {
    files.push_back(in);
  }
  if (files.empty()) tactile::fail("io_error", "no CSV inputs found at " + in.string());
  return files;
}

std::string trial_stem(const std::string& label, double velocity, int trial) {
  std::ostringstream s;
  s << label << "_v" << velocity << "_t" << trial;
  std::string out = s.str();
  std::replace(out.begin(), out.end(), '.', 'p');
  return out;
}

void write_text(const fs::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary);
  if (!out) tactile::fail("io_error", "cannot write " + p.string());
  out << text;
}

std::string read_text(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) tactile::fail("io_error", "cannot open " + p.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

std::uint64_t trace_seed_of(const ExperimentConfig& cfg, const tactile::SensorTrace& t) {
  const auto& c = cfg.corpus;
  std::size_t ti = 0, vi = 0;
  while (ti < c.textures.size() && c.textures[ti].label != t.info().label) ++ti;
  while (vi < c.velocities.size() && c.velocities[vi] != t.info().velocity_mm_s) ++vi;
  return tactile::harness::trace_seed(cfg.master_seed, ti, vi, t.info().trial);
}

ExperimentConfig config_or_default(const std::string& path) {
  return path.empty() ? ExperimentConfig{} : ExperimentConfig::load(path);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Neuromorphic tactile texture classification pipeline"};
  app.require_subcommand(1);
  std::string simd = "auto";
  app.add_option("--simd", simd, "Kernel instruction set: auto, scalar, avx2")->check(CLI::IsMember({"auto", "scalar", "avx2"}));

  // generate
  auto* gen = app.add_subcommand("generate", "Write the synthetic trace corpus described by a config");
  std::string gen_config, gen_out;
  std::optional<std::uint64_t> gen_seed;
  gen->add_option("--config", gen_config, "Experiment/generator config JSON")->required();
  gen->add_option("--out", gen_out, "Output directory")->required();
  gen->add_option("--seed", gen_seed, "Master seed (overrides the config)");

  // encode
  auto* enc = app.add_subcommand("encode", "Preprocess traces and encode them into spike CSVs");
  std::string enc_in, enc_out, enc_config;
  std::optional<double> enc_cutoff, enc_gain;
  enc->add_option("--in", enc_in, "Trace CSV file or directory")->required();
  enc->add_option("--out", enc_out, "Output directory")->required();
  enc->add_option("--config", enc_config, "Config JSON supplying neuron/preprocess blocks");
  enc->add_option("--cutoff", enc_cutoff, "Low-pass cutoff in Hz");
  enc->add_option("--gain", enc_gain, "Neuron input gain");

  // features
  auto* feat = app.add_subcommand("features", "Compute feature CSVs from spike CSVs");
  std::string feat_in, feat_out, feat_mode = "glcm3d", feat_config, feat_volumes;
  std::optional<std::size_t> feat_taxel, feat_levels;
  std::optional<double> feat_window, feat_bin, feat_hi;
  feat->add_option("--in", feat_in, "Spike CSV file or directory")->required();
  feat->add_option("--out", feat_out, "Feature CSV to write")->required();
  feat->add_option("--mode", feat_mode, "taxel, glcm2d or glcm3d")->check(CLI::IsMember({"taxel", "glcm2d", "glcm3d"}));
  feat->add_option("--config", feat_config, "Config JSON supplying defaults");
  feat->add_option("--taxel", feat_taxel, "Taxel index for the single-taxel features");
  feat->add_option("--fano-window", feat_window, "Fano window in seconds");
  feat->add_option("--bin-s", feat_bin, "Voxel depth in seconds");
  feat->add_option("--levels", feat_levels, "Number of gray levels");
  feat->add_option("--quantizer-hi", feat_hi, "Frozen quantizer upper bound (Hz); fitted on the inputs if absent");
  feat->add_option("--dump-volumes", feat_volumes, "Directory for per-trial volume and MGLCM debug CSVs");

  // classify
  auto* cls = app.add_subcommand("classify", "Cross-validate k-NN on a feature CSV");
  std::string cls_in, cls_out;
  std::size_t cls_k = 5, cls_folds = 5;
  std::uint64_t cls_seed = 1;
  bool cls_raw = false;
  std::optional<double> cls_test_velocity;
  cls->add_option("--in", cls_in, "Feature CSV")->required();
  cls->add_option("--out", cls_out, "Results JSON to write")->required();
  cls->add_option("--k", cls_k, "Neighbours");
  cls->add_option("--folds", cls_folds, "Cross-validation folds");
  cls->add_option("--seed", cls_seed, "Fold-assignment seed");
  cls->add_flag("--raw", cls_raw, "Skip feature standardization");
  cls->add_option("--test-velocity", cls_test_velocity, "Hold out this velocity instead of cross-validating");

  // experiment
  auto* exp = app.add_subcommand("experiment", "Run a named experiment end to end");
  std::string exp_name, exp_config, exp_out;
  std::optional<std::uint64_t> exp_seed;
  bool exp_plots = false;
  std::vector<std::string> names = tactile::harness::experiment_names();
  names.push_back("all");
  exp->add_option("name", exp_name, "accuracy, perturbation, temporal, tor, velocity, gain or all")
      ->required()
      ->check(CLI::IsMember(names));
  exp->add_option("--config", exp_config, "Experiment config JSON")->required();
  exp->add_option("--seed", exp_seed, "Master seed (overrides the config)");
  exp->add_option("--out", exp_out, "Output directory")->required();
  exp->add_flag("--emit-plots", exp_plots, "Render SVG charts from the result tables");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return report_error("usage", e.what(), 2);
  }

  try {
    if (simd == "scalar") tactile::simd::set_isa(tactile::simd::Isa::scalar);
    if (simd == "avx2") tactile::simd::set_isa(tactile::simd::Isa::avx2);

    if (*gen) {
      auto cfg = ExperimentConfig::load(gen_config);
      if (gen_seed) cfg.master_seed = *gen_seed;
      if (!cfg.synthetic) tactile::fail("config_error", "generate needs a synthetic data source");
      fs::create_directories(gen_out);
      const auto traces = tactile::harness::corpus_traces(cfg);
      Json manifest = Json::array();
      for (const auto& t : traces) {
        const std::string file = trial_stem(t.info().label, t.info().velocity_mm_s, t.info().trial) + ".csv";
        tactile::save_trace(t, fs::path(gen_out) / file);
        manifest.push_back({{"file", file},
                            {"label", t.info().label},
                            {"velocity_mm_s", t.info().velocity_mm_s},
                            {"trial", t.info().trial},
                            {"seed", trace_seed_of(cfg, t)}});
      }
      write_text(fs::path(gen_out) / "manifest.json",
                 Json{{"data", "synthetic"}, {"seed", cfg.master_seed}, {"config", cfg.to_json()}, {"traces", manifest}}
                         .dump(2) + "\n");
      std::cout << "wrote " << traces.size() << " synthetic traces to " << gen_out << "\n";
    } else if (*enc) {
      auto cfg = config_or_default(enc_config);
      if (enc_cutoff) cfg.cutoff_hz = *enc_cutoff;
      if (enc_gain) cfg.neuron.gain = *enc_gain;
      cfg.neuron.validate();
      fs::create_directories(enc_out);
      std::size_t count = 0;
      for (const auto& f : csv_inputs(enc_in)) {
        if (f.filename() == "manifest.csv") continue;
        const auto trace = tactile::sliding_phase(tactile::load_trace(f));
        const auto spikes = tactile::encode_array(tactile::preprocess(trace, cfg.cutoff_hz), cfg.neuron);
        tactile::save_spikes(spikes, fs::path(enc_out) / f.filename());
        ++count;
      }
      std::cout << "encoded " << count << " traces into " << enc_out << "\n";
    } else if (*feat) {
      auto cfg = config_or_default(feat_config);
      if (feat_taxel) cfg.taxel = *feat_taxel;
      if (feat_window) cfg.fano_window_s = *feat_window;
      if (feat_bin) cfg.bin_s = *feat_bin;
      if (feat_levels) cfg.num_levels = *feat_levels;
      std::vector<tactile::SpikeArray> trials;
      for (const auto& f : csv_inputs(feat_in)) trials.push_back(tactile::load_spikes(f));

      std::string out;
      if (feat_mode == "taxel") {
        out = std::string(tactile::kTaxelFeatureHeader) + "\n";
        for (const auto& t : trials)
          out += tactile::taxel_feature_row(t, tactile::single_taxel_features(t, cfg.taxel, cfg.fano_window_s)) + "\n";
      } else {
        const auto mode = tactile::glcm_mode_from_string(feat_mode);
        std::vector<tactile::ResponseVolume> vols;
        for (const auto& t : trials) {
          auto v = tactile::build_volume(t, cfg.bin_s);
          vols.push_back(mode == tactile::GlcmMode::glcm2d ? tactile::collapse_time(v) : std::move(v));
        }
        const tactile::Quantizer q = feat_hi ? tactile::Quantizer{0.0, *feat_hi, cfg.num_levels}
                                             : tactile::fit_quantizer(vols, cfg.num_levels);
        const auto offsets = tactile::standard_offsets(cfg.distances);
        if (!feat_volumes.empty()) fs::create_directories(feat_volumes);
        out = std::string(tactile::kGlcmFeatureHeader) + "\n";
        for (std::size_t i = 0; i < trials.size(); ++i) {
          const auto r = tactile::glcm_features(vols[i], tactile::GlcmMode::glcm3d, q, offsets);
          out += tactile::glcm_feature_row(trials[i], mode, r.features) + "\n";
          if (!feat_volumes.empty()) {
            const auto stem = trial_stem(trials[i].info.label, trials[i].info.velocity_mm_s, trials[i].info.trial);
            write_text(fs::path(feat_volumes) / (stem + "_volume.csv"), tactile::format_volume_csv(vols[i], q));
            write_text(fs::path(feat_volumes) / (stem + "_mglcm.csv"),
                       tactile::format_mean_glcm_csv(tactile::mean_glcm(tactile::quantize(vols[i], q), offsets)));
          }
        }
        std::cerr << "quantizer: lo=" << q.lo << " hi=" << q.hi << " levels=" << q.levels << "\n";
      }
      write_text(feat_out, out);
    } else if (*cls) {
      const auto data = tactile::parse_feature_csv(read_text(cls_in));
      ExperimentConfig cfg;
      cfg.knn = {cls_k, !cls_raw};
      cfg.folds = cls_folds;
      tactile::CvResult r;
      std::string policy;
      if (cls_test_velocity) {
        const auto [train, test] = tactile::split_by_velocity(data, *cls_test_velocity);
        r.confusion = tactile::evaluate_split(train, test, cfg.knn, data.labels());
        r.accuracy = r.confusion.accuracy();
        r.per_fold = {r.accuracy};
        std::ostringstream p;
        p << "holdout@" << *cls_test_velocity;
        policy = p.str();
      } else {
        r = tactile::cross_validate(data, cfg.knn, cls_folds, cls_seed);
        policy = "cv";
      }
      const std::string approach = data.feature_names.front() == "msr" ? "single_taxel" : "glcm";
      const auto payload = tactile::harness::classification_json(approach, policy, cfg, cls_seed, r);
      write_text(cls_out, payload.dump(2) + "\n");
      fs::path cm = cls_out;
      cm.replace_extension(".confusion.csv");
      write_text(cm, r.confusion.to_csv());
      std::cout << "accuracy " << r.accuracy << "\n";
    } else if (*exp) {
      auto cfg = ExperimentConfig::load(exp_config);
      if (exp_seed) cfg.master_seed = *exp_seed;
      const auto start = std::chrono::steady_clock::now();
      tactile::harness::Tables tables;
      const auto payload = tactile::harness::run_experiment(exp_name, cfg, tables);
      const double runtime =
          std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
      tactile::harness::write_report(exp_out, payload, tables, exp_plots);
      const std::time_t now = std::time(nullptr);
      char stamp[32];
      std::strftime(stamp, sizeof stamp, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
      write_text(fs::path(exp_out) / "metadata.json",
                 Json{{"finished_utc", stamp},
                      {"runtime_s", runtime},
                      {"simd", std::string(tactile::simd::isa_name(tactile::simd::active_isa()))}}
                         .dump(2) + "\n");
      std::cout << "experiment " << exp_name << " finished in " << runtime << " s; results in " << exp_out << "\n";
    }
  } catch (const tactile::Error& e) {
    return report_error(e.kind(), e.what(), 1);
  } catch (const std::exception& e) {
    return report_error("internal_error", e.what(), 1);
  }
  return 0;
}
