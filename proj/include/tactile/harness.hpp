#pragma once

// End-to-end experiment orchestration: corpus construction (synthetic or
// recorded traces), the single-taxel and GLCM pipelines, and the five
// ablation studies plus the gain sweep. Every experiment returns a
// deterministic JSON payload and the tables behind it.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "tactile/classify.hpp"
#include "tactile/glcm.hpp"
#include "tactile/neuron.hpp"
#include "tactile/signal.hpp"
#include "tactile/spikestats.hpp"
#include "tactile/volume.hpp"

namespace tactile::harness {

using Json = nlohmann::ordered_json;

struct CorpusSpec {
  GridGeometry geometry;
  std::vector<TextureParams> textures;
  std::vector<double> velocities{5.0, 10.0, 15.0};
  int trials = 20;
  double slide_distance_mm = 90.0;
  double sample_rate_hz = 1000.0;
  double noise_sd = 0.02;
};

struct ExperimentConfig {
  bool synthetic = true;
  std::filesystem::path trace_dir;
  CorpusSpec corpus;

  double cutoff_hz = 50.0;
  NeuronParams neuron;
  double bin_s = 0.2;
  std::size_t num_levels = 8;
  std::vector<int> distances{1, 2, 4, 8};
  std::size_t taxel = 5;  // grid (1, 1)
  double fano_window_s = 0.5;
  EvaluationOptions knn;
  std::size_t folds = 5;

  std::vector<std::size_t> perturbation_n{0, 2, 4, 8, 12, 16};
  std::size_t perturbation_repeats = 10;
  std::vector<double> tor_fractions{0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0};
  std::vector<double> gains{5.0, 8.0, 10.0, 12.0, 15.0, 20.0};
  double isi_bin_s = 0.01;
  double isi_max_s = 1.0;
  double gain_velocity = 5.0;

  std::uint64_t master_seed = 1;

  /// Missing keys keep their defaults; unknown keys are rejected.
  static ExperimentConfig from_json(const Json& j, const std::filesystem::path& base_dir = {});
  static ExperimentConfig load(const std::filesystem::path& path);
  Json to_json() const;
  void validate() const;
};

// Seed tags of the counter scheme: derive_seed(master, tag, indices...).
enum SeedTag : std::uint64_t {
  kSeedTrace = 1,
  kSeedFolds = 2,
  kSeedPerturbation = 3,
  kSeedVelocityHoldout = 4,
};

std::uint64_t trace_seed(std::uint64_t master, std::size_t texture, std::size_t velocity, int trial);
std::uint64_t fold_seed(std::uint64_t master, std::size_t velocity_index);
std::uint64_t perturbation_seed(std::uint64_t master, std::size_t n, std::size_t repeat);

/// Raw analog traces of the corpus: generated or loaded, trimmed to the
/// sliding phase.
std::vector<SensorTrace> corpus_traces(const ExperimentConfig& cfg);

struct Corpus {
  std::vector<SpikeArray> trials;
  std::vector<std::string> labels;  ///< sorted
  std::vector<double> velocities;   ///< ascending
  bool synthetic = true;

  /// Indices of the trials recorded at `velocity`.
  std::vector<std::size_t> at_velocity(double velocity) const;
};

/// Preprocess and encode every trace.
Corpus encode_corpus(const std::vector<SensorTrace>& traces, const ExperimentConfig& cfg);
Corpus build_corpus(const ExperimentConfig& cfg);

// ---------------------------------------------------------------------------
// Pipelines

Dataset single_taxel_dataset(const std::vector<SpikeArray>& trials, std::size_t taxel, double window_s);

/// Volume-based dataset rows with fold-dependent features: the quantizer is
/// fitted on `train` volumes only and applied to both sides.
struct VolumeSplit {
  Dataset train;
  Dataset test;
  Quantizer quantizer;
};
VolumeSplit glcm_split(const std::vector<ResponseVolume>& volumes, std::span<const std::size_t> train_idx,
                       std::span<const std::size_t> test_idx, std::size_t num_levels,
                       std::span<const OffsetVector> offsets);

/// Stratified cross-validation of the GLCM pipeline over pre-built volumes
/// (3-D volumes, truncated volumes, or collapsed single-slab volumes).
CvResult cross_validate_volumes(const std::vector<ResponseVolume>& volumes, const ExperimentConfig& cfg,
                                std::uint64_t seed, std::vector<Quantizer>* quantizers = nullptr);

CvResult cross_validate_taxel(const std::vector<SpikeArray>& trials, const ExperimentConfig& cfg,
                              std::uint64_t seed);

// ---------------------------------------------------------------------------
// Experiments. Each returns a JSON payload; `tables` receives CSV text keyed
// by file name.

using Tables = std::map<std::string, std::string>;

Json run_accuracy_comparison(const Corpus& corpus, const ExperimentConfig& cfg, Tables& tables);
Json run_perturbation_study(const Corpus& corpus, const ExperimentConfig& cfg, Tables& tables);
Json run_temporal_collapse_study(const Corpus& corpus, const ExperimentConfig& cfg, Tables& tables);
Json run_tor_study(const Corpus& corpus, const ExperimentConfig& cfg, Tables& tables);
Json run_velocity_invariance_study(const Corpus& corpus, const ExperimentConfig& cfg, Tables& tables);
Json run_gain_sweep(const std::vector<SensorTrace>& traces, const ExperimentConfig& cfg, Tables& tables);

inline const std::vector<std::string>& experiment_names() {
  static const std::vector<std::string> names{"accuracy", "perturbation", "temporal", "tor", "velocity", "gain"};
  return names;
}

/// Runs one named experiment (or "all") and returns its payload, with the
/// config echo and seed attached.
Json run_experiment(const std::string& name, const ExperimentConfig& cfg, Tables& tables);

/// JSON block for one classification result.
Json classification_json(const std::string& approach, const std::string& velocity_policy,
                         const ExperimentConfig& cfg, std::uint64_t seed, const CvResult& r);

/// Writes results.json, every table, and (optionally) SVG plots into `dir`.
void write_report(const std::filesystem::path& dir, const Json& payload, const Tables& tables,
                  bool emit_plots);

}  // namespace tactile::harness
