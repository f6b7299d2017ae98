#pragma once

// Euclidean k-nearest-neighbour classification, stratified k-fold
// cross-validation, velocity hold-out splits and confusion matrices.

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace tactile {

struct Sample {
  std::vector<double> features;
  std::string label;
  double velocity = 0.0;
  int trial = 0;
};

struct Dataset {
  std::vector<std::string> feature_names;
  std::vector<Sample> rows;

  std::size_t size() const noexcept { return rows.size(); }
  std::size_t dim() const noexcept { return rows.empty() ? feature_names.size() : rows.front().features.size(); }
  /// Sorted distinct labels; this is the label order used everywhere.
  std::vector<std::string> labels() const;
  Dataset subset(std::span<const std::size_t> indices) const;
  void validate() const;
};

/// Per-feature z-scoring with statistics from a training set. Features with
/// zero spread are centred but not scaled.
struct Standardizer {
  std::vector<double> mean;
  std::vector<double> scale;

  static Standardizer fit(const Dataset& train);
  std::vector<double> apply(std::span<const double> x) const;
  Dataset apply(const Dataset& data) const;
};

class ConfusionMatrix {
 public:
  ConfusionMatrix() = default;
  explicit ConfusionMatrix(std::vector<std::string> labels);

  const std::vector<std::string>& labels() const noexcept { return labels_; }
  /// counts()[true * L + predicted]
  const std::vector<std::uint64_t>& counts() const noexcept { return counts_; }
  std::uint64_t at(std::size_t truth, std::size_t predicted) const {
    return counts_[truth * labels_.size() + predicted];
  }
  void add(const std::string& truth, const std::string& predicted);
  void merge(const ConfusionMatrix& other);
  std::uint64_t total() const noexcept;
  std::uint64_t correct() const noexcept;
  double accuracy() const noexcept;
  std::string to_csv() const;

 private:
  std::size_t index_of(const std::string& label) const;

  std::vector<std::string> labels_;
  std::vector<std::uint64_t> counts_;
};

/// Brute-force k-NN over a fixed training set. Distance ties keep training
/// order; vote ties go to the tied class whose nearest neighbour is closest,
/// then to the smaller label.
class KnnClassifier {
 public:
  KnnClassifier(const Dataset& train, std::size_t k);

  std::string predict(std::span<const double> query) const;
  std::size_t k() const noexcept { return k_; }

 private:
  std::size_t k_;
  std::size_t dim_;
  std::vector<double> matrix_;
  std::vector<std::size_t> label_ids_;
  std::vector<std::string> labels_;
};

std::string knn_predict(const Dataset& train, std::span<const double> query, std::size_t k);

/// Fold id per row: each label's rows are shuffled with `seed` and dealt
/// round-robin, continuing the dealing position across labels.
std::vector<std::size_t> stratified_folds(const Dataset& data, std::size_t folds, std::uint64_t seed);

struct EvaluationOptions {
  std::size_t k = 5;
  bool standardize = true;
};

/// Fits (standardization + k-NN) on `train` and scores `test`.
ConfusionMatrix evaluate_split(const Dataset& train, const Dataset& test, const EvaluationOptions& opt,
                               const std::vector<std::string>& label_order);

struct CvResult {
  double accuracy = 0.0;
  ConfusionMatrix confusion;
  std::vector<double> per_fold;
};

CvResult cross_validate(const Dataset& data, const EvaluationOptions& opt, std::size_t folds,
                        std::uint64_t seed);

/// Rows at `test_velocity` versus everything else.
std::pair<Dataset, Dataset> split_by_velocity(const Dataset& data, double test_velocity);

/// Distinct velocities in ascending order.
std::vector<double> velocities(const Dataset& data);

}  // namespace tactile
