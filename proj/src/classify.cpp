#include "tactile/classify.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "tactile/common.hpp"
#include "tactile/simd/kernels.hpp"

namespace tactile {

namespace {

bool same_velocity(double a, double b) { return std::abs(a - b) <= 1e-9 * std::max(1.0, std::abs(a)); }

}  // namespace

std::vector<std::string> Dataset::labels() const {
  std::vector<std::string> out;
  for (const auto& r : rows) out.push_back(r.label);
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

Dataset Dataset::subset(std::span<const std::size_t> indices) const {
  Dataset out;
  out.feature_names = feature_names;
  out.rows.reserve(indices.size());
  for (auto i : indices) out.rows.push_back(rows.at(i));
  return out;
}

void Dataset::validate() const {
  if (rows.empty()) return;
  const std::size_t d = rows.front().features.size();
  require(d >= 1, "feature vectors must not be empty");
  for (const auto& r : rows) {
    require(r.features.size() == d, "all feature vectors must share one length");
    for (double v : r.features) require(std::isfinite(v), "feature values must be finite");
  }
}

// ---------------------------------------------------------------------------

Standardizer Standardizer::fit(const Dataset& train) {
  require(!train.rows.empty(), "cannot standardize with an empty training set");
  const std::size_t d = train.dim();
  Standardizer s;
  s.mean.assign(d, 0.0);
  s.scale.assign(d, 1.0);
  const double n = static_cast<double>(train.size());
  for (const auto& r : train.rows)
    for (std::size_t j = 0; j < d; ++j) s.mean[j] += r.features[j];
  for (auto& m : s.mean) m /= n;
  std::vector<double> var(d, 0.0);
  for (const auto& r : train.rows)
    for (std::size_t j = 0; j < d; ++j) var[j] += (r.features[j] - s.mean[j]) * (r.features[j] - s.mean[j]);
  for (std::size_t j = 0; j < d; ++j) {
    const double sd = std::sqrt(var[j] / n);
    s.scale[j] = sd > 0.0 ? sd : 1.0;
  }
  return s;
}

std::vector<double> Standardizer::apply(std::span<const double> x) const {
  require(x.size() == mean.size(), "feature dimension mismatch");
  std::vector<double> out(x.size());
  for (std::size_t j = 0; j < x.size(); ++j) out[j] = (x[j] - mean[j]) / scale[j];
  return out;
}

Dataset Standardizer::apply(const Dataset& data) const {
  Dataset out = data;
  for (auto& r : out.rows) r.features = apply(r.features);
  return out;
}

// ---------------------------------------------------------------------------

ConfusionMatrix::ConfusionMatrix(std::vector<std::string> labels)
    : labels_(std::move(labels)), counts_(labels_.size() * labels_.size(), 0) {}

std::size_t ConfusionMatrix::index_of(const std::string& label) const {
  auto it = std::find(labels_.begin(), labels_.end(), label);
  require(it != labels_.end(), "label '" + label + "' is not in the confusion matrix");
  return static_cast<std::size_t>(it - labels_.begin());
}

void ConfusionMatrix::add(const std::string& truth, const std::string& predicted) {
  ++counts_[index_of(truth) * labels_.size() + index_of(predicted)];
}

void ConfusionMatrix::merge(const ConfusionMatrix& other) {
  require(other.labels_ == labels_, "cannot merge confusion matrices with different labels");
  for (std::size_t i = 0; i < counts_.size(); ++i) counts_[i] += other.counts_[i];
}

std::uint64_t ConfusionMatrix::total() const noexcept {
  return std::accumulate(counts_.begin(), counts_.end(), std::uint64_t{0});
}

std::uint64_t ConfusionMatrix::correct() const noexcept {
  std::uint64_t c = 0;
  for (std::size_t i = 0; i < labels_.size(); ++i) c += counts_[i * labels_.size() + i];
  return c;
}

double ConfusionMatrix::accuracy() const noexcept {
  const auto t = total();
  return t == 0 ? 0.0 : static_cast<double>(correct()) / static_cast<double>(t);
}

std::string ConfusionMatrix::to_csv() const {
  std::string out = "true\\predicted";
  for (const auto& l : labels_) out += "," + l;
  out += '\n';
  for (std::size_t i = 0; i < labels_.size(); ++i) {
    out += labels_[i];
    for (std::size_t j = 0; j < labels_.size(); ++j) out += "," + std::to_string(at(i, j));
    out += '\n';
  }
  return out;
}

// ---------------------------------------------------------------------------

KnnClassifier::KnnClassifier(const Dataset& train, std::size_t k) : k_(k), dim_(train.dim()) {
  require(k >= 1, "k must be at least 1");
  require(!train.rows.empty(), "training set is empty");
  require(k <= train.size(), "k exceeds the training set size");
  train.validate();
  labels_ = train.labels();
  matrix_.reserve(train.size() * dim_);
  label_ids_.reserve(train.size());
  for (const auto& r : train.rows) {
    matrix_.insert(matrix_.end(), r.features.begin(), r.features.end());
    label_ids_.push_back(static_cast<std::size_t>(
        std::lower_bound(labels_.begin(), labels_.end(), r.label) - labels_.begin()));
  }
}

std::string KnnClassifier::predict(std::span<const double> query) const {
  require(query.size() == dim_, "query dimension does not match the training set");
  const std::size_t n = label_ids_.size();
  std::vector<double> dist(n);
  simd::squared_distances(matrix_, dim_, query, dist);

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  auto closer = [&](std::size_t a, std::size_t b) { return dist[a] < dist[b] || (dist[a] == dist[b] && a < b); };
  std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(k_), order.end(), closer);

  std::vector<std::size_t> votes(labels_.size(), 0);
  std::vector<double> nearest(labels_.size(), std::numeric_limits<double>::infinity());
  for (std::size_t rank = 0; rank < k_; ++rank) {
    const std::size_t id = label_ids_[order[rank]];
    ++votes[id];
    nearest[id] = std::min(nearest[id], dist[order[rank]]);
  }
  // label ids follow label order, so scanning upward settles full ties
  std::size_t best = 0;
  for (std::size_t c = 1; c < labels_.size(); ++c) {
    if (votes[c] > votes[best] || (votes[c] == votes[best] && nearest[c] < nearest[best])) best = c;
  }
  return labels_[best];
}

std::string knn_predict(const Dataset& train, std::span<const double> query, std::size_t k) {
  return KnnClassifier(train, k).predict(query);
}

// ---------------------------------------------------------------------------

std::vector<std::size_t> stratified_folds(const Dataset& data, std::size_t folds, std::uint64_t seed) {
  require(folds >= 2, "cross-validation needs at least two folds");
  const auto labels = data.labels();
  std::vector<std::size_t> assignment(data.size(), 0);
  Rng rng(seed);
  std::size_t dealer = 0;
  for (const auto& label : labels) {
    std::vector<std::size_t> members;
    for (std::size_t i = 0; i < data.size(); ++i)
      if (data.rows[i].label == label) members.push_back(i);
    if (members.size() < folds)
      fail("invalid_argument", "label '" + label + "' has " + std::to_string(members.size()) +
                                   " rows, fewer than " + std::to_string(folds) + " folds");
    for (std::size_t i = members.size() - 1; i > 0; --i) std::swap(members[i], members[rng.index(i + 1)]);
    for (auto idx : members) assignment[idx] = dealer++ % folds;
  }
  return assignment;
}

ConfusionMatrix evaluate_split(const Dataset& train, const Dataset& test, const EvaluationOptions& opt,
                               const std::vector<std::string>& label_order) {
  ConfusionMatrix cm(label_order);
  if (opt.standardize) {
    const auto s = Standardizer::fit(train);
    const KnnClassifier knn(s.apply(train), opt.k);
    for (const auto& r : test.rows) cm.add(r.label, knn.predict(s.apply(r.features)));
  } else {
    const KnnClassifier knn(train, opt.k);
    for (const auto& r : test.rows) cm.add(r.label, knn.predict(r.features));
  }
  return cm;
}

CvResult cross_validate(const Dataset& data, const EvaluationOptions& opt, std::size_t folds,
                        std::uint64_t seed) {
  data.validate();
  const auto assignment = stratified_folds(data, folds, seed);
  const auto labels = data.labels();
  CvResult result;
  result.confusion = ConfusionMatrix(labels);
  for (std::size_t f = 0; f < folds; ++f) {
    std::vector<std::size_t> train_idx, test_idx;
    for (std::size_t i = 0; i < data.size(); ++i) (assignment[i] == f ? test_idx : train_idx).push_back(i);
    const auto cm = evaluate_split(data.subset(train_idx), data.subset(test_idx), opt, labels);
    result.per_fold.push_back(cm.accuracy());
    result.confusion.merge(cm);
  }
  result.accuracy = result.confusion.accuracy();
  return result;
}

std::pair<Dataset, Dataset> split_by_velocity(const Dataset& data, double test_velocity) {
  const auto vels = velocities(data);
  const bool present = std::any_of(vels.begin(), vels.end(), [&](double v) { return same_velocity(v, test_velocity); });
  if (!present) fail("invalid_argument", "test velocity is absent from the dataset");
  require(vels.size() >= 3, "velocity hold-out needs at least two training velocities");
  Dataset train, test;
  train.feature_names = test.feature_names = data.feature_names;
  for (const auto& r : data.rows) (same_velocity(r.velocity, test_velocity) ? test : train).rows.push_back(r);
  return {std::move(train), std::move(test)};
}

std::vector<double> velocities(const Dataset& data) {
  std::vector<double> out;
  for (const auto& r : data.rows)
    if (std::none_of(out.begin(), out.end(), [&](double v) { return same_velocity(v, r.velocity); }))
      out.push_back(r.velocity);
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace tactile
