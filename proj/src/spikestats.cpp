#include "tactile/spikestats.hpp"

#include <cmath>

#include "tactile/common.hpp"

namespace tactile {

double msr(const SpikeTrain& train) {
  require(train.duration_s > 0.0, "spike train duration must be positive");
  return static_cast<double>(train.size()) / train.duration_s;
}

Statistic cv_isi(const SpikeTrain& train) {
  if (train.size() < 3) return {};
  const std::size_t n = train.size() - 1;
  double mean = 0.0;
  for (std::size_t k = 1; k < train.size(); ++k) mean += train.times_s[k] - train.times_s[k - 1];
  mean /= static_cast<double>(n);
  if (!(mean > 0.0)) return {};
  double var = 0.0;
  for (std::size_t k = 1; k < train.size(); ++k) {
    const double dev = (train.times_s[k] - train.times_s[k - 1]) - mean;
    var += dev * dev;
  }
  var /= static_cast<double>(n);
  return {std::sqrt(var) / mean, true};
}

Statistic fano(const SpikeTrain& train, double window_s) {
  require(window_s > 0.0, "Fano window must be positive");
  const std::size_t windows = whole_bins(train.duration_s, window_s);
  require(windows >= 2, "Fano factor needs at least two whole windows");
  std::vector<double> counts(windows, 0.0);
  for (double t : train.times_s) {
    const std::size_t w = bin_index(t, window_s);
    if (w < windows) counts[w] += 1.0;
  }
  double mean = 0.0;
  for (double c : counts) mean += c;
  mean /= static_cast<double>(windows);
  if (mean <= 0.0) return {};
  double var = 0.0;
  for (double c : counts) var += (c - mean) * (c - mean);
  var /= static_cast<double>(windows);
  return {var / mean, true};
}

std::vector<double> psth(std::span<const SpikeTrain> trials, double bin_s) {
  require(!trials.empty(), "PSTH needs at least one trial");
  require(bin_s > 0.0, "PSTH bin must be positive");
  const double duration = trials.front().duration_s;
  for (const auto& t : trials) require(t.duration_s == duration, "PSTH trials must share one duration");
  const std::size_t bins = whole_bins(duration, bin_s);
  require(bins >= 1, "PSTH bin is longer than the trials");
  std::vector<double> rate(bins, 0.0);
  for (const auto& trial : trials)
    for (double t : trial.times_s) {
      const std::size_t b = bin_index(t, bin_s);
      if (b < bins) rate[b] += 1.0;
    }
  const double scale = static_cast<double>(trials.size()) * bin_s;
  for (auto& r : rate) r /= scale;
  return rate;
}

SingleTaxelFeatures single_taxel_features(const SpikeArray& spikes, std::size_t taxel, double window_s) {
  require(taxel < spikes.trains.size(), "taxel index out of range");
  const auto& train = spikes.trains[taxel];
  SingleTaxelFeatures f;
  f.msr_hz = msr(train);
  f.cv = cv_isi(train);
  f.fano = fano(train, window_s);
  f.taxel_index = taxel;
  f.window_s = window_s;
  return f;
}

}  // namespace tactile
