#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "tactile/neuron.hpp"

namespace tactile {

/// A statistic that may be undefined for too-sparse trains. Undefined
/// values carry 0 so feature vectors keep a fixed length.
struct Statistic {
  double value = 0.0;
  bool defined = false;
};

/// Mean spiking rate: spike count / duration (Hz).
double msr(const SpikeTrain& train);

/// Population sd of the inter-spike intervals divided by their mean.
/// Undefined below two intervals.
Statistic cv_isi(const SpikeTrain& train);

/// Population variance / mean of spike counts in non-overlapping windows
/// tiling [0, duration); the trailing partial window is dropped. Undefined
/// when the mean count is zero. Throws if fewer than two windows fit.
Statistic fano(const SpikeTrain& train, double window_s);

/// Trial-averaged rate histogram in Hz: summed counts / (trials * bin).
std::vector<double> psth(std::span<const SpikeTrain> trials, double bin_s);

struct SingleTaxelFeatures {
  double msr_hz = 0.0;
  Statistic cv;
  Statistic fano;
  std::size_t taxel_index = 0;
  double window_s = 0.5;

  /// Bit 0: msr (always), bit 1: cv_isi, bit 2: fano.
  unsigned defined_flags() const noexcept {
    return 1u | (cv.defined ? 2u : 0u) | (fano.defined ? 4u : 0u);
  }
  std::vector<double> vector() const { return {msr_hz, cv.value, fano.value}; }
};

SingleTaxelFeatures single_taxel_features(const SpikeArray& spikes, std::size_t taxel, double window_s);

}  // namespace tactile
