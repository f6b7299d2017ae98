#pragma once

// Feature CSV rows shared by the CLI's `features` and `classify` commands:
//   single taxel: label,velocity,trial,taxel,msr,cv_isi,fano,defined_flags
//   GLCM:         label,velocity,trial,mode,contrast,correlation,asm

#include <string>
#include <vector>

#include "tactile/classify.hpp"
#include "tactile/glcm.hpp"
#include "tactile/neuron.hpp"
#include "tactile/spikestats.hpp"

namespace tactile {

inline constexpr const char* kTaxelFeatureHeader = "label,velocity,trial,taxel,msr,cv_isi,fano,defined_flags";
inline constexpr const char* kGlcmFeatureHeader = "label,velocity,trial,mode,contrast,correlation,asm";

std::string taxel_feature_row(const SpikeArray& spikes, const SingleTaxelFeatures& f);
std::string glcm_feature_row(const SpikeArray& spikes, GlcmMode mode, const HaralickFeatures& f);

/// Parses either feature CSV layout into a Dataset.
Dataset parse_feature_csv(const std::string& text);

}  // namespace tactile
