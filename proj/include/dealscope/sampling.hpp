#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "dealscope/dataset.hpp"

namespace dealscope::sampling {

enum class SamplerKind { undersample, oversample, smote, none };

SamplerKind sampler_from_name(const std::string& name);
const char* sampler_name(SamplerKind k);

struct SamplerSpec {
    SamplerKind kind = SamplerKind::smote;
    int k_neighbors = 5;        // SMOTE only
    double target_ratio = 1.0;  // resampled class sized to ratio * other class
    std::uint64_t seed = 0;
};

struct SampleResult {
    Dataset data;
    // Row provenance into the input dataset. Original rows list
    // themselves; copies list their source row; SMOTE rows list the
    // parent (and parent_b the interpolation neighbor, else SIZE_MAX).
    std::vector<std::size_t> parent_a;
    std::vector<std::size_t> parent_b;
    std::vector<std::string> warnings;
};

// Balances the two classes per spec.kind. Input must be fully imputed
// (no NaN); rows keep their original order, resampled rows follow in a
// canonical order so results are seed-deterministic. Throws when a
// class is empty or the ratio is outside (0, 1].
SampleResult apply_sampler(const Dataset& train, const SamplerSpec& spec);

}  // namespace dealscope::sampling
