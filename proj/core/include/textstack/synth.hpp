// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "textstack/types.hpp"

namespace textstack {

/// Class priors for generated corpora, mirroring the published distribution
/// of the four categories.
inline constexpr double kClassPriors[kNumClasses] = {0.5385, 0.2715, 0.1404,
                                                     0.0496};

struct SynthConfig {
  int count = 2000;
  std::uint64_t seed = 0;
};

/// Keyword-planted tweets: every class draws 2-4 keywords from its own pool
/// (aligned with the bundled demo lexicon) plus neutral filler, mentions,
/// links, hashtags, and punctuation. Class counts follow kClassPriors by
/// largest remainder; output order is shuffled. Deterministic per seed.
std::vector<RawRecord> generate_synthetic_corpus(const SynthConfig& config);

void write_jsonl_corpus(const std::vector<RawRecord>& records,
                        const std::filesystem::path& path);

}  // namespace textstack
