#pragma once
// Seeded synthetic corpora: entity centers on a sphere, mention vectors as
// noisy copies, optional entity holdout. Counter-based generation, so the
// output is a pure function of the config.

#include <cstdint>

#include "arblink/corpus.hpp"

namespace arblink {

struct SynthConfig {
  uint32_t n_entities = 10;
  uint32_t mentions_per_entity = 5;
  uint32_t dim = 8;
  double center_spread = 1.0;
  double noise_sigma = 0.1;
  double holdout_fraction = 0.0;  // in [0, 1)
  uint64_t seed = 0;
};

Corpus generate(const SynthConfig& cfg);

}  // namespace arblink
