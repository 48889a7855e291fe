#pragma once

#include <cstddef>
#include <vector>

#include "sggv/common/rng.hpp"

namespace sggv::harness {

// Draws mini-batches from a pool of example indices by walking a shuffled
// order and reshuffling at each epoch boundary. A pool smaller than the batch
// size is sampled uniformly with replacement instead.
class EpochSampler {
 public:
  EpochSampler(std::vector<int> pool, Rng rng);

  std::vector<int> draw(int batch_size);
  std::size_t pool_size() const { return pool_.size(); }

 private:
  std::vector<int> pool_;
  std::vector<int> order_;
  std::size_t cursor_ = 0;
  Rng rng_;
};

}  // namespace sggv::harness
