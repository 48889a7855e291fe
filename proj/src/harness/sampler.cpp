#include "sggv/harness/sampler.hpp"

#include <algorithm>

#include "sggv/common/error.hpp"

namespace sggv::harness {

EpochSampler::EpochSampler(std::vector<int> pool, Rng rng)
    : pool_(std::move(pool)), order_(pool_), cursor_(pool_.size()), rng_(rng) {
  if (pool_.empty()) throw ConfigError("cannot sample from an empty example pool");
}

std::vector<int> EpochSampler::draw(int batch_size) {
  std::vector<int> out;
  out.reserve(batch_size);
  if (pool_.size() < static_cast<std::size_t>(batch_size)) {
    std::uniform_int_distribution<std::size_t> pick(0, pool_.size() - 1);
    for (int i = 0; i < batch_size; ++i) out.push_back(pool_[pick(rng_)]);
    return out;
  }
  while (out.size() < static_cast<std::size_t>(batch_size)) {
    if (cursor_ == order_.size()) {
      std::shuffle(order_.begin(), order_.end(), rng_);
      cursor_ = 0;
    }
    out.push_back(order_[cursor_++]);
  }
  return out;
}

}  // namespace sggv::harness
