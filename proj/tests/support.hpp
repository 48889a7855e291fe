#pragma once

// Helpers shared by the test binaries: random bundles, tiny models and
// batches, scratch directories.

#include <unistd.h>

#include <atomic>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "sggv/agg/aggregation.hpp"
#include "sggv/common/rng.hpp"
#include "sggv/nn/model.hpp"

namespace sggv::test {

// Entries are 0 with probability zero_prob, otherwise standard normal.
inline agg::GradientBundle<double> random_bundle(std::size_t l, std::size_t k, Rng& rng,
                                                 double zero_prob = 0.1) {
  std::normal_distribution<double> normal;
  std::bernoulli_distribution zero(zero_prob);
  agg::GradientBundle<double> b;
  for (std::size_t i = 0; i < l; ++i) {
    nn::GradientVector<double> g(k);
    for (auto& v : g.values) v = zero(rng) ? 0.0 : normal(rng);
    b.grads.push_back(std::move(g));
    b.tags.push_back({static_cast<int>(i), agg::InputKind::Raw});
  }
  return b;
}

inline agg::GradientBundle<double> bundle_of(std::vector<std::vector<double>> rows) {
  agg::GradientBundle<double> b;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    b.grads.emplace_back(std::move(rows[i]));
    b.tags.push_back({static_cast<int>(i), agg::InputKind::Raw});
  }
  return b;
}

template <typename Real = double>
nn::Batch<Real> random_batch(const nn::Architecture& arch, int n, Rng& rng) {
  const auto in = arch.input();
  nn::Batch<Real> b;
  b.channels = in.channels;
  b.height = in.height;
  b.width = in.width;
  for (int i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < b.image_size(); ++j)
      b.images.push_back(static_cast<Real>(uniform(rng, 0.0, 1.0)));
    b.labels.push_back(static_cast<int>(rng() % static_cast<unsigned>(arch.classes())));
  }
  return b;
}

// A fresh empty directory under the system temp dir, removed on destruction.
class ScratchDir {
 public:
  explicit ScratchDir(const std::string& tag) {
    static std::atomic<int> counter{0};
    path_ = std::filesystem::temp_directory_path() /
            ("sggv_" + tag + "_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~ScratchDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

}  // namespace sggv::test
