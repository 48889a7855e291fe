#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "sggv/data/dataset.hpp"

namespace sggv::harness {

// Linear-probe check that a multi-domain dataset has a real domain gap: a
// Flatten+Dense classifier on raw pixels is trained leave-one-domain-out and
// its accuracy on the sources' test splits is compared with the target's.
struct ProbeOptions {
  std::vector<std::uint64_t> seeds{0, 1, 2, 3, 4};
  int iterations = 1000;
  int batch_size = 16;
  double lr = 1e-3;
  double min_source_accuracy = 0.90;
  double min_gap = 0.15;
};

struct ProbeFold {
  std::string target;
  std::uint64_t seed = 0;
  double source_accuracy = 0;  // pooled test split of the sources
  double target_accuracy = 0;
};

struct ProbeReport {
  std::vector<ProbeFold> folds;
  double mean_source_accuracy = 0;
  double mean_target_accuracy = 0;
  bool certified = false;  // mean source >= threshold and mean gap >= min_gap
};

ProbeReport probe_domain_gap(const data::MultiDomainDataset& dataset,
                             const ProbeOptions& options = {});

}  // namespace sggv::harness
