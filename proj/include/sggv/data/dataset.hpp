#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "sggv/common/rng.hpp"
#include "sggv/shape/image.hpp"

namespace sggv::data {

using shape::Image;

enum class Split : std::uint8_t { Train, Val, Test };
std::string to_string(Split s);

struct Example {
  Image image;
  int label = 0;
  Split split = Split::Train;
};

struct DomainDataset {
  int domain = 0;
  std::string name;
  std::vector<Example> examples;

  // Indices of the examples assigned to `s`, in storage order.
  std::vector<int> indices(Split s) const;
};

struct MultiDomainDataset {
  std::vector<std::string> class_names;
  std::vector<DomainDataset> domains;

  int class_count() const { return static_cast<int>(class_names.size()); }
  int domain_count() const { return static_cast<int>(domains.size()); }
  // Index of the domain called `name`; throws ConfigError if absent.
  int domain_index(const std::string& name) const;
};

// Exact 70/10/20 partition of n examples (train and val rounded to nearest),
// shuffled with `rng`.
std::vector<Split> assign_splits(std::size_t n, Rng& rng);

}  // namespace sggv::data
