#include "sggv/data/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "sggv/common/error.hpp"

namespace sggv::data {

std::string to_string(Split s) {
  switch (s) {
    case Split::Train: return "train";
    case Split::Val: return "val";
    case Split::Test: return "test";
  }
  return "?";
}

std::vector<int> DomainDataset::indices(Split s) const {
  std::vector<int> out;
  for (std::size_t i = 0; i < examples.size(); ++i)
    if (examples[i].split == s) out.push_back(static_cast<int>(i));
  return out;
}

int MultiDomainDataset::domain_index(const std::string& name) const {
  for (const auto& d : domains)
    if (d.name == name) return d.domain;
  throw ConfigError("unknown domain '" + name + "'");
}

std::vector<Split> assign_splits(std::size_t n, Rng& rng) {
  const auto n_train = static_cast<std::size_t>(std::floor(0.7 * n + 0.5));
  const auto n_val = std::min(n - n_train, static_cast<std::size_t>(std::floor(0.1 * n + 0.5)));
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), rng);
  std::vector<Split> splits(n, Split::Test);
  for (std::size_t i = 0; i < n; ++i) {
    if (i < n_train)
      splits[order[i]] = Split::Train;
    else if (i < n_train + n_val)
      splits[order[i]] = Split::Val;
  }
  return splits;
}

}  // namespace sggv::data
