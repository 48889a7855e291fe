#pragma once

#include <cstddef>

namespace sggv {

// Sum and dot product with eight interleaved partial sums combined in a
// fixed tree. The association depends only on n, never on the address of
// the data, so vectorised builds give bit-identical results run to run.
template <typename Acc, typename T>
Acc lane_sum(const T* a, std::size_t n) {
  Acc l[8] = {};
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8)
    for (int j = 0; j < 8; ++j) l[j] += static_cast<Acc>(a[i + j]);
  Acc tail = 0;
  for (; i < n; ++i) tail += static_cast<Acc>(a[i]);
  return (((l[0] + l[1]) + (l[2] + l[3])) + ((l[4] + l[5]) + (l[6] + l[7]))) + tail;
}

template <typename Acc, typename T>
Acc lane_dot(const T* a, const T* b, std::size_t n) {
  Acc l[8] = {};
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8)
    for (int j = 0; j < 8; ++j) l[j] += static_cast<Acc>(a[i + j]) * static_cast<Acc>(b[i + j]);
  Acc tail = 0;
  for (; i < n; ++i) tail += static_cast<Acc>(a[i]) * static_cast<Acc>(b[i]);
  return (((l[0] + l[1]) + (l[2] + l[3])) + ((l[4] + l[5]) + (l[6] + l[7]))) + tail;
}

}  // namespace sggv
