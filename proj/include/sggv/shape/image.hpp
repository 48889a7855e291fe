#pragma once

#include <cstddef>
#include <vector>

namespace sggv::shape {

// Planar C x H x W image with values in [0, 1]; C is 1 or 3.
struct Image {
  int channels = 0;
  int height = 0;
  int width = 0;
  std::vector<double> pixels;

  Image() = default;
  Image(int c, int h, int w, double fill = 0.0)
      : channels(c), height(h), width(w),
        pixels(static_cast<std::size_t>(c) * h * w, fill) {}

  std::size_t plane() const { return static_cast<std::size_t>(height) * width; }
  double& at(int c, int y, int x) { return pixels[c * plane() + static_cast<std::size_t>(y) * width + x]; }
  double at(int c, int y, int x) const {
    return pixels[c * plane() + static_cast<std::size_t>(y) * width + x];
  }
  bool operator==(const Image&) const = default;
};

// Rec. 601 luma; single-channel images are returned as-is.
Image to_gray(const Image& img);

}  // namespace sggv::shape
