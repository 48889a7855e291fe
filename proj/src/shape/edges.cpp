#include "sggv/shape/edges.hpp"

#include <algorithm>
#include <cmath>

#include "sggv/common/error.hpp"

namespace sggv::shape {

Image to_gray(const Image& img) {
  if (img.channels == 1) return img;
  if (img.channels != 3) throw InputError("images must have 1 or 3 channels");
  Image g(1, img.height, img.width);
  const std::size_t n = img.plane();
  const double* r = img.pixels.data();
  const double* gr = r + n;
  const double* b = gr + n;
  for (std::size_t i = 0; i < n; ++i) g.pixels[i] = 0.299 * r[i] + 0.587 * gr[i] + 0.114 * b[i];
  return g;
}

std::string to_string(ShapeOp op) { return op == ShapeOp::Sobel ? "sobel" : "laplace"; }

ShapeOp parse_shape_op(const std::string& s) {
  if (s == "sobel") return ShapeOp::Sobel;
  if (s == "laplace") return ShapeOp::Laplace;
  throw ConfigError("unknown shape operator '" + s + "' (expected sobel or laplace)");
}

namespace {

// Reflect-101 border: -1 -> 1, n -> n - 2.
int reflect(int i, int n) {
  if (i < 0) return -i;
  if (i >= n) return 2 * n - 2 - i;
  return i;
}

void check_input(const Image& img) {
  if (img.channels != 1 && img.channels != 3)
    throw InputError("edge operators need 1- or 3-channel images");
  if (img.height < 3 || img.width < 3)
    throw InputError("edge operators need images of at least 3x3 pixels");
}

Image replicate(const Image& single, int channels) {
  Image out(channels, single.height, single.width);
  for (int c = 0; c < channels; ++c)
    std::copy(single.pixels.begin(), single.pixels.end(), out.pixels.begin() + c * single.plane());
  return out;
}

// Applies `response(window)` at every pixel of the luma image, where window
// is the 3x3 neighbourhood with reflect-101 borders.
template <typename F>
Image map_3x3(const Image& img, F response) {
  check_input(img);
  const Image g = to_gray(img);
  Image out(1, g.height, g.width);
  double w[3][3];
  for (int y = 0; y < g.height; ++y) {
    for (int x = 0; x < g.width; ++x) {
      for (int dy = -1; dy <= 1; ++dy)
        for (int dx = -1; dx <= 1; ++dx)
          w[dy + 1][dx + 1] = g.at(0, reflect(y + dy, g.height), reflect(x + dx, g.width));
      out.at(0, y, x) = std::clamp(response(w), 0.0, 1.0);
    }
  }
  return replicate(out, img.channels);
}

}  // namespace

Image sobel_edge(const Image& img) {
  static const double kNorm = 4.0 * std::sqrt(2.0);
  return map_3x3(img, [](const double (&w)[3][3]) {
    const double gx = (w[0][2] + 2 * w[1][2] + w[2][2]) - (w[0][0] + 2 * w[1][0] + w[2][0]);
    const double gy = (w[2][0] + 2 * w[2][1] + w[2][2]) - (w[0][0] + 2 * w[0][1] + w[0][2]);
    return std::sqrt(gx * gx + gy * gy) / kNorm;
  });
}

Image laplace_edge(const Image& img) {
  return map_3x3(img, [](const double (&w)[3][3]) {
    return std::abs(w[0][1] + w[1][0] + w[1][2] + w[2][1] - 4 * w[1][1]) / 4.0;
  });
}

Image shape_distill(const Image& img, ShapeOp op) {
  return op == ShapeOp::Sobel ? sobel_edge(img) : laplace_edge(img);
}

}  // namespace sggv::shape
