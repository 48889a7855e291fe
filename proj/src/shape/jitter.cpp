#include "sggv/shape/jitter.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "sggv/common/error.hpp"
#include "sggv/shape/edges.hpp"

namespace sggv::shape {

void validate(const JitterParams& p) {
  if (p.brightness < 0 || p.contrast < 0 || p.saturation < 0)
    throw ConfigError("jitter magnitudes must be non-negative");
  if (p.hue < 0 || p.hue > 0.5) throw ConfigError("jitter hue must lie in [0, 0.5]");
}

namespace {

void require_rgb(const Image& img) {
  if (img.channels != 3) throw InputError("color transforms need 3-channel images");
}

double clamp01(double v) { return std::clamp(v, 0.0, 1.0); }

}  // namespace

Image adjust_brightness(const Image& img, double factor) {
  Image out = img;
  for (double& v : out.pixels) v = clamp01(factor * v);
  return out;
}

Image adjust_contrast(const Image& img, double factor) {
  require_rgb(img);
  const Image g = to_gray(img);
  const double mean =
      std::accumulate(g.pixels.begin(), g.pixels.end(), 0.0) / static_cast<double>(g.plane());
  Image out = img;
  for (double& v : out.pixels) v = clamp01(mean + factor * (v - mean));
  return out;
}

Image adjust_saturation(const Image& img, double factor) {
  require_rgb(img);
  const Image g = to_gray(img);
  Image out = img;
  const std::size_t n = img.plane();
  for (int c = 0; c < 3; ++c)
    for (std::size_t i = 0; i < n; ++i) {
      double& v = out.pixels[c * n + i];
      v = clamp01(g.pixels[i] + factor * (v - g.pixels[i]));
    }
  return out;
}

std::array<double, 3> rgb_to_hsv(double r, double g, double b) {
  const double maxc = std::max({r, g, b});
  const double minc = std::min({r, g, b});
  const double v = maxc;
  if (maxc == minc) return {0.0, 0.0, v};
  const double range = maxc - minc;
  const double s = range / maxc;
  const double rc = (maxc - r) / range;
  const double gc = (maxc - g) / range;
  const double bc = (maxc - b) / range;
  double h;
  if (r == maxc)
    h = bc - gc;
  else if (g == maxc)
    h = 2.0 + rc - bc;
  else
    h = 4.0 + gc - rc;
  h /= 6.0;
  h -= std::floor(h);
  return {h, s, v};
}

std::array<double, 3> hsv_to_rgb(double h, double s, double v) {
  if (s == 0.0) return {v, v, v};
  h -= std::floor(h);
  const double scaled = h * 6.0;
  int sector = static_cast<int>(scaled);
  const double f = scaled - sector;
  sector %= 6;
  const double p = v * (1.0 - s);
  const double q = v * (1.0 - s * f);
  const double t = v * (1.0 - s * (1.0 - f));
  switch (sector) {
    case 0: return {v, t, p};
    case 1: return {q, v, p};
    case 2: return {p, v, t};
    case 3: return {p, q, v};
    case 4: return {t, p, v};
    default: return {v, p, q};
  }
}

Image adjust_hue(const Image& img, double shift) {
  require_rgb(img);
  Image out = img;
  const std::size_t n = img.plane();
  double* r = out.pixels.data();
  double* g = r + n;
  double* b = g + n;
  for (std::size_t i = 0; i < n; ++i) {
    auto [h, s, v] = rgb_to_hsv(r[i], g[i], b[i]);
    h += shift;
    h -= std::floor(h);
    auto rgb = hsv_to_rgb(h, s, v);
    r[i] = clamp01(rgb[0]);
    g[i] = clamp01(rgb[1]);
    b[i] = clamp01(rgb[2]);
  }
  return out;
}

Image color_jitter(const Image& img, const JitterParams& params, Rng& rng) {
  validate(params);
  require_rgb(img);
  auto factor = [&rng](double magnitude) {
    return uniform(rng, std::max(0.0, 1.0 - magnitude), 1.0 + magnitude);
  };
  const double fb = factor(params.brightness);
  const double fc = factor(params.contrast);
  const double fs = factor(params.saturation);
  const double hue = uniform(rng, -params.hue, params.hue);
  std::array<int, 4> order{0, 1, 2, 3};
  std::shuffle(order.begin(), order.end(), rng);

  Image out = img;
  for (int t : order) {
    switch (t) {
      case 0:
        if (fb != 1.0) out = adjust_brightness(out, fb);
        break;
      case 1:
        if (fc != 1.0) out = adjust_contrast(out, fc);
        break;
      case 2:
        if (fs != 1.0) out = adjust_saturation(out, fs);
        break;
      default:
        if (hue != 0.0) out = adjust_hue(out, hue);
        break;
    }
  }
  return out;
}

}  // namespace sggv::shape
