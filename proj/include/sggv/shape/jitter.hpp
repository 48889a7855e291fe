#pragma once

#include <array>

#include "sggv/common/rng.hpp"
#include "sggv/shape/image.hpp"

namespace sggv::shape {

// Jitter magnitudes. Factors are drawn from [max(0, 1 - v), 1 + v]; the hue
// shift from [-hue, hue] in fractions of a full turn.
struct JitterParams {
  double brightness = 0.8;
  double contrast = 0.8;
  double saturation = 0.8;
  double hue = 0.5;
};

// Throws ConfigError for negative magnitudes or hue outside [0, 0.5].
void validate(const JitterParams& p);

// Single transforms; every one clamps its output to [0, 1].
Image adjust_brightness(const Image& img, double factor);
// Blends towards the scalar mean of the luma image.
Image adjust_contrast(const Image& img, double factor);
// Blends towards each pixel's own luma.
Image adjust_saturation(const Image& img, double factor);
// Rotates hue by `shift` turns through HSV.
Image adjust_hue(const Image& img, double shift);

std::array<double, 3> rgb_to_hsv(double r, double g, double b);
std::array<double, 3> hsv_to_rgb(double h, double s, double v);

// Samples the four factors, then applies the transforms in an order shuffled
// by `rng`. A factor of exactly 1 (or hue shift of exactly 0) is skipped, so
// all-zero params reproduce the input bit for bit. Throws InputError on
// non-RGB input.
Image color_jitter(const Image& img, const JitterParams& params, Rng& rng);

}  // namespace sggv::shape
