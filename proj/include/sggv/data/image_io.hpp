#pragma once

#include <filesystem>

#include "sggv/shape/image.hpp"

namespace sggv::data {

// Decodes PNG (any bit depth / colour type libpng can expand to 8-bit) or
// uncompressed 24/32-bit BMP into a 3-channel [0, 1] image. Throws LoadError
// naming the file when it cannot be decoded.
shape::Image read_image(const std::filesystem::path& path);

// Writes an 8-bit RGB (or gray for 1-channel input) PNG.
void write_png(const std::filesystem::path& path, const shape::Image& img);
void write_bmp(const std::filesystem::path& path, const shape::Image& img);

// Bilinear resampling with half-pixel centres; same-size input is returned
// unchanged.
shape::Image resize_bilinear(const shape::Image& img, int height, int width);

}  // namespace sggv::data
