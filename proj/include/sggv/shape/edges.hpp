#pragma once

#include <string>

#include "sggv/shape/image.hpp"

namespace sggv::shape {

enum class ShapeOp { Sobel, Laplace };

std::string to_string(ShapeOp op);
ShapeOp parse_shape_op(const std::string& s);

// Sobel gradient magnitude of the luma image (reflect-101 borders), divided
// by the kernel maximum 4*sqrt(2), clamped to [0, 1] and replicated to the
// input's channel count. Throws InputError when H or W < 3.
Image sobel_edge(const Image& img);

// |4-neighbour Laplacian| / 4, otherwise as sobel_edge.
Image laplace_edge(const Image& img);

Image shape_distill(const Image& img, ShapeOp op);

}  // namespace sggv::shape
