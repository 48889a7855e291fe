#pragma once

#include "sggv/common/rng.hpp"
#include "sggv/shape/edges.hpp"
#include "sggv/shape/jitter.hpp"

namespace sggv::shape {

// A raw image with its shape-distilled and texture-augmented companions,
// both derived from that same raw image.
struct ExampleTriple {
  Image raw;
  Image shape;
  Image texture;
  int label = 0;
  int domain = 0;
};

ExampleTriple make_triple(const Image& raw, int label, int domain, ShapeOp shape_op,
                          const JitterParams& params, Rng& rng);

}  // namespace sggv::shape
