#include "sggv/shape/triple.hpp"

namespace sggv::shape {

ExampleTriple make_triple(const Image& raw, int label, int domain, ShapeOp shape_op,
                          const JitterParams& params, Rng& rng) {
  ExampleTriple t;
  t.raw = raw;
  t.shape = shape_distill(raw, shape_op);
  t.texture = color_jitter(raw, params, rng);
  t.label = label;
  t.domain = domain;
  return t;
}

}  // namespace sggv::shape
