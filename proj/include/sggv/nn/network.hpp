#pragma once

#include <cstdint>
#include <vector>

#include "sggv/nn/model.hpp"

namespace sggv::nn {

// Every intermediate activation of a forward pass, batch-major.
// activations[0] is the input; activations[i + 1] is layer i's output.
// pool_argmax[i] holds, for max-pool layer i, the input index each output
// element was taken from (empty for other layers).
template <typename Real>
struct ForwardCache {
  std::vector<std::vector<Real>> activations;
  std::vector<std::vector<std::int32_t>> pool_argmax;
};

template <typename Real>
struct ForwardResult {
  int batch_size = 0;
  int classes = 0;
  std::vector<Real> logits;  // batch_size x classes
  ForwardCache<Real> cache;

  Real logit(int example, int cls) const { return logits[example * classes + cls]; }
};

template <typename Real>
struct LossAndGrad {
  Real loss = 0;
  GradientVector<Real> grad;
};

template <typename Real>
ForwardResult<Real> forward(const ModelState<Real>& model, const Batch<Real>& batch);

// Mean softmax cross-entropy and its gradient w.r.t. every parameter.
// Examples are processed in parallel into per-example buffers that are then
// summed in example order, so the result does not depend on thread count.
// Throws NumericalError if the loss or gradient is not finite.
template <typename Real>
LossAndGrad<Real> loss_and_grad(const ModelState<Real>& model, const Batch<Real>& batch);

template <typename Real>
Real loss(const ModelState<Real>& model, const Batch<Real>& batch);

// Central differences (L(theta + eps e_k) - L(theta - eps e_k)) / 2 eps for
// every k. Costs 2K forward passes; meant for test-sized models.
template <typename Real>
GradientVector<Real> finite_diff_grad(const ModelState<Real>& model,
                                      const Batch<Real>& batch, double epsilon);

// Argmax over logits, ties resolved to the lowest class index.
template <typename Real>
std::vector<int> predict(const ModelState<Real>& model, const Batch<Real>& batch);

}  // namespace sggv::nn
