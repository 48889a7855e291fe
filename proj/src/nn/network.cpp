#include "sggv/nn/network.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <variant>

#include "kernels.hpp"
#include "sggv/common/error.hpp"

namespace sggv::nn {
namespace {

// Pointers to one example's activations (outputs of every layer) and
// max-pool routing indices.
template <typename Real>
struct ExampleView {
  std::vector<Real*> acts;
  std::vector<std::int32_t*> argmax;
  std::vector<Real*> col;  // per conv layer: unrolled input, kept for backward
  Real* d_col = nullptr;
};

std::size_t col_size(const LayerPlan& lp) {
  if (const auto* c = std::get_if<Conv>(&lp.layer))
    return kernels::col_rows(lp.in, *c) * kernels::col_cols(lp.out);
  return 0;
}

std::size_t max_col(const Architecture& arch) {
  std::size_t n = 0;
  for (const auto& lp : arch.plan()) n = std::max(n, col_size(lp));
  return n;
}

std::size_t total_col(const Architecture& arch) {
  std::size_t n = 0;
  for (const auto& lp : arch.plan()) n += col_size(lp);
  return n;
}

template <typename Real>
std::vector<Real*> carve_cols(const Architecture& arch, std::vector<Real>& storage) {
  storage.resize(total_col(arch));
  std::vector<Real*> out;
  std::size_t offset = 0;
  for (const auto& lp : arch.plan()) {
    out.push_back(storage.data() + offset);
    offset += col_size(lp);
  }
  return out;
}

template <typename Real>
void forward_example(const Architecture& arch, const Real* params, const Real* input,
                     const ExampleView<Real>& view) {
  const auto plan = arch.plan();
  for (std::size_t i = 0; i < plan.size(); ++i) {
    const LayerPlan& lp = plan[i];
    const Real* in = i == 0 ? input : view.acts[i - 1];
    Real* out = view.acts[i];
    if (const auto* c = std::get_if<Conv>(&lp.layer)) {
      kernels::conv_forward(in, lp.in, *c, params + lp.weight_offset, params + lp.bias_offset,
                            lp.out, out, view.col[i]);
    } else if (std::holds_alternative<ReLU>(lp.layer)) {
      kernels::relu_forward(in, lp.in.size(), out);
    } else if (const auto* m = std::get_if<MaxPool>(&lp.layer)) {
      kernels::maxpool_forward(in, lp.in, *m, lp.out, out, view.argmax[i]);
    } else if (std::holds_alternative<Flatten>(lp.layer)) {
      std::copy(in, in + lp.in.size(), out);
    } else {
      kernels::dense_forward(in, lp.in.channels, params + lp.weight_offset,
                             params + lp.bias_offset, lp.out.channels, out);
    }
  }
}

std::size_t first_parametrised_layer(const Architecture& arch) {
  const auto plan = arch.plan();
  for (std::size_t i = 0; i < plan.size(); ++i)
    if (plan[i].weight_count + plan[i].bias_count > 0) return i;
  return plan.size();
}

// Backpropagates d_logits through one example, accumulating into grad.
template <typename Real>
void backward_example(const Architecture& arch, const Real* params, const Real* input,
                      const ExampleView<Real>& view, const Real* d_logits, Real* grad,
                      std::vector<Real>& delta, std::vector<Real>& delta_in) {
  const auto plan = arch.plan();
  const std::size_t stop = first_parametrised_layer(arch);
  const std::size_t last = plan.size() - 1;
  std::copy(d_logits, d_logits + plan[last].out.size(), delta.begin());
  for (std::size_t i = plan.size(); i-- > stop;) {
    const LayerPlan& lp = plan[i];
    const Real* in = i == 0 ? input : view.acts[i - 1];
    const bool need_in = i > stop;
    Real* d_in = nullptr;
    if (need_in) {
      std::fill(delta_in.begin(), delta_in.begin() + lp.in.size(), Real(0));
      d_in = delta_in.data();
    }
    if (const auto* c = std::get_if<Conv>(&lp.layer)) {
      kernels::conv_backward(lp.in, *c, params + lp.weight_offset, lp.out, delta.data(),
                             grad + lp.weight_offset, grad + lp.bias_offset, d_in, view.col[i],
                             view.d_col);
    } else if (std::holds_alternative<ReLU>(lp.layer)) {
      if (d_in) kernels::relu_backward(in, lp.in.size(), delta.data(), d_in);
    } else if (std::holds_alternative<MaxPool>(lp.layer)) {
      if (d_in) kernels::maxpool_backward(view.argmax[i], lp.out.size(), delta.data(), d_in);
    } else if (std::holds_alternative<Flatten>(lp.layer)) {
      if (d_in) std::copy(delta.begin(), delta.begin() + lp.in.size(), d_in);
    } else {
      kernels::dense_backward(in, lp.in.channels, params + lp.weight_offset, lp.out.channels,
                              delta.data(), grad + lp.weight_offset, grad + lp.bias_offset, d_in);
    }
    if (need_in) std::swap(delta, delta_in);
  }
}

std::size_t max_activation(const Architecture& arch) {
  std::size_t n = arch.input_shape().size();
  for (const auto& lp : arch.plan()) n = std::max(n, lp.out.size());
  return n;
}

// Per-thread storage for a single example's forward and backward pass.
template <typename Real>
struct Workspace {
  std::vector<std::vector<Real>> acts;
  std::vector<std::vector<std::int32_t>> argmax;
  std::vector<Real> delta, delta_in;
  std::vector<Real> col, d_col;
  ExampleView<Real> view;

  explicit Workspace(const Architecture& arch) {
    for (const auto& lp : arch.plan()) {
      acts.emplace_back(lp.out.size());
      argmax.emplace_back(std::holds_alternative<MaxPool>(lp.layer) ? lp.out.size() : 0);
    }
    for (std::size_t i = 0; i < acts.size(); ++i) {
      view.acts.push_back(acts[i].data());
      view.argmax.push_back(argmax[i].data());
    }
    delta.resize(max_activation(arch));
    delta_in.resize(max_activation(arch));
    view.col = carve_cols(arch, col);
    d_col.resize(max_col(arch));
    view.d_col = d_col.data();
  }
  const Real* logits() const { return acts.back().data(); }
};

// Softmax cross-entropy for one example. Writes (softmax - onehot) * scale
// into d_logits and returns the example loss.
template <typename Real>
Real softmax_xent(const Real* z, int classes, int label, Real scale, Real* d_logits) {
  Real mx = z[0];
  for (int c = 1; c < classes; ++c) mx = std::max(mx, z[c]);
  Real sum = 0;
  for (int c = 0; c < classes; ++c) sum += std::exp(z[c] - mx);
  const Real lse = mx + std::log(sum);
  if (d_logits) {
    for (int c = 0; c < classes; ++c)
      d_logits[c] = (std::exp(z[c] - lse) - (c == label ? Real(1) : Real(0))) * scale;
  }
  return lse - z[label];
}

}  // namespace

template <typename Real>
ForwardResult<Real> forward(const ModelState<Real>& model, const Batch<Real>& batch) {
  const Architecture& arch = model.architecture;
  validate_batch(arch, batch);
  const int n = batch.size();
  const auto plan = arch.plan();

  ForwardResult<Real> result;
  result.batch_size = n;
  result.classes = arch.classes();
  auto& cache = result.cache;
  cache.activations.emplace_back(batch.images);
  for (const auto& lp : plan) {
    cache.activations.emplace_back(lp.out.size() * n);
    cache.pool_argmax.emplace_back(
        std::holds_alternative<MaxPool>(lp.layer) ? lp.out.size() * n : 0);
  }

#pragma omp parallel
  {
  std::vector<Real> col_storage;
  const auto col = carve_cols(arch, col_storage);
#pragma omp for schedule(static)
  for (int b = 0; b < n; ++b) {
    ExampleView<Real> view;
    view.col = col;
    for (std::size_t i = 0; i < plan.size(); ++i) {
      view.acts.push_back(cache.activations[i + 1].data() + plan[i].out.size() * b);
      view.argmax.push_back(cache.pool_argmax[i].data() + cache.pool_argmax[i].size() / n * b);
    }
    forward_example(arch, model.params.data(), batch.images.data() + batch.image_size() * b,
                    view);
  }
  }
  result.logits = cache.activations.back();
  for (Real v : result.logits)
    if (!std::isfinite(v)) throw NumericalError("non-finite logits in forward pass");
  return result;
}

template <typename Real>
LossAndGrad<Real> loss_and_grad(const ModelState<Real>& model, const Batch<Real>& batch) {
  const Architecture& arch = model.architecture;
  validate_batch(arch, batch);
  const int n = batch.size();
  const int classes = arch.classes();
  const std::size_t k = arch.parameter_count();
  const Real scale = Real(1) / static_cast<Real>(n);

  std::vector<Real> per_example(k * n, Real(0));
  std::vector<Real> losses(n);

#pragma omp parallel
  {
    Workspace<Real> ws(arch);
    std::vector<Real> d_logits(classes);
#pragma omp for schedule(static)
    for (int b = 0; b < n; ++b) {
      const Real* x = batch.images.data() + batch.image_size() * b;
      forward_example(arch, model.params.data(), x, ws.view);
      losses[b] = softmax_xent(ws.logits(), classes, batch.labels[b], scale, d_logits.data());
      backward_example(arch, model.params.data(), x, ws.view, d_logits.data(),
                       per_example.data() + k * b, ws.delta, ws.delta_in);
    }
  }

  LossAndGrad<Real> out;
  out.grad = GradientVector<Real>(k);
  Real total = 0;
  for (int b = 0; b < n; ++b) {
    total += losses[b];
    const Real* g = per_example.data() + k * b;
    Real* acc = out.grad.values.data();
#pragma omp simd
    for (std::size_t i = 0; i < k; ++i) acc[i] += g[i];
  }
  out.loss = total / static_cast<Real>(n);
  if (!std::isfinite(out.loss)) throw NumericalError("non-finite loss");
  if (!out.grad.all_finite()) throw NumericalError("non-finite gradient");
  return out;
}

template <typename Real>
Real loss(const ModelState<Real>& model, const Batch<Real>& batch) {
  const Architecture& arch = model.architecture;
  validate_batch(arch, batch);
  const int n = batch.size();
  std::vector<Real> losses(n);
#pragma omp parallel
  {
    Workspace<Real> ws(arch);
#pragma omp for schedule(static)
    for (int b = 0; b < n; ++b) {
      forward_example(arch, model.params.data(), batch.images.data() + batch.image_size() * b,
                      ws.view);
      losses[b] = softmax_xent<Real>(ws.logits(), arch.classes(), batch.labels[b], 1, nullptr);
    }
  }
  Real total = 0;
  for (Real l : losses) total += l;
  const Real mean = total / static_cast<Real>(n);
  if (!std::isfinite(mean)) throw NumericalError("non-finite loss");
  return mean;
}

template <typename Real>
GradientVector<Real> finite_diff_grad(const ModelState<Real>& model, const Batch<Real>& batch,
                                      double epsilon) {
  if (!(epsilon > 0)) throw ConfigError("finite-difference epsilon must be positive");
  ModelState<Real> probe = model;
  GradientVector<Real> g(model.parameter_count());
  const Real eps = static_cast<Real>(epsilon);
  for (std::size_t k = 0; k < g.size(); ++k) {
    const Real saved = probe.params[k];
    probe.params[k] = saved + eps;
    const Real up = loss(probe, batch);
    probe.params[k] = saved - eps;
    const Real down = loss(probe, batch);
    probe.params[k] = saved;
    g[k] = (up - down) / (Real(2) * eps);
  }
  return g;
}

template <typename Real>
std::vector<int> predict(const ModelState<Real>& model, const Batch<Real>& batch) {
  const Architecture& arch = model.architecture;
  validate_batch(arch, batch);
  const int n = batch.size();
  const int classes = arch.classes();
  std::vector<int> out(n);
#pragma omp parallel
  {
    Workspace<Real> ws(arch);
#pragma omp for schedule(static)
    for (int b = 0; b < n; ++b) {
      forward_example(arch, model.params.data(), batch.images.data() + batch.image_size() * b,
                      ws.view);
      const Real* z = ws.logits();
      int best = 0;
      for (int c = 1; c < classes; ++c)
        if (z[c] > z[best]) best = c;
      out[b] = best;
    }
  }
  return out;
}

#define SGGV_INSTANTIATE(Real)                                                             \
  template ForwardResult<Real> forward<Real>(const ModelState<Real>&, const Batch<Real>&); \
  template LossAndGrad<Real> loss_and_grad<Real>(const ModelState<Real>&,                  \
                                                 const Batch<Real>&);                      \
  template Real loss<Real>(const ModelState<Real>&, const Batch<Real>&);                   \
  template GradientVector<Real> finite_diff_grad<Real>(const ModelState<Real>&,            \
                                                       const Batch<Real>&, double);        \
  template std::vector<int> predict<Real>(const ModelState<Real>&, const Batch<Real>&);

SGGV_INSTANTIATE(float)
SGGV_INSTANTIATE(double)

}  // namespace sggv::nn
