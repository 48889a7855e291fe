#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "sggv/nn/architecture.hpp"

namespace sggv::nn {

// Flat vector of K partial derivatives, one per model parameter.
template <typename Real>
struct GradientVector {
  std::vector<Real> values;

  GradientVector() = default;
  explicit GradientVector(std::size_t k) : values(k, Real(0)) {}
  explicit GradientVector(std::vector<Real> v) : values(std::move(v)) {}

  std::size_t size() const { return values.size(); }
  Real& operator[](std::size_t k) { return values[k]; }
  const Real& operator[](std::size_t k) const { return values[k]; }
  std::span<const Real> span() const { return values; }
  bool all_finite() const;
  bool operator==(const GradientVector&) const = default;
};

// Parameters plus Adam moment buffers. params, first_moment and
// second_moment always have length architecture.parameter_count().
template <typename Real>
struct ModelState {
  Architecture architecture;
  std::vector<Real> params;
  std::vector<Real> first_moment;
  std::vector<Real> second_moment;
  std::uint64_t step = 0;

  explicit ModelState(Architecture arch);

  std::size_t parameter_count() const { return params.size(); }
  bool operator==(const ModelState&) const = default;
};

// Uniform He initialisation: W ~ U(-a, a) with a = sqrt(6 / fan_in), giving
// Var(W) = 2 / fan_in. Biases and moments start at zero.
template <typename Real>
ModelState<Real> init_params(const Architecture& arch, std::uint64_t seed);

// One layer's parameters, unpacked from the flat vector.
template <typename Real>
struct LayerTensors {
  std::vector<Real> weights;
  std::vector<Real> bias;
  bool operator==(const LayerTensors&) const = default;
};

// One entry per layer in the plan; parameter-free layers get empty tensors.
template <typename Real>
std::vector<LayerTensors<Real>> unflatten(const Architecture& arch,
                                          std::span<const Real> flat);
template <typename Real>
std::vector<Real> flatten(const Architecture& arch,
                          std::span<const LayerTensors<Real>> layers);

// B images of shape C x H x W stored contiguously, with class labels.
template <typename Real>
struct Batch {
  int channels = 0;
  int height = 0;
  int width = 0;
  std::vector<Real> images;
  std::vector<int> labels;
  int domain = 0;

  int size() const { return static_cast<int>(labels.size()); }
  std::size_t image_size() const {
    return static_cast<std::size_t>(channels) * height * width;
  }
  std::span<const Real> image(int i) const {
    return std::span<const Real>(images).subspan(i * image_size(), image_size());
  }
};

// Throws InputError unless the batch is non-empty, matches the architecture's
// input shape, has labels in [0, classes) and pixels in [0, 1].
template <typename Real>
void validate_batch(const Architecture& arch, const Batch<Real>& batch);

struct AdamConfig {
  double learning_rate = 1e-5;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  double weight_decay = 5e-5;
};

// Adam with bias correction. Weight decay is an L2 term added to the gradient
// before the moment updates (g <- g + wd * theta). Increments model.step.
template <typename Real>
void adam_step(ModelState<Real>& model, std::span<const Real> grad,
               const AdamConfig& cfg);

}  // namespace sggv::nn
