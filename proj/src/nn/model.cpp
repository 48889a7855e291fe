#include "sggv/nn/model.hpp"

#include <cmath>
#include <random>
#include <string>

#include "sggv/common/error.hpp"
#include "sggv/common/rng.hpp"

namespace sggv::nn {

template <typename Real>
bool GradientVector<Real>::all_finite() const {
  for (Real v : values)
    if (!std::isfinite(v)) return false;
  return true;
}

template <typename Real>
ModelState<Real>::ModelState(Architecture arch)
    : architecture(std::move(arch)),
      params(architecture.parameter_count(), Real(0)),
      first_moment(architecture.parameter_count(), Real(0)),
      second_moment(architecture.parameter_count(), Real(0)) {}

template <typename Real>
ModelState<Real> init_params(const Architecture& arch, std::uint64_t seed) {
  ModelState<Real> model(arch);
  Rng rng = make_rng(seed, {0x1417});
  for (const auto& layer : arch.plan()) {
    if (layer.weight_count == 0) continue;
    const double bound = std::sqrt(6.0 / layer.fan_in);
    std::uniform_real_distribution<double> dist(-bound, bound);
    for (std::size_t i = 0; i < layer.weight_count; ++i)
      model.params[layer.weight_offset + i] = static_cast<Real>(dist(rng));
  }
  return model;
}

template <typename Real>
std::vector<LayerTensors<Real>> unflatten(const Architecture& arch,
                                          std::span<const Real> flat) {
  if (flat.size() != arch.parameter_count())
    throw InputError("parameter vector has length " + std::to_string(flat.size()) +
                     ", architecture expects " + std::to_string(arch.parameter_count()));
  std::vector<LayerTensors<Real>> out;
  out.reserve(arch.layer_count());
  for (const auto& layer : arch.plan()) {
    auto w = flat.subspan(layer.weight_offset, layer.weight_count);
    auto b = flat.subspan(layer.bias_offset, layer.bias_count);
    out.push_back({{w.begin(), w.end()}, {b.begin(), b.end()}});
  }
  return out;
}

template <typename Real>
std::vector<Real> flatten(const Architecture& arch,
                          std::span<const LayerTensors<Real>> layers) {
  if (layers.size() != arch.layer_count())
    throw InputError("layer tensor count does not match architecture");
  std::vector<Real> flat(arch.parameter_count());
  for (std::size_t i = 0; i < layers.size(); ++i) {
    const auto& p = arch.plan()[i];
    if (layers[i].weights.size() != p.weight_count || layers[i].bias.size() != p.bias_count)
      throw InputError("layer " + std::to_string(i) + " tensor size mismatch");
    std::copy(layers[i].weights.begin(), layers[i].weights.end(),
              flat.begin() + p.weight_offset);
    std::copy(layers[i].bias.begin(), layers[i].bias.end(), flat.begin() + p.bias_offset);
  }
  return flat;
}

template <typename Real>
void validate_batch(const Architecture& arch, const Batch<Real>& batch) {
  const auto& in = arch.input();
  if (batch.size() < 1) throw InputError("batch is empty");
  if (batch.channels != in.channels || batch.height != in.height || batch.width != in.width)
    throw InputError("batch images are " + std::to_string(batch.channels) + "x" +
                     std::to_string(batch.height) + "x" + std::to_string(batch.width) +
                     ", architecture expects " + std::to_string(in.channels) + "x" +
                     std::to_string(in.height) + "x" + std::to_string(in.width));
  if (batch.images.size() != batch.image_size() * batch.labels.size())
    throw InputError("batch image buffer size does not match label count");
  for (int y : batch.labels)
    if (y < 0 || y >= arch.classes())
      throw InputError("label " + std::to_string(y) + " outside [0, " +
                       std::to_string(arch.classes()) + ")");
  for (Real v : batch.images)
    if (!(v >= Real(0) && v <= Real(1)))
      throw InputError("pixel value outside [0, 1]");
}

template <typename Real>
void adam_step(ModelState<Real>& model, std::span<const Real> grad,
               const AdamConfig& cfg) {
  const std::size_t k = model.parameter_count();
  if (grad.size() != k)
    throw InputError("gradient length " + std::to_string(grad.size()) +
                     " does not match parameter count " + std::to_string(k));
  if (!(cfg.learning_rate > 0)) throw ConfigError("learning rate must be positive");
  if (cfg.beta1 < 0 || cfg.beta1 >= 1 || cfg.beta2 < 0 || cfg.beta2 >= 1)
    throw ConfigError("Adam betas must lie in [0, 1)");

  model.step += 1;
  const double t = static_cast<double>(model.step);
  const Real b1 = static_cast<Real>(cfg.beta1);
  const Real b2 = static_cast<Real>(cfg.beta2);
  const Real wd = static_cast<Real>(cfg.weight_decay);
  const Real eps = static_cast<Real>(cfg.epsilon);
  const Real bc1 = static_cast<Real>(1.0 - std::pow(cfg.beta1, t));
  const Real bc2 = static_cast<Real>(1.0 - std::pow(cfg.beta2, t));
  const Real lr = static_cast<Real>(cfg.learning_rate);

  Real* theta = model.params.data();
  Real* m = model.first_moment.data();
  Real* v = model.second_moment.data();
#pragma omp simd
  for (std::size_t i = 0; i < k; ++i) {
    const Real g = grad[i] + wd * theta[i];
    m[i] = b1 * m[i] + (Real(1) - b1) * g;
    v[i] = b2 * v[i] + (Real(1) - b2) * g * g;
    const Real m_hat = m[i] / bc1;
    const Real v_hat = v[i] / bc2;
    theta[i] -= lr * m_hat / (std::sqrt(v_hat) + eps);
  }
}

#define SGGV_INSTANTIATE(Real)                                                       \
  template struct GradientVector<Real>;                                              \
  template struct ModelState<Real>;                                                  \
  template ModelState<Real> init_params<Real>(const Architecture&, std::uint64_t);   \
  template std::vector<LayerTensors<Real>> unflatten<Real>(const Architecture&,      \
                                                           std::span<const Real>);   \
  template std::vector<Real> flatten<Real>(const Architecture&,                      \
                                           std::span<const LayerTensors<Real>>);     \
  template void validate_batch<Real>(const Architecture&, const Batch<Real>&);       \
  template void adam_step<Real>(ModelState<Real>&, std::span<const Real>,            \
                                const AdamConfig&);

SGGV_INSTANTIATE(float)
SGGV_INSTANTIATE(double)

}  // namespace sggv::nn
