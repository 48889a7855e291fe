#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace sggv::nn {

struct InputSpec {
  int channels = 3;
  int height = 32;
  int width = 32;
};

struct Conv {
  int kernel_h = 3;
  int kernel_w = 3;
  int out_channels = 1;
  int stride = 1;
  int padding = 0;
};
struct ReLU {};
struct MaxPool {
  int window = 2;
  int stride = 2;
};
struct Flatten {};
struct Dense {
  int out_features = 1;
};

using Layer = std::variant<Conv, ReLU, MaxPool, Flatten, Dense>;

// Activation shape. Flat tensors are (n, 1, 1) with `flat` set; Dense only
// accepts flat input and Conv/MaxPool only accept spatial input.
struct TensorShape {
  int channels = 0;
  int height = 1;
  int width = 1;
  bool flat = false;

  std::size_t size() const {
    return static_cast<std::size_t>(channels) * height * width;
  }
  bool operator==(const TensorShape&) const = default;
};

struct LayerPlan {
  Layer layer;
  TensorShape in;
  TensorShape out;
  std::size_t weight_offset = 0;
  std::size_t weight_count = 0;
  std::size_t bias_offset = 0;
  std::size_t bias_count = 0;
  int fan_in = 0;
};

// A validated layer stack. Construction runs the shape chain-check and lays
// out the flat parameter vector: for every parametrised layer, weights
// (Conv: [out][in][kh][kw], Dense: [out][in]) followed by biases.
class Architecture {
 public:
  Architecture(InputSpec input, std::vector<Layer> layers, int classes);

  // conv3x3(8) relu pool conv3x3(16) relu pool flatten dense(classes)
  static Architecture default_classifier(InputSpec input, int classes);
  // Flatten + Dense: a linear softmax classifier on raw pixels.
  static Architecture linear_classifier(InputSpec input, int classes);

  // Canonical text form, e.g.
  // "in:3x32x32|conv:3x3x8/s1/p1|relu|maxpool:2/s2|flatten|dense:3".
  std::string descriptor() const;
  static Architecture parse(std::string_view descriptor);

  const InputSpec& input() const { return input_; }
  TensorShape input_shape() const {
    return {input_.channels, input_.height, input_.width, false};
  }
  int classes() const { return classes_; }
  std::size_t parameter_count() const { return parameter_count_; }
  std::span<const LayerPlan> plan() const { return plan_; }
  std::size_t layer_count() const { return plan_.size(); }

  bool operator==(const Architecture& other) const {
    return descriptor() == other.descriptor();
  }

 private:
  InputSpec input_;
  int classes_ = 0;
  std::vector<LayerPlan> plan_;
  std::size_t parameter_count_ = 0;
};

}  // namespace sggv::nn
