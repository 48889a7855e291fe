#include "sggv/nn/architecture.hpp"

#include <charconv>
#include <sstream>

#include "sggv/common/error.hpp"

namespace sggv::nn {
namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

[[noreturn]] void fail(std::size_t index, const std::string& what) {
  throw ConfigError("architecture layer " + std::to_string(index) + ": " +
                    what);
}

std::string shape_str(const TensorShape& s) {
  if (s.flat) return "[" + std::to_string(s.channels) + "]";
  return "[" + std::to_string(s.channels) + "x" + std::to_string(s.height) +
         "x" + std::to_string(s.width) + "]";
}

}  // namespace

Architecture::Architecture(InputSpec input, std::vector<Layer> layers,
                           int classes)
    : input_(input), classes_(classes) {
  if (input.channels <= 0 || input.height <= 0 || input.width <= 0)
    throw ConfigError("architecture input dimensions must be positive");
  if (classes <= 0) throw ConfigError("class count must be positive");
  if (layers.empty()) throw ConfigError("architecture has no layers");

  TensorShape cur = input_shape();
  std::size_t offset = 0;
  for (std::size_t i = 0; i < layers.size(); ++i) {
    LayerPlan p;
    p.layer = layers[i];
    p.in = cur;
    std::visit(
        overloaded{
            [&](const Conv& c) {
              if (cur.flat) fail(i, "conv needs spatial input, got " + shape_str(cur));
              if (c.kernel_h <= 0 || c.kernel_w <= 0 || c.out_channels <= 0 ||
                  c.stride <= 0 || c.padding < 0)
                fail(i, "conv parameters must be positive");
              const int oh = (cur.height + 2 * c.padding - c.kernel_h) / c.stride + 1;
              const int ow = (cur.width + 2 * c.padding - c.kernel_w) / c.stride + 1;
              if (cur.height + 2 * c.padding < c.kernel_h ||
                  cur.width + 2 * c.padding < c.kernel_w || oh <= 0 || ow <= 0)
                fail(i, "conv kernel larger than padded input " + shape_str(cur));
              p.out = {c.out_channels, oh, ow, false};
              p.fan_in = cur.channels * c.kernel_h * c.kernel_w;
              p.weight_count = static_cast<std::size_t>(c.out_channels) * p.fan_in;
              p.bias_count = static_cast<std::size_t>(c.out_channels);
            },
            [&](const ReLU&) { p.out = cur; },
            [&](const MaxPool& m) {
              if (cur.flat) fail(i, "maxpool needs spatial input");
              if (m.window <= 0 || m.stride <= 0) fail(i, "maxpool parameters must be positive");
              if (m.window > cur.height || m.window > cur.width)
                fail(i, "maxpool window larger than input " + shape_str(cur));
              p.out = {cur.channels, (cur.height - m.window) / m.stride + 1,
                       (cur.width - m.window) / m.stride + 1, false};
            },
            [&](const Flatten&) {
              p.out = {static_cast<int>(cur.size()), 1, 1, true};
            },
            [&](const Dense& d) {
              if (!cur.flat) fail(i, "dense needs flat input; insert flatten");
              if (d.out_features <= 0) fail(i, "dense width must be positive");
              p.out = {d.out_features, 1, 1, true};
              p.fan_in = cur.channels;
              p.weight_count = static_cast<std::size_t>(d.out_features) * cur.channels;
              p.bias_count = static_cast<std::size_t>(d.out_features);
            }},
        layers[i]);
    p.weight_offset = offset;
    offset += p.weight_count;
    p.bias_offset = offset;
    offset += p.bias_count;
    cur = p.out;
    plan_.push_back(p);
  }
  if (!cur.flat || cur.channels != classes)
    throw ConfigError("final layer output " + shape_str(cur) +
                      " does not match class count " + std::to_string(classes));
  parameter_count_ = offset;
}

Architecture Architecture::default_classifier(InputSpec input, int classes) {
  return Architecture(input,
                      {Conv{3, 3, 8, 1, 1}, ReLU{}, MaxPool{2, 2},
                       Conv{3, 3, 16, 1, 1}, ReLU{}, MaxPool{2, 2}, Flatten{},
                       Dense{classes}},
                      classes);
}

Architecture Architecture::linear_classifier(InputSpec input, int classes) {
  return Architecture(input, {Flatten{}, Dense{classes}}, classes);
}

std::string Architecture::descriptor() const {
  std::ostringstream os;
  os << "in:" << input_.channels << 'x' << input_.height << 'x' << input_.width;
  for (const auto& p : plan_) {
    os << '|';
    std::visit(overloaded{
                   [&](const Conv& c) {
                     os << "conv:" << c.kernel_h << 'x' << c.kernel_w << 'x'
                        << c.out_channels << "/s" << c.stride << "/p" << c.padding;
                   },
                   [&](const ReLU&) { os << "relu"; },
                   [&](const MaxPool& m) { os << "maxpool:" << m.window << "/s" << m.stride; },
                   [&](const Flatten&) { os << "flatten"; },
                   [&](const Dense& d) { os << "dense:" << d.out_features; }},
               p.layer);
  }
  return os.str();
}

namespace {

// Parses integers separated by 'x', "/s" or "/p".
std::vector<int> parse_ints(std::string_view s, std::string_view descriptor) {
  std::vector<int> out;
  const char* p = s.data();
  const char* end = s.data() + s.size();
  while (p < end) {
    int v = 0;
    auto [next, ec] = std::from_chars(p, end, v);
    if (ec != std::errc{} || next == p)
      throw ConfigError("malformed architecture descriptor: " + std::string(descriptor));
    out.push_back(v);
    p = next;
    if (p < end) {
      if (*p == 'x') {
        ++p;
      } else if (*p == '/' && p + 1 < end && (p[1] == 's' || p[1] == 'p')) {
        p += 2;
      } else {
        throw ConfigError("malformed architecture descriptor: " + std::string(descriptor));
      }
    }
  }
  return out;
}

}  // namespace

Architecture Architecture::parse(std::string_view descriptor) {
  std::vector<std::string_view> parts;
  std::size_t start = 0;
  while (start <= descriptor.size()) {
    auto bar = descriptor.find('|', start);
    if (bar == std::string_view::npos) bar = descriptor.size();
    parts.push_back(descriptor.substr(start, bar - start));
    start = bar + 1;
  }
  auto bad = [&] {
    return ConfigError("malformed architecture descriptor: " + std::string(descriptor));
  };
  if (parts.size() < 2 || !parts[0].starts_with("in:")) throw bad();
  auto in = parse_ints(parts[0].substr(3), descriptor);
  if (in.size() != 3) throw bad();
  std::vector<Layer> layers;
  for (std::size_t i = 1; i < parts.size(); ++i) {
    auto part = parts[i];
    if (part == "relu") {
      layers.push_back(ReLU{});
    } else if (part == "flatten") {
      layers.push_back(Flatten{});
    } else if (part.starts_with("conv:")) {
      auto v = parse_ints(part.substr(5), descriptor);
      if (v.size() != 5) throw bad();
      layers.push_back(Conv{v[0], v[1], v[2], v[3], v[4]});
    } else if (part.starts_with("maxpool:")) {
      auto v = parse_ints(part.substr(8), descriptor);
      if (v.size() != 2) throw bad();
      layers.push_back(MaxPool{v[0], v[1]});
    } else if (part.starts_with("dense:")) {
      auto v = parse_ints(part.substr(6), descriptor);
      if (v.size() != 1) throw bad();
      layers.push_back(Dense{v[0]});
    } else {
      throw ConfigError("unknown layer '" + std::string(part) + "' in architecture descriptor");
    }
  }
  int classes = 0;
  for (auto it = layers.rbegin(); it != layers.rend() && classes == 0; ++it)
    if (const auto* d = std::get_if<Dense>(&*it)) classes = d->out_features;
  if (classes == 0) throw ConfigError("architecture has no dense output layer");
  return Architecture({in[0], in[1], in[2]}, std::move(layers), classes);
}

}  // namespace sggv::nn
