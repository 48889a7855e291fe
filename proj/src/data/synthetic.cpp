#include "sggv/data/synthetic.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <set>

#include "sggv/common/error.hpp"
#include "sggv/shape/jitter.hpp"

namespace sggv::data {
namespace {

const std::array<std::string, 5> kShapeNames{"circle", "square", "triangle", "cross", "ring"};
const std::array<std::string, 5> kStyleNames{"solid-color", "stripes", "checker", "speckle-noise",
                                             "radial-gradient"};

using Rgb = std::array<double, 3>;

struct Geometry {
  double cx, cy, scale;
};

bool inside(ShapeClass shape, const Geometry& g, int size, double px, double py) {
  const double dx = px - g.cx;
  const double dy = py - g.cy;
  const double u = size * g.scale;
  switch (shape) {
    case ShapeClass::Circle:
      return dx * dx + dy * dy <= (0.30 * u) * (0.30 * u);
    case ShapeClass::Square:
      return std::abs(dx) <= 0.27 * u && std::abs(dy) <= 0.27 * u;
    case ShapeClass::Triangle: {
      const double hh = 0.32 * u, hb = 0.36 * u;
      if (dy < -hh || dy > hh) return false;
      return std::abs(dx) <= hb * (dy + hh) / (2 * hh);
    }
    case ShapeClass::Cross: {
      const double hw = 0.10 * u, hl = 0.33 * u;
      return (std::abs(dx) <= hw && std::abs(dy) <= hl) ||
             (std::abs(dy) <= hw && std::abs(dx) <= hl);
    }
    case ShapeClass::Ring: {
      const double r2 = dx * dx + dy * dy;
      return r2 <= (0.33 * u) * (0.33 * u) && r2 >= (0.18 * u) * (0.18 * u);
    }
  }
  return false;
}

// Colour bands per style: foreground and background hue centres plus value
// ranges. Each domain has its own palette and polarity.
struct Palette {
  double fg_hue, bg_hue;
  double fg_val_lo, fg_val_hi;
  double bg_val_lo, bg_val_hi;
};

Palette palette(TextureStyle style) {
  switch (style) {
    case TextureStyle::SolidColor: return {0.00, 0.58, 0.75, 1.00, 0.15, 0.45};
    case TextureStyle::Stripes: return {0.33, 0.83, 0.15, 0.45, 0.70, 0.95};
    case TextureStyle::Checker: return {0.15, 0.66, 0.75, 1.00, 0.15, 0.45};
    case TextureStyle::SpeckleNoise: return {0.90, 0.45, 0.15, 0.45, 0.70, 0.95};
    case TextureStyle::RadialGradient: return {0.08, 0.30, 0.75, 1.00, 0.15, 0.45};
  }
  return {};
}

Rgb hsv(double h, double s, double v) { return shape::hsv_to_rgb(h - std::floor(h), s, v); }

Rgb mix(const Rgb& a, const Rgb& b, double t) {
  return {a[0] + (b[0] - a[0]) * t, a[1] + (b[1] - a[1]) * t, a[2] + (b[2] - a[2]) * t};
}

// Pattern parameters for one region (foreground or background).
struct Fill {
  Rgb a, b;
  double angle = 0, period = 6, phase = 0;
  int cell = 3, ox = 0, oy = 0;
  double noise = 0;
};

Fill make_fill(TextureStyle style, double hue, double val_lo, double val_hi, bool background,
               Rng& rng) {
  Fill f;
  const double h = hue + uniform(rng, -0.06, 0.06);
  const double v = uniform(rng, val_lo, val_hi);
  const double s = uniform(rng, 0.55, 0.95);
  f.a = hsv(h, s, v);
  // Second colour of the pattern: same hue family, shifted value.
  f.b = hsv(h + uniform(rng, -0.05, 0.05), s * uniform(rng, 0.6, 1.0),
            std::clamp(v + (v > 0.5 ? -1.0 : 1.0) * uniform(rng, 0.15, 0.3), 0.0, 1.0));
  f.angle = uniform(rng, 0, std::numbers::pi);
  if (background) f.angle += std::numbers::pi / 2;
  f.period = uniform(rng, 4.0, 8.0);
  f.phase = uniform(rng, 0, 1);
  f.cell = static_cast<int>(uniform(rng, 2.0, 5.999));
  f.ox = static_cast<int>(uniform(rng, 0.0, 5.999));
  f.oy = static_cast<int>(uniform(rng, 0.0, 5.999));
  f.noise = uniform(rng, 0.15, 0.3);
  (void)style;
  return f;
}

Rgb paint(TextureStyle style, const Fill& f, double px, double py, const Geometry& g, int size,
          Rng& rng) {
  switch (style) {
    case TextureStyle::SolidColor:
      return f.a;
    case TextureStyle::Stripes: {
      const double t = (px * std::cos(f.angle) + py * std::sin(f.angle)) / f.period + f.phase;
      return (t - std::floor(t)) < 0.5 ? f.a : f.b;
    }
    case TextureStyle::Checker: {
      const int cx = static_cast<int>(std::floor(px)) + f.ox;
      const int cy = static_cast<int>(std::floor(py)) + f.oy;
      return ((cx / f.cell + cy / f.cell) % 2 == 0) ? f.a : f.b;
    }
    case TextureStyle::SpeckleNoise: {
      std::normal_distribution<double> n(0.0, f.noise);
      const double e = n(rng);
      return {f.a[0] + e, f.a[1] + e, f.a[2] + e};
    }
    case TextureStyle::RadialGradient: {
      const double r = std::hypot(px - g.cx, py - g.cy) / (0.5 * size);
      return mix(f.a, f.b, std::clamp(r, 0.0, 1.0));
    }
  }
  return f.a;
}

}  // namespace

std::string to_string(ShapeClass s) { return kShapeNames[static_cast<int>(s)]; }
std::string to_string(TextureStyle s) { return kStyleNames[static_cast<int>(s)]; }

ShapeClass parse_shape_class(const std::string& s) {
  for (std::size_t i = 0; i < kShapeNames.size(); ++i)
    if (kShapeNames[i] == s) return static_cast<ShapeClass>(i);
  throw ConfigError("unknown shape class '" + s + "'");
}

TextureStyle parse_texture_style(const std::string& s) {
  for (std::size_t i = 0; i < kStyleNames.size(); ++i)
    if (kStyleNames[i] == s) return static_cast<TextureStyle>(i);
  throw ConfigError("unknown texture style '" + s + "'");
}

void DatasetSpec::validate() const {
  if (classes.size() < 2) throw ConfigError("dataset needs at least 2 classes");
  if (domains.size() < 3) throw ConfigError("dataset needs at least 3 domains");
  if (std::set<ShapeClass>(classes.begin(), classes.end()).size() != classes.size())
    throw ConfigError("duplicate class in dataset spec");
  if (std::set<TextureStyle>(domains.begin(), domains.end()).size() != domains.size())
    throw ConfigError("duplicate domain in dataset spec");
  if (image_size < 16) throw ConfigError("image size must be at least 16");
  if (examples_per_cell < 1) throw ConfigError("examples per cell must be at least 1");
  if (label_noise < 0 || label_noise >= 1) throw ConfigError("label noise must lie in [0, 1)");
}

Rendering render_example(ShapeClass shape, TextureStyle style, int size, Rng& rng) {
  if (size < 16) throw ConfigError("render size must be at least 16");
  Geometry g;
  g.cx = size * (0.5 + uniform(rng, -0.1, 0.1));
  g.cy = size * (0.5 + uniform(rng, -0.1, 0.1));
  g.scale = uniform(rng, 0.85, 1.15);

  const Palette pal = palette(style);
  const Fill fg = make_fill(style, pal.fg_hue, pal.fg_val_lo, pal.fg_val_hi, false, rng);
  const Fill bg = make_fill(style, pal.bg_hue, pal.bg_val_lo, pal.bg_val_hi, true, rng);

  Rendering r;
  r.image = Image(3, size, size);
  r.mask.assign(static_cast<std::size_t>(size) * size, 0);
  for (int y = 0; y < size; ++y) {
    for (int x = 0; x < size; ++x) {
      const double px = x + 0.5, py = y + 0.5;
      const bool in = inside(shape, g, size, px, py);
      r.mask[static_cast<std::size_t>(y) * size + x] = in ? 1 : 0;
      const Rgb c = paint(style, in ? fg : bg, px, py, g, size, rng);
      for (int ch = 0; ch < 3; ++ch) r.image.at(ch, y, x) = std::clamp(c[ch], 0.0, 1.0);
    }
  }
  return r;
}

MultiDomainDataset generate_dataset(const DatasetSpec& spec) {
  spec.validate();
  MultiDomainDataset ds;
  for (auto c : spec.classes) ds.class_names.push_back(to_string(c));
  const int n_classes = static_cast<int>(spec.classes.size());
  for (std::size_t d = 0; d < spec.domains.size(); ++d) {
    DomainDataset dom;
    dom.domain = static_cast<int>(d);
    dom.name = to_string(spec.domains[d]);
    dom.examples.resize(static_cast<std::size_t>(n_classes) * spec.examples_per_cell);
#pragma omp parallel for schedule(dynamic)
    for (int idx = 0; idx < static_cast<int>(dom.examples.size()); ++idx) {
      const int c = idx / spec.examples_per_cell;
      const int i = idx % spec.examples_per_cell;
      Rng rng = make_rng(spec.seed, {0xda7a, d, static_cast<std::uint64_t>(c),
                                     static_cast<std::uint64_t>(i)});
      dom.examples[idx].image =
          render_example(spec.classes[c], spec.domains[d], spec.image_size, rng).image;
      dom.examples[idx].label = c;
    }
    Rng split_rng = make_rng(spec.seed, {0x5911, d});
    const auto splits = assign_splits(dom.examples.size(), split_rng);
    for (std::size_t i = 0; i < splits.size(); ++i) dom.examples[i].split = splits[i];
    if (spec.label_noise > 0) {
      Rng noise_rng = make_rng(spec.seed, {0x401e, d});
      for (auto& ex : dom.examples) {
        if (ex.split != Split::Train) continue;
        if (uniform(noise_rng, 0, 1) < spec.label_noise) {
          const int shift = 1 + static_cast<int>(uniform(noise_rng, 0, n_classes - 1));
          ex.label = (ex.label + std::min(shift, n_classes - 1)) % n_classes;
        }
      }
    }
    ds.domains.push_back(std::move(dom));
  }
  return ds;
}

}  // namespace sggv::data
