#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "sggv/common/rng.hpp"
#include "sggv/data/dataset.hpp"

namespace sggv::data {

enum class ShapeClass { Circle, Square, Triangle, Cross, Ring };
enum class TextureStyle { SolidColor, Stripes, Checker, SpeckleNoise, RadialGradient };

std::string to_string(ShapeClass s);
std::string to_string(TextureStyle s);
ShapeClass parse_shape_class(const std::string& s);
TextureStyle parse_texture_style(const std::string& s);

// Classes are shapes, domains are texture styles.
struct DatasetSpec {
  std::vector<ShapeClass> classes{ShapeClass::Circle, ShapeClass::Square, ShapeClass::Triangle};
  std::vector<TextureStyle> domains{TextureStyle::SolidColor, TextureStyle::Stripes,
                                    TextureStyle::Checker, TextureStyle::SpeckleNoise};
  int image_size = 32;
  int examples_per_cell = 200;
  std::uint64_t seed = 0;
  double label_noise = 0.0;

  // Throws ConfigError: < 2 classes, < 3 domains, duplicates, size < 16,
  // empty cells, or label noise outside [0, 1).
  void validate() const;
};

struct Rendering {
  Image image;                      // 3 x size x size
  std::vector<std::uint8_t> mask;   // size x size, 1 inside the shape
};

// Geometry (position within +-10% of the size, scale within +-15%) is drawn
// from `rng` before any texture draw, so two styles rendered from the same
// rng state share an identical foreground mask. Throws ConfigError if
// size < 16.
Rendering render_example(ShapeClass shape, TextureStyle style, int size, Rng& rng);

// One DomainDataset per style in spec order, examples_per_cell per class,
// 70/10/20 splits per domain. Label noise (if any) only touches train.
MultiDomainDataset generate_dataset(const DatasetSpec& spec);

}  // namespace sggv::data
