#include <doctest.h>

#include <fstream>
#include <set>
#include <sstream>

#include "sggv/common/error.hpp"
#include "sggv/data/folder.hpp"
#include "sggv/data/image_io.hpp"
#include "sggv/data/synthetic.hpp"
#include "support.hpp"

using namespace sggv;
using namespace sggv::data;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream is(p, std::ios::binary);
  std::ostringstream os;
  os << is.rdbuf();
  return os.str();
}

Image checker_image(int h, int w) {
  Image img(3, h, w);
  for (int c = 0; c < 3; ++c)
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x) img.at(c, y, x) = ((x + y + c) % 5) / 255.0 * 40;
  return img;
}

}  // namespace

TEST_CASE("rendering is deterministic") {
  Rng a(12), b(12);
  const auto ra = render_example(ShapeClass::Circle, TextureStyle::SolidColor, 32, a);
  const auto rb = render_example(ShapeClass::Circle, TextureStyle::SolidColor, 32, b);
  CHECK(ra.image == rb.image);
  CHECK(ra.mask == rb.mask);
  CHECK(ra.image.channels == 3);
  CHECK(ra.image.height == 32);
}

TEST_CASE("foreground masks cover 10% to 60% of the image") {
  const std::vector<ShapeClass> shapes = {ShapeClass::Circle, ShapeClass::Square,
                                          ShapeClass::Triangle, ShapeClass::Cross,
                                          ShapeClass::Ring};
  const std::vector<TextureStyle> styles = {
      TextureStyle::SolidColor, TextureStyle::Stripes, TextureStyle::Checker,
      TextureStyle::SpeckleNoise, TextureStyle::RadialGradient};
  Rng rng(1);
  double lo = 1, hi = 0;
  bool in_range = true;
  for (int i = 0; i < 1000; ++i) {
    const auto r = render_example(shapes[i % 5], styles[(i / 5) % 5], 32, rng);
    double area = 0;
    for (auto m : r.mask) area += m;
    area /= r.mask.size();
    lo = std::min(lo, area);
    hi = std::max(hi, area);
    for (double v : r.image.pixels) in_range = in_range && v >= 0.0 && v <= 1.0;
  }
  CHECK(in_range);
  CHECK(lo >= 0.10);
  CHECK(hi <= 0.60);
}

TEST_CASE("the same geometry seed gives the same mask in every style") {
  Rng a(99), b(99);
  const auto solid = render_example(ShapeClass::Square, TextureStyle::SolidColor, 32, a);
  const auto stripes = render_example(ShapeClass::Square, TextureStyle::Stripes, 32, b);
  CHECK(solid.mask == stripes.mask);
  CHECK(solid.image != stripes.image);
}

TEST_CASE("render rejects small sizes") {
  Rng rng(1);
  CHECK_THROWS_AS(render_example(ShapeClass::Circle, TextureStyle::Checker, 15, rng),
                  ConfigError);
}

TEST_CASE("dataset spec validation") {
  DatasetSpec spec;
  CHECK_NOTHROW(spec.validate());
  auto bad = spec;
  bad.classes = {ShapeClass::Circle};
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  bad = spec;
  bad.domains.resize(2);
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  bad = spec;
  bad.examples_per_cell = 0;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  bad = spec;
  bad.domains[1] = bad.domains[0];
  CHECK_THROWS_AS(bad.validate(), ConfigError);
}

TEST_CASE("generated datasets are balanced with 70/10/20 splits") {
  DatasetSpec spec;
  spec.examples_per_cell = 100;
  const auto ds = generate_dataset(spec);
  CHECK(ds.class_count() == 3);
  REQUIRE(ds.domain_count() == 4);
  std::size_t total = 0;
  for (const auto& dom : ds.domains) {
    total += dom.examples.size();
    CHECK(dom.indices(Split::Train).size() == 210);
    CHECK(dom.indices(Split::Val).size() == 30);
    CHECK(dom.indices(Split::Test).size() == 60);
    std::vector<int> per_class(3, 0);
    for (const auto& ex : dom.examples) ++per_class[ex.label];
    CHECK(per_class == std::vector<int>{100, 100, 100});
  }
  CHECK(total == 1200);
  CHECK(ds.domains[1].name == "stripes");
  CHECK(ds.class_names[2] == "triangle");
  CHECK(ds.domain_index("checker") == 2);
  CHECK_THROWS_AS(ds.domain_index("nope"), ConfigError);
}

TEST_CASE("split assignment is an exact partition") {
  for (std::size_t n : {1u, 7u, 10u, 33u, 601u}) {
    Rng rng(n);
    const auto s = assign_splits(n, rng);
    REQUIRE(s.size() == n);
    const auto count = [&](Split x) { return std::count(s.begin(), s.end(), x); };
    const double train = static_cast<double>(count(Split::Train));
    const double val = static_cast<double>(count(Split::Val));
    const double test = static_cast<double>(count(Split::Test));
    CHECK(train + val + test == n);
    CHECK(std::abs(train - 0.7 * n) <= 1.0);
    CHECK(std::abs(val - 0.1 * n) <= 1.0);
    CHECK(std::abs(test - 0.2 * n) <= 1.0);
  }
}

TEST_CASE("generation is deterministic and label noise only touches train") {
  DatasetSpec spec;
  spec.examples_per_cell = 20;
  const auto a = generate_dataset(spec), b = generate_dataset(spec);
  for (int d = 0; d < a.domain_count(); ++d)
    for (std::size_t i = 0; i < a.domains[d].examples.size(); ++i) {
      REQUIRE(a.domains[d].examples[i].image == b.domains[d].examples[i].image);
      REQUIRE(a.domains[d].examples[i].split == b.domains[d].examples[i].split);
    }
  spec.label_noise = 0.5;
  const auto noisy = generate_dataset(spec);
  int flipped = 0;
  for (int d = 0; d < a.domain_count(); ++d)
    for (std::size_t i = 0; i < a.domains[d].examples.size(); ++i) {
      const auto& clean = a.domains[d].examples[i];
      const auto& n = noisy.domains[d].examples[i];
      CHECK(n.image == clean.image);
      if (clean.split != Split::Train)
        CHECK(n.label == clean.label);
      else
        flipped += n.label != clean.label;
    }
  CHECK(flipped > 0);
}

TEST_CASE("PNG and BMP round trips") {
  test::ScratchDir dir("io");
  const auto img = checker_image(5, 7);
  write_png(dir.path() / "a.png", img);
  write_bmp(dir.path() / "a.bmp", img);
  const auto png = read_image(dir.path() / "a.png");
  const auto bmp = read_image(dir.path() / "a.bmp");
  REQUIRE(png.height == 5);
  REQUIRE(png.width == 7);
  for (std::size_t i = 0; i < img.pixels.size(); ++i) {
    CHECK(png.pixels[i] == doctest::Approx(img.pixels[i]).epsilon(1e-12));
    CHECK(bmp.pixels[i] == png.pixels[i]);
  }
}

TEST_CASE("undecodable files name the file") {
  test::ScratchDir dir("bad");
  const auto path = dir.path() / "junk.png";
  std::ofstream(path) << "not an image";
  try {
    read_image(path);
    FAIL("junk decoded");
  } catch (const LoadError& e) {
    CHECK(std::string(e.what()).find("junk.png") != std::string::npos);
  }
}

TEST_CASE("bilinear resize") {
  const auto img = checker_image(6, 6);
  const auto same = resize_bilinear(img, 6, 6);
  for (std::size_t i = 0; i < img.pixels.size(); ++i)
    CHECK(std::abs(same.pixels[i] - img.pixels[i]) <= 1e-7);
  const Image flat(3, 5, 9, 0.3);
  const auto up = resize_bilinear(flat, 11, 4);
  CHECK(up.height == 11);
  CHECK(up.width == 4);
  for (double v : up.pixels) CHECK(v == doctest::Approx(0.3));
}

TEST_CASE("image folder loading") {
  test::ScratchDir dir("folder");
  for (std::string d : {"photo", "art"})
    for (std::string c : {"dog", "cat"}) {
      fs::create_directories(dir.path() / d / c);
      for (int i = 0; i < 5; ++i)
        write_png(dir.path() / d / c / (std::to_string(i) + ".png"), checker_image(8, 10));
    }
  const auto ds = load_image_folder(dir.path(), {16, 3});
  CHECK(ds.domain_count() == 2);
  CHECK(ds.domains[0].name == "art");
  CHECK(ds.class_names == std::vector<std::string>{"cat", "dog"});
  std::size_t n = 0;
  for (const auto& dom : ds.domains) {
    n += dom.examples.size();
    CHECK(dom.examples.front().image.height == 16);
    CHECK(dom.examples.front().label == 0);
  }
  CHECK(n == 20);

  SUBCASE("missing class directory") {
    fs::remove_all(dir.path() / "art" / "dog");
    try {
      load_image_folder(dir.path(), {16, 3});
      FAIL("loaded");
    } catch (const LoadError& e) {
      const std::string msg = e.what();
      CHECK(msg.find("art") != std::string::npos);
      CHECK(msg.find("dog") != std::string::npos);
    }
  }
  SUBCASE("empty class directory") {
    for (const auto& f : fs::directory_iterator(dir.path() / "photo" / "cat")) fs::remove(f);
    try {
      load_image_folder(dir.path(), {16, 3});
      FAIL("loaded");
    } catch (const LoadError& e) {
      CHECK(std::string(e.what()).find((fs::path("photo") / "cat").string()) !=
            std::string::npos);
    }
  }
}

TEST_CASE("export and reload") {
  test::ScratchDir dir("export");
  DatasetSpec spec;
  spec.examples_per_cell = 4;
  const auto ds = generate_dataset(spec);
  export_dataset(ds, dir.path());
  const std::string manifest = slurp(dir.path() / "manifest.csv");
  CHECK(manifest.rfind("path,domain,class,split\n", 0) == 0);
  CHECK(std::count(manifest.begin(), manifest.end(), '\n') == 1 + 4 * 3 * 4);
  const auto back = load_image_folder(dir.path(), {32, 0});
  CHECK(back.domain_count() == 4);
  CHECK(back.class_count() == 3);
  // Folder order is alphabetical; PNG quantises to 8 bits.
  const auto& src = ds.domains[ds.domain_index("checker")].examples[0].image;
  const auto& dst = back.domains[back.domain_index("checker")].examples[0].image;
  for (std::size_t i = 0; i < src.pixels.size(); ++i)
    REQUIRE(std::abs(src.pixels[i] - dst.pixels[i]) <= 0.5 / 255 + 1e-12);
}
