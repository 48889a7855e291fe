#include "sggv/data/image_io.hpp"

#include <png.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <csetjmp>
#include <cstdio>
#include <fstream>
#include <memory>
#include <vector>

#include "sggv/common/error.hpp"

namespace sggv::data {
namespace {

using shape::Image;

struct FileCloser {
  void operator()(std::FILE* f) const {
    if (f) std::fclose(f);
  }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

[[noreturn]] void decode_fail(const std::filesystem::path& p, const std::string& why) {
  throw LoadError("cannot decode image " + p.string() + ": " + why);
}

Image read_png(const std::filesystem::path& path) {
  FilePtr f(std::fopen(path.c_str(), "rb"));
  if (!f) decode_fail(path, "cannot open file");
  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!png || !info) {
    png_destroy_read_struct(&png, &info, nullptr);
    decode_fail(path, "libpng initialisation failed");
  }
  std::vector<png_byte> data;
  std::vector<png_bytep> rows;
  png_uint_32 w = 0, h = 0;
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    decode_fail(path, "corrupt PNG data");
  }
  png_init_io(png, f.get());
  png_read_info(png, info);
  w = png_get_image_width(png, info);
  h = png_get_image_height(png, info);
  const int color = png_get_color_type(png, info);
  if (png_get_bit_depth(png, info) == 16) png_set_strip_16(png);
  if (color == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
  if (color == PNG_COLOR_TYPE_GRAY || color == PNG_COLOR_TYPE_GRAY_ALPHA) {
    if (png_get_bit_depth(png, info) < 8) png_set_expand_gray_1_2_4_to_8(png);
    png_set_gray_to_rgb(png);
  }
  if (png_get_valid(png, info, PNG_INFO_tRNS)) png_set_tRNS_to_alpha(png);
  png_set_filler(png, 0xff, PNG_FILLER_AFTER);
  png_read_update_info(png, info);
  data.resize(static_cast<std::size_t>(w) * h * 4);
  rows.resize(h);
  for (png_uint_32 y = 0; y < h; ++y) rows[y] = data.data() + static_cast<std::size_t>(y) * w * 4;
  png_read_image(png, rows.data());
  png_destroy_read_struct(&png, &info, nullptr);

  Image img(3, static_cast<int>(h), static_cast<int>(w));
  for (png_uint_32 y = 0; y < h; ++y)
    for (png_uint_32 x = 0; x < w; ++x)
      for (int c = 0; c < 3; ++c)
        img.at(c, y, x) = data[(static_cast<std::size_t>(y) * w + x) * 4 + c] / 255.0;
  return img;
}

std::uint32_t le32(const unsigned char* p) {
  return p[0] | (p[1] << 8) | (p[2] << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}
std::uint16_t le16(const unsigned char* p) { return static_cast<std::uint16_t>(p[0] | (p[1] << 8)); }

Image read_bmp(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) decode_fail(path, "cannot open file");
  std::vector<unsigned char> buf((std::istreambuf_iterator<char>(is)), {});
  if (buf.size() < 54 || buf[0] != 'B' || buf[1] != 'M') decode_fail(path, "not a BMP file");
  const std::uint32_t offset = le32(&buf[10]);
  const auto width = static_cast<std::int32_t>(le32(&buf[18]));
  const auto raw_height = static_cast<std::int32_t>(le32(&buf[22]));
  const std::uint16_t bpp = le16(&buf[28]);
  const std::uint32_t compression = le32(&buf[30]);
  if ((bpp != 24 && bpp != 32) || (compression != 0 && !(compression == 3 && bpp == 32)))
    decode_fail(path, "only uncompressed 24/32-bit BMP is supported");
  if (width <= 0 || raw_height == 0) decode_fail(path, "bad dimensions");
  const bool top_down = raw_height < 0;
  const int height = top_down ? -raw_height : raw_height;
  const std::size_t bytes_pp = bpp / 8;
  const std::size_t stride = (static_cast<std::size_t>(width) * bytes_pp + 3) & ~std::size_t{3};
  if (offset + stride * height > buf.size()) decode_fail(path, "truncated pixel data");
  Image img(3, height, width);
  for (int y = 0; y < height; ++y) {
    const int src_row = top_down ? y : height - 1 - y;
    const unsigned char* row = &buf[offset + stride * src_row];
    for (int x = 0; x < width; ++x) {
      const unsigned char* px = row + x * bytes_pp;
      img.at(0, y, x) = px[2] / 255.0;
      img.at(1, y, x) = px[1] / 255.0;
      img.at(2, y, x) = px[0] / 255.0;
    }
  }
  return img;
}

unsigned char quantize(double v) {
  return static_cast<unsigned char>(std::lround(std::clamp(v, 0.0, 1.0) * 255.0));
}

}  // namespace

Image read_image(const std::filesystem::path& path) {
  std::ifstream probe(path, std::ios::binary);
  if (!probe) throw LoadError("cannot open image " + path.string());
  std::array<unsigned char, 8> sig{};
  probe.read(reinterpret_cast<char*>(sig.data()), sig.size());
  if (probe.gcount() >= 8 && png_sig_cmp(sig.data(), 0, 8) == 0) return read_png(path);
  if (probe.gcount() >= 2 && sig[0] == 'B' && sig[1] == 'M') return read_bmp(path);
  decode_fail(path, "unrecognised format (expected PNG or BMP)");
}

void write_png(const std::filesystem::path& path, const Image& img) {
  if (img.channels != 1 && img.channels != 3)
    throw InputError("write_png needs a 1- or 3-channel image");
  FilePtr f(std::fopen(path.c_str(), "wb"));
  if (!f) throw Error("cannot open " + path.string() + " for writing");
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!png || !info) {
    png_destroy_write_struct(&png, &info);
    throw Error("libpng initialisation failed");
  }
  const int c = img.channels;
  std::vector<png_byte> data(static_cast<std::size_t>(img.width) * img.height * c);
  for (int y = 0; y < img.height; ++y)
    for (int x = 0; x < img.width; ++x)
      for (int ch = 0; ch < c; ++ch)
        data[(static_cast<std::size_t>(y) * img.width + x) * c + ch] = quantize(img.at(ch, y, x));
  std::vector<png_bytep> rows(img.height);
  for (int y = 0; y < img.height; ++y)
    rows[y] = data.data() + static_cast<std::size_t>(y) * img.width * c;
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw Error("failed writing PNG " + path.string());
  }
  png_init_io(png, f.get());
  png_set_IHDR(png, info, img.width, img.height, 8,
               c == 3 ? PNG_COLOR_TYPE_RGB : PNG_COLOR_TYPE_GRAY, PNG_INTERLACE_NONE,
               PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  png_write_image(png, rows.data());
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
}

void write_bmp(const std::filesystem::path& path, const Image& img) {
  if (img.channels != 1 && img.channels != 3)
    throw InputError("write_bmp needs a 1- or 3-channel image");
  const std::size_t stride = (static_cast<std::size_t>(img.width) * 3 + 3) & ~std::size_t{3};
  const std::uint32_t data_size = static_cast<std::uint32_t>(stride * img.height);
  std::vector<unsigned char> buf(54 + data_size, 0);
  auto put32 = [&](std::size_t at, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) buf[at + i] = static_cast<unsigned char>(v >> (8 * i));
  };
  buf[0] = 'B';
  buf[1] = 'M';
  put32(2, static_cast<std::uint32_t>(buf.size()));
  put32(10, 54);
  put32(14, 40);
  put32(18, static_cast<std::uint32_t>(img.width));
  put32(22, static_cast<std::uint32_t>(img.height));
  buf[26] = 1;
  buf[28] = 24;
  put32(34, data_size);
  for (int y = 0; y < img.height; ++y) {
    unsigned char* row = &buf[54 + stride * (img.height - 1 - y)];
    for (int x = 0; x < img.width; ++x) {
      const int g = img.channels == 1;
      row[x * 3 + 0] = quantize(img.at(g ? 0 : 2, y, x));
      row[x * 3 + 1] = quantize(img.at(g ? 0 : 1, y, x));
      row[x * 3 + 2] = quantize(img.at(0, y, x));
    }
  }
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw Error("cannot open " + path.string() + " for writing");
  os.write(reinterpret_cast<const char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
}

Image resize_bilinear(const Image& img, int height, int width) {
  if (height <= 0 || width <= 0) throw InputError("resize target must be positive");
  if (img.height == height && img.width == width) return img;
  Image out(img.channels, height, width);
  const double sy = static_cast<double>(img.height) / height;
  const double sx = static_cast<double>(img.width) / width;
  for (int y = 0; y < height; ++y) {
    const double fy = std::clamp((y + 0.5) * sy - 0.5, 0.0, img.height - 1.0);
    const int y0 = static_cast<int>(fy);
    const int y1 = std::min(y0 + 1, img.height - 1);
    const double wy = fy - y0;
    for (int x = 0; x < width; ++x) {
      const double fx = std::clamp((x + 0.5) * sx - 0.5, 0.0, img.width - 1.0);
      const int x0 = static_cast<int>(fx);
      const int x1 = std::min(x0 + 1, img.width - 1);
      const double wx = fx - x0;
      for (int c = 0; c < img.channels; ++c) {
        const double top = img.at(c, y0, x0) * (1 - wx) + img.at(c, y0, x1) * wx;
        const double bot = img.at(c, y1, x0) * (1 - wx) + img.at(c, y1, x1) * wx;
        out.at(c, y, x) = top * (1 - wy) + bot * wy;
      }
    }
  }
  return out;
}

}  // namespace sggv::data
