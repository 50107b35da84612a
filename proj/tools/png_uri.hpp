#pragma once

#include <png.h>

#include <boost/archive/iterators/base64_from_binary.hpp>
#include <boost/archive/iterators/transform_width.hpp>
#include <stdexcept>
#include <string>
#include <vector>

#include "arbor/image.hpp"

namespace arbor::tools {

// 8-bit grayscale PNG in memory.
inline std::vector<unsigned char> encode_png(const Image& img) {
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (!png) throw std::runtime_error("png: cannot create write struct");
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_write_struct(&png, nullptr);
    throw std::runtime_error("png: cannot create info struct");
  }
  std::vector<unsigned char> out;
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw std::runtime_error("png: encoding failed");
  }
  png_set_write_fn(
      png, &out,
      [](png_structp p, png_bytep data, png_size_t n) {
        auto* buf = static_cast<std::vector<unsigned char>*>(png_get_io_ptr(p));
        buf->insert(buf->end(), data, data + n);
      },
      nullptr);
  png_set_IHDR(png, info, png_uint_32(img.width), png_uint_32(img.height), 8, PNG_COLOR_TYPE_GRAY,
               PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  for (int y = 0; y < img.height; ++y)
    png_write_row(png, const_cast<png_bytep>(img.pixels.data() + std::size_t(y) * std::size_t(img.width)));
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
  return out;
}

inline std::string base64(const std::vector<unsigned char>& bytes) {
  using namespace boost::archive::iterators;
  using It = base64_from_binary<transform_width<std::vector<unsigned char>::const_iterator, 6, 8>>;
  std::string s(It(bytes.begin()), It(bytes.end()));
  s.append((3 - bytes.size() % 3) % 3, '=');
  return s;
}

// Ink drawn mid-gray on white so the coloured overlay stays readable.
inline std::string png_data_uri(const Image& img) {
  Image shown(img.width, img.height);
  for (std::size_t k = 0; k < img.pixels.size(); ++k)
    shown.pixels[k] = static_cast<std::uint8_t>(255 - (int(img.pixels[k]) * 96) / 255);
  return "data:image/png;base64," + base64(encode_png(shown));
}

}  // namespace arbor::tools
