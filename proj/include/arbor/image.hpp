#pragma once

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace arbor {

// 8-bit grayscale raster, row-major. Ink is bright (255) on a dark (0) background.
struct Image {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> pixels;

  Image() = default;
  Image(int w, int h, std::uint8_t fill = 0) : width(w), height(h), pixels(std::size_t(w) * std::size_t(h), fill) {
    if (w < 0 || h < 0) throw std::invalid_argument("Image: negative size");
  }

  bool inside(int x, int y) const { return x >= 0 && y >= 0 && x < width && y < height; }
  std::uint8_t& at(int x, int y) { return pixels[std::size_t(y) * std::size_t(width) + std::size_t(x)]; }
  std::uint8_t at(int x, int y) const { return pixels[std::size_t(y) * std::size_t(width) + std::size_t(x)]; }
  bool ink(int x, int y) const { return inside(x, y) && at(x, y) != 0; }

  std::size_t ink_count() const {
    return std::size_t(std::count_if(pixels.begin(), pixels.end(), [](std::uint8_t v) { return v != 0; }));
  }

  friend bool operator==(const Image&, const Image&) = default;
};

// Intensity in [0, 1] at a real-valued position, bilinear between pixel centres at
// integer coordinates; samples outside the raster read as background.
inline double sample_bilinear(const Image& img, double x, double y) {
  const int x0 = int(std::floor(x));
  const int y0 = int(std::floor(y));
  const double fx = x - x0;
  const double fy = y - y0;
  auto v = [&](int px, int py) { return img.inside(px, py) ? img.at(px, py) / 255.0 : 0.0; };
  return (1 - fx) * (1 - fy) * v(x0, y0) + fx * (1 - fy) * v(x0 + 1, y0) + (1 - fx) * fy * v(x0, y0 + 1) +
         fx * fy * v(x0 + 1, y0 + 1);
}

inline std::string encode_pgm(const Image& img) {
  std::string out = "P5\n" + std::to_string(img.width) + " " + std::to_string(img.height) + "\n255\n";
  out.append(reinterpret_cast<const char*>(img.pixels.data()), img.pixels.size());
  return out;
}

inline void write_pgm(const std::string& path, const Image& img) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open " + path + " for writing");
  const auto bytes = encode_pgm(img);
  f.write(bytes.data(), std::streamsize(bytes.size()));
  if (!f) throw std::runtime_error("write failed: " + path);
}

// Reads binary (P5) graymaps with maxval 255.
inline Image read_pgm(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open " + path);
  auto token = [&]() {
    std::string t;
    char c;
    while (f.get(c)) {
      if (c == '#') {
        std::string skip;
        std::getline(f, skip);
      } else if (!std::isspace(static_cast<unsigned char>(c))) {
        t.push_back(c);
        break;
      }
    }
    while (f.get(c) && !std::isspace(static_cast<unsigned char>(c))) t.push_back(c);
    return t;
  };
  if (token() != "P5") throw std::runtime_error(path + ": not a binary PGM");
  int w = 0, h = 0, maxval = 0;
  try {
    w = std::stoi(token());
    h = std::stoi(token());
    maxval = std::stoi(token());
  } catch (const std::exception&) {
    throw std::runtime_error(path + ": malformed PGM header");
  }
  if (maxval != 255 || w < 0 || h < 0) throw std::runtime_error(path + ": unsupported PGM header");
  Image img(w, h);
  f.read(reinterpret_cast<char*>(img.pixels.data()), std::streamsize(img.pixels.size()));
  if (f.gcount() != std::streamsize(img.pixels.size())) throw std::runtime_error(path + ": truncated PGM data");
  return img;
}

}  // namespace arbor
