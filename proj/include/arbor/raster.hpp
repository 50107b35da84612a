#pragma once

#include <cmath>
#include <cstdlib>
#include <stdexcept>
#include <string>

#include "arbor/graph.hpp"
#include "arbor/image.hpp"

namespace arbor {

inline int round_px(double v) { return int(std::lround(v)); }

// Stamps a stroke x stroke square centred on (x, y); even widths extend towards +x/+y.
inline void stamp(Image& img, int x, int y, int stroke, std::uint8_t value) {
  const int lo = -(stroke - 1) / 2;
  const int hi = stroke / 2;
  for (int dy = lo; dy <= hi; ++dy)
    for (int dx = lo; dx <= hi; ++dx)
      if (img.inside(x + dx, y + dy)) img.at(x + dx, y + dy) = value;
}

// Integer midpoint (Bresenham) line between pixel positions, drawn with a square brush.
inline void draw_line(Image& img, int x0, int y0, int x1, int y1, int stroke = 1, std::uint8_t value = 255) {
  const int dx = std::abs(x1 - x0);
  const int dy = -std::abs(y1 - y0);
  const int sx = x0 < x1 ? 1 : -1;
  const int sy = y0 < y1 ? 1 : -1;
  int err = dx + dy;
  for (;;) {
    stamp(img, x0, y0, stroke, value);
    if (x0 == x1 && y0 == y1) break;
    const int e2 = 2 * err;
    if (e2 >= dy) {
      err += dy;
      x0 += sx;
    }
    if (e2 <= dx) {
      err += dx;
      y0 += sy;
    }
  }
}

// Draws every edge of g onto a blank canvas-sized image. Node positions are rounded
// to the nearest pixel.
inline Image rasterize(const Graph& g, int stroke = 1) {
  if (stroke < 1) throw std::invalid_argument("rasterize: stroke width must be >= 1");
  for (const auto& v : g.nodes)
    if (!g.canvas.contains(v.pos())) throw GraphError("rasterize: node " + std::to_string(v.id) + " outside canvas");
  Image img(g.canvas.width, g.canvas.height);
  for (const auto& [a, b] : g.edges) {
    const Point p = g.pos(a), q = g.pos(b);
    draw_line(img, round_px(p.x), round_px(p.y), round_px(q.x), round_px(q.y), stroke);
  }
  return img;
}

}  // namespace arbor
