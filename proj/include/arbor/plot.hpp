#pragma once

#include <iomanip>
#include <sstream>
#include <string>

#include "arbor/graph.hpp"

namespace arbor {

struct OverlayStyle {
  double edge_width = 2.0;
  double edge_opacity = 0.6;
  double node_radius = 2.5;
};

inline constexpr const char* kGtColor = "#0000ff";
inline constexpr const char* kPredColor = "#ff0000";
inline constexpr const char* kNodeColor = "#ffff00";
inline constexpr const char* kKeypointColor = "#00ffff";

// Ground truth in blue under the prediction in red; both translucent, so shared edges
// read as purple. Prediction nodes are yellow, its keypoints cyan. `background` is an
// href (usually a data URI) and may be empty.
inline std::string overlay_svg(const Graph& gt, const Graph& pred, const std::string& background,
                               const OverlayStyle& style = {}) {
  const int w = gt.canvas.width, h = gt.canvas.height;
  std::ostringstream os;
  os << std::setprecision(6);
  os << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
     << "<svg xmlns=\"http://www.w3.org/2000/svg\" xmlns:xlink=\"http://www.w3.org/1999/xlink\" width=\"" << w
     << "\" height=\"" << h << "\" viewBox=\"0 0 " << w << " " << h << "\">\n";
  if (!background.empty())
    os << "<image id=\"background\" x=\"0\" y=\"0\" width=\"" << w << "\" height=\"" << h
       << "\" xlink:href=\"" << background << "\"/>\n";

  auto edges = [&](const Graph& g, const char* id, const char* color) {
    os << "<g id=\"" << id << "\" stroke=\"" << color << "\" stroke-opacity=\"" << style.edge_opacity
       << "\" stroke-width=\"" << style.edge_width << "\" stroke-linecap=\"round\">\n";
    for (const auto& [a, b] : g.edges) {
      const Point p = g.pos(a), q = g.pos(b);
      os << "<line x1=\"" << p.x << "\" y1=\"" << p.y << "\" x2=\"" << q.x << "\" y2=\"" << q.y << "\"/>\n";
    }
    os << "</g>\n";
  };
  edges(gt, "gt", kGtColor);
  edges(pred, "pred", kPredColor);

  const auto deg = degrees(pred);
  os << "<g id=\"nodes\">\n";
  for (std::size_t k = 0; k < pred.nodes.size(); ++k) {
    const auto& v = pred.nodes[k];
    os << "<circle cx=\"" << v.x << "\" cy=\"" << v.y << "\" r=\"" << style.node_radius << "\" fill=\""
       << (deg[k] != 2 ? kKeypointColor : kNodeColor) << "\"/>\n";
  }
  os << "</g>\n</svg>\n";
  return os.str();
}

}  // namespace arbor
