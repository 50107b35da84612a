#pragma once

#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>

#include "json.hpp"

#include "arbor/graph.hpp"

namespace arbor {

using json = nlohmann::json;

// {"canvas":[W,H],"nodes":[[id,x,y],...],"edges":[[i,j],...]}
inline json graph_to_json(const Graph& g) {
  json nodes = json::array();
  for (const auto& v : g.nodes) nodes.push_back({v.id, v.x, v.y});
  json edges = json::array();
  for (const auto& [a, b] : g.edges) edges.push_back({a, b});
  return json{{"canvas", {g.canvas.width, g.canvas.height}}, {"nodes", nodes}, {"edges", edges}};
}

inline Graph graph_from_json(const json& j) {
  Graph g;
  try {
    const auto& canvas = j.at("canvas");
    if (!canvas.is_array() || canvas.size() != 2) throw GraphError("graph JSON: canvas must be [W,H]");
    g.canvas = {canvas[0].get<int>(), canvas[1].get<int>()};
    for (const auto& n : j.at("nodes")) {
      if (!n.is_array() || n.size() != 3) throw GraphError("graph JSON: node entries must be [id,x,y]");
      g.nodes.push_back({n[0].get<int>(), n[1].get<double>(), n[2].get<double>()});
    }
    for (const auto& e : j.at("edges")) {
      if (!e.is_array() || e.size() != 2) throw GraphError("graph JSON: edge entries must be [i,j]");
      const int a = e[0].get<int>(), b = e[1].get<int>();
      if (a >= b) throw GraphError("graph JSON: edge [" + std::to_string(a) + "," + std::to_string(b) + "] needs i<j");
      if (!g.edges.emplace(a, b).second) throw GraphError("graph JSON: duplicate edge");
    }
  } catch (const json::exception& e) {
    throw GraphError(std::string("graph JSON: ") + e.what());
  }
  validate(g);
  return g;
}

inline json read_json_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot open " + path);
  std::stringstream ss;
  ss << f.rdbuf();
  try {
    return json::parse(ss.str());
  } catch (const json::parse_error& e) {
    throw std::runtime_error(path + ": malformed JSON at byte " + std::to_string(e.byte) + ": " + e.what());
  }
}

inline void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open " + path + " for writing");
  f << text;
  if (!f) throw std::runtime_error("write failed: " + path);
}

inline void write_json_file(const std::string& path, const json& j) { write_text_file(path, j.dump(1) + "\n"); }

inline Graph read_graph(const std::string& path) { return graph_from_json(read_json_file(path)); }
inline void write_graph(const std::string& path, const Graph& g) { write_json_file(path, graph_to_json(g)); }

}  // namespace arbor
