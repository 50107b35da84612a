#pragma once

#include <cctype>
#include <cmath>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

#include "arbor/graph.hpp"
#include "arbor/rng.hpp"

namespace arbor::lsystem {

// One L-system symbol. F (segment) and A (growing leaf edge) carry the number of
// rewrites that produced them; turns and brackets carry -1.
struct Symbol {
  char op = 'F';
  int generation = -1;

  bool draws() const { return op == 'F' || op == 'A'; }
  friend bool operator==(const Symbol&, const Symbol&) = default;
};

using Sequence = std::vector<Symbol>;

class SyntaxError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

inline bool is_op(char c) { return c == 'F' || c == 'A' || c == '+' || c == '-' || c == '[' || c == ']'; }

inline void check_balanced(const Sequence& s) {
  int depth = 0;
  for (const auto& sym : s) {
    if (sym.op == '[') ++depth;
    if (sym.op == ']' && --depth < 0) throw SyntaxError("unbalanced ']'");
  }
  if (depth != 0) throw SyntaxError("unbalanced '['");
}

// Parses "F0[+A0]F0[-A0]A0". A drawing symbol without digits gets `default_generation`.
inline Sequence parse(const std::string& text, int default_generation = 0) {
  Sequence out;
  for (std::size_t k = 0; k < text.size();) {
    const char c = text[k++];
    if (std::isspace(static_cast<unsigned char>(c))) continue;
    if (!is_op(c)) throw SyntaxError(std::string("unknown symbol '") + c + "'");
    Symbol sym{c, -1};
    if (sym.draws()) {
      std::size_t end = k;
      while (end < text.size() && std::isdigit(static_cast<unsigned char>(text[end]))) ++end;
      sym.generation = end > k ? std::stoi(text.substr(k, end - k)) : default_generation;
      k = end;
    } else if (k < text.size() && std::isdigit(static_cast<unsigned char>(text[k]))) {
      throw SyntaxError(std::string("digit after '") + c + "'");
    }
    out.push_back(sym);
  }
  check_balanced(out);
  return out;
}

inline std::string to_string(const Sequence& s) {
  std::string out;
  for (const auto& sym : s) {
    out.push_back(sym.op);
    if (sym.draws()) out += std::to_string(sym.generation);
  }
  return out;
}

// Rewrite rule: F stays F and every A becomes `leaf` (a bracketed pattern over F, A, +, -).
struct Production {
  std::string leaf;

  // Accepts "F->F; A->F[-A]" (or the arrow character); the F part may be omitted.
  static Production parse(const std::string& text) {
    std::string clean;
    for (std::size_t k = 0; k < text.size(); ++k) {
      if (text.compare(k, 3, "\xE2\x86\x92") == 0) {
        clean += "->";
        k += 2;
      } else if (!std::isspace(static_cast<unsigned char>(text[k]))) {
        clean.push_back(text[k]);
      }
    }
    Production p;
    bool have_leaf = false;
    std::size_t start = 0;
    while (start <= clean.size()) {
      std::size_t stop = clean.find(';', start);
      if (stop == std::string::npos) stop = clean.size();
      const std::string part = clean.substr(start, stop - start);
      start = stop + 1;
      if (part.empty()) continue;
      if (part.size() < 3 || part.compare(1, 2, "->") != 0) throw SyntaxError("malformed production '" + part + "'");
      const std::string rhs = part.substr(3);
      if (part[0] == 'F') {
        if (rhs != "F") throw SyntaxError("F must rewrite to F");
      } else if (part[0] == 'A') {
        p.leaf = rhs;
        have_leaf = true;
      } else {
        throw SyntaxError("production for unknown symbol '" + std::string(1, part[0]) + "'");
      }
    }
    if (!have_leaf) throw SyntaxError("production has no A rule");
    p.check();
    return p;
  }

  void check() const {
    if (leaf.empty()) throw SyntaxError("empty A production");
    bool draws = false;
    for (char c : leaf) {
      if (!is_op(c)) throw SyntaxError("A production '" + leaf + "' contains '" + std::string(1, c) + "'");
      draws = draws || c == 'F' || c == 'A';
    }
    if (!draws) throw SyntaxError("A production '" + leaf + "' draws nothing");
    check_balanced(lsystem::parse(leaf));
  }
};

// Replaces every A with the production, numbering new symbols one generation later.
inline Sequence rewrite(const Sequence& seq, const Production& rule) {
  rule.check();
  Sequence out;
  for (const auto& sym : seq) {
    if (sym.op != 'A') {
      out.push_back(sym);
      continue;
    }
    for (const auto& r : lsystem::parse(rule.leaf, sym.generation + 1)) out.push_back(r);
  }
  return out;
}

// As above, drawing an independent production for each A.
inline Sequence rewrite(const Sequence& seq, std::span<const Production> rules, Rng& rng) {
  if (rules.empty()) throw std::invalid_argument("rewrite: no productions");
  Sequence out;
  for (const auto& sym : seq) {
    if (sym.op != 'A') {
      out.push_back(sym);
      continue;
    }
    const auto& rule = rules[std::size_t(rng.below(rules.size()))];
    for (const auto& r : lsystem::parse(rule.leaf, sym.generation + 1)) out.push_back(r);
  }
  return out;
}

struct RuleSet {
  std::vector<std::string> axioms;
  std::vector<Production> productions;

  void check() const {
    if (axioms.empty() || productions.empty()) throw SyntaxError("rule set needs at least one axiom and production");
    for (const auto& a : axioms) lsystem::parse(a);
    for (const auto& p : productions) p.check();
  }
};

// Three axioms and eight productions; the first axiom and first production are the
// documented worked example, the rest are bracketed patterns of depth <= 2.
inline RuleSet default_rules() {
  RuleSet r;
  r.axioms = {"F[+A]F[-A]A", "F[-A]F[+A]FA", "FF[+A][-A]A"};
  for (const char* leaf : {"F[-A]", "F[+A]", "F[+A][-A]", "F[+A]A", "F[-A]A", "FA", "F[+A[-A]]A", "F[-A[+A]]A"})
    r.productions.push_back({leaf});
  return r;
}

// {"axioms": ["F[+A]F[-A]A", ...], "productions": ["F->F;A->F[-A]", ...]}
inline RuleSet rules_from_json(const nlohmann::json& j) {
  RuleSet r;
  try {
    for (const auto& a : j.at("axioms")) r.axioms.push_back(a.get<std::string>());
    for (const auto& p : j.at("productions")) r.productions.push_back(Production::parse(p.get<std::string>()));
  } catch (const nlohmann::json::exception& e) {
    throw SyntaxError(std::string("rule file: ") + e.what());
  }
  r.check();
  return r;
}

struct GeomConfig {
  Canvas canvas{512, 512};
  double base_length = 24.0;  // pixels, before fitting
  double length_min = 0.5;    // segment length = base_length * U[length_min, length_max]
  double length_max = 2.5;
  double angle_min_deg = 10.0;  // each turn draws U[angle_min, angle_max]
  double angle_max_deg = 35.0;
  bool fixed_angle = false;  // use the range midpoint for every turn
  int max_iterations = 3;
  int node_cap = 100;
  int stroke = 1;
  double margin = 0.05;  // fraction of each canvas side kept free when fitting
  double resample_interval = 0.0;  // 0 keeps turtle vertices as nodes

  void check() const {
    if (canvas.width <= 0 || canvas.height <= 0) throw std::invalid_argument("GeomConfig: empty canvas");
    if (!(base_length > 0.0)) throw std::invalid_argument("GeomConfig: base_length must be positive");
    if (!(length_min > 0.0) || length_max < length_min) throw std::invalid_argument("GeomConfig: bad length range");
    if (angle_max_deg < angle_min_deg) throw std::invalid_argument("GeomConfig: bad angle range");
    if (max_iterations < 0) throw std::invalid_argument("GeomConfig: negative iteration count");
    if (node_cap < 2) throw std::invalid_argument("GeomConfig: node cap must be >= 2");
    if (stroke < 1) throw std::invalid_argument("GeomConfig: stroke must be >= 1");
    if (!(margin >= 0.0 && margin < 0.5)) throw std::invalid_argument("GeomConfig: margin outside [0, 0.5)");
    if (resample_interval > 0.0 && node_cap > node_capacity(canvas, resample_interval) + 1e-9)
      throw std::invalid_argument("GeomConfig: node cap exceeds the tile capacity for this interval");
  }

  // Nodes a canvas can hold at uniform spacing s: (H/s)(W/s); 256 px at s = 13 gives ~388.
  static double node_capacity(Canvas c, double s) { return (double(c.height) / s) * (double(c.width) / s); }
};

// Turtle interpretation. The turtle starts heading up (-y); F and A each draw one
// segment of length base * U[length_min, length_max]; '+' turns counter-clockwise on
// screen and '-' clockwise by a freshly drawn angle; '[' / ']' push and pop the turtle.
// The drawing is then scaled down (never up) and centred to fit the canvas with the
// configured margin. Returns nullopt when the node count exceeds the cap.
inline std::optional<Graph> interpret(const Sequence& seq, const GeomConfig& geom, Rng& rng) {
  geom.check();
  check_balanced(seq);
  constexpr double kDeg = 3.14159265358979323846 / 180.0;
  struct Turtle {
    int node;
    double heading;  // radians, screen coordinates
  };
  Graph g;
  g.canvas = geom.canvas;
  std::vector<Point> raw{{0.0, 0.0}};
  std::vector<Turtle> stack;
  Turtle t{0, -90.0 * kDeg};
  for (const auto& sym : seq) {
    switch (sym.op) {
      case 'F':
      case 'A': {
        const double len = geom.base_length * rng.uniform(geom.length_min, geom.length_max);
        const Point p = raw[std::size_t(t.node)];
        raw.push_back({p.x + len * std::cos(t.heading), p.y + len * std::sin(t.heading)});
        const int v = int(raw.size()) - 1;
        g.edges.insert(make_edge(t.node, v));
        t.node = v;
        if (int(raw.size()) > geom.node_cap) return std::nullopt;
        break;
      }
      case '+':
      case '-': {
        const double theta = geom.fixed_angle ? 0.5 * (geom.angle_min_deg + geom.angle_max_deg)
                                              : rng.uniform(geom.angle_min_deg, geom.angle_max_deg);
        t.heading += (sym.op == '+' ? -theta : theta) * kDeg;
        break;
      }
      case '[':
        stack.push_back(t);
        break;
      case ']':
        t = stack.back();
        stack.pop_back();
        break;
      default:
        throw SyntaxError(std::string("interpret: unknown symbol '") + sym.op + "'");
    }
  }

  double minx = raw[0].x, maxx = raw[0].x, miny = raw[0].y, maxy = raw[0].y;
  for (const auto& p : raw) {
    minx = std::min(minx, p.x), maxx = std::max(maxx, p.x);
    miny = std::min(miny, p.y), maxy = std::max(maxy, p.y);
  }
  // Keep a half-pixel guard so rounded positions stay strictly inside.
  const double availw = geom.canvas.width * (1.0 - 2.0 * geom.margin) - 1.0;
  const double availh = geom.canvas.height * (1.0 - 2.0 * geom.margin) - 1.0;
  double scale = 1.0;
  if (maxx - minx > 0.0) scale = std::min(scale, availw / (maxx - minx));
  if (maxy - miny > 0.0) scale = std::min(scale, availh / (maxy - miny));
  const double cx = 0.5 * (minx + maxx), cy = 0.5 * (miny + maxy);
  const double ox = 0.5 * (geom.canvas.width - 1), oy = 0.5 * (geom.canvas.height - 1);
  for (const auto& p : raw) g.add_node({ox + (p.x - cx) * scale, oy + (p.y - cy) * scale});
  return g;
}

}  // namespace arbor::lsystem
