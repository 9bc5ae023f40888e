#pragma once

#include <set>
#include <sstream>
#include <string>

#include "gstar/groupoid.hpp"

namespace gstar {

/// Deterministic DOT rendering of the orbit structure: nodes are units,
/// clusters are orbits, and one edge per unordered pair of units joined by
/// an arrow.  Isotropy shows up as a node annotation rather than loops.
inline std::string export_dot(const FiniteGroupoid& G) {
  auto part = orbit_partition(G);
  std::ostringstream os;
  os << "graph groupoid {\n";
  for (std::size_t k = 0; k < part.orbits.size(); ++k) {
    os << "  subgraph cluster_" << k << " {\n";
    os << "    label=\"orbit " << k << "\";\n";
    for (int u : part.orbits[k]) {
      std::size_t iso = G.isotropy(u).size();
      os << "    u" << u << " [label=\"" << u;
      if (iso > 1) os << " (S=" << iso << ")";
      os << "\"];\n";
    }
    os << "  }\n";
  }
  std::set<std::pair<int, int>> edges;
  for (int g = 0; g < G.n; ++g) {
    int a = G.r(g), b = G.s(g);
    if (a == b) continue;
    edges.insert({std::min(a, b), std::max(a, b)});
  }
  for (auto [a, b] : edges) os << "  u" << a << " -- u" << b << ";\n";
  os << "}\n";
  return os.str();
}

}  // namespace gstar
