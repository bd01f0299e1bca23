#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "brepnet/data.hpp"
#include "brepnet/rng.hpp"
#include "brepnet/topology.hpp"
#include "brepnet/types.hpp"

namespace brepnet::testing {

/// Cube topology assembled by hand from face vertex loops, independently of
/// the production generator. 6 faces, 12 edges, 24 coedges.
inline SolidTopology make_cube_topology() {
  const std::array<std::array<int, 4>, 6> loops = {{
      {0, 3, 2, 1},  // bottom
      {4, 5, 6, 7},  // top
      {0, 1, 5, 4},  // south
      {1, 2, 6, 5},  // east
      {2, 3, 7, 6},  // north
      {3, 0, 4, 7},  // west
  }};

  struct Arc {
    int v0, v1, face, position;
  };
  std::vector<Arc> arcs;
  for (int f = 0; f < 6; ++f) {
    for (int j = 0; j < 4; ++j) {
      arcs.push_back({loops[f][j], loops[f][(j + 1) % 4], f, j});
    }
  }

  SolidTopology topo;
  topo.num_faces = 6;
  const int nc = static_cast<int>(arcs.size());
  topo.coedge_next.resize(nc);
  topo.coedge_mate.resize(nc);
  topo.coedge_edge.resize(nc);
  topo.coedge_face.resize(nc);

  std::vector<std::pair<int, int>> edge_pairs;
  for (int i = 0; i < nc; ++i) {
    const Arc& a = arcs[i];
    topo.coedge_face[i] = a.face;
    topo.coedge_next[i] = a.face * 4 + (a.position + 1) % 4;

    for (int j = 0; j < nc; ++j) {
      if (arcs[j].v0 == a.v1 && arcs[j].v1 == a.v0) topo.coedge_mate[i] = j;
    }

    const std::pair<int, int> key{std::min(a.v0, a.v1), std::max(a.v0, a.v1)};
    int edge = -1;
    for (std::size_t e = 0; e < edge_pairs.size(); ++e) {
      if (edge_pairs[e] == key) edge = static_cast<int>(e);
    }
    if (edge < 0) {
      edge = static_cast<int>(edge_pairs.size());
      edge_pairs.push_back(key);
    }
    topo.coedge_edge[i] = edge;
  }
  topo.num_edges = static_cast<Index>(edge_pairs.size());
  return topo;
}

/// Cube record with unit attributes, usable wherever features are needed.
inline SolidRecord make_cube_record(const std::string& id = "cube", bool labeled = false) {
  SolidRecord record;
  record.id = id;
  record.topology = make_cube_topology();
  record.faces.assign(6, FaceAttributes{SurfaceType::kPlane, 1.0});
  record.edges.assign(12, EdgeAttributes{CurveType::kLine, EdgeConvexity::kConvex, false, 1.0});
  for (Index i = 0; i < record.topology.num_coedges(); ++i) {
    record.coedges.push_back({i % 2 == 0});
  }
  if (labeled) record.labels.assign(6, 0);
  return record;
}

/// Executes a walk string by stepping the raw pointer arrays one hop at a
/// time. P is resolved by scanning for the predecessor so the oracle shares
/// nothing with the compiled-operator path.
inline Index walk_oracle(const SolidTopology& topo, Index start, const std::string& walk) {
  Index cur = start;
  for (char c : walk) {
    switch (c) {
      case 'I':
        break;
      case 'N':
        cur = topo.coedge_next[cur];
        break;
      case 'P': {
        Index j = 0;
        while (topo.coedge_next[j] != cur) ++j;
        cur = j;
        break;
      }
      case 'M':
        cur = topo.coedge_mate[cur];
        break;
      case 'E':
        cur = topo.coedge_edge[cur];
        break;
      case 'F':
        cur = topo.coedge_face[cur];
        break;
      default:
        throw std::logic_error("oracle: bad walk character");
    }
  }
  return cur;
}

/// Random coedge-to-coedge or terminal walk string.
inline std::string random_walk_string(Rng& rng, bool allow_terminal = true) {
  const int length = rng.int_in(0, 6);
  std::string walk;
  for (int i = 0; i < length; ++i) {
    walk.push_back("NPM"[rng.below(3)]);
  }
  if (allow_terminal && rng.uniform() < 0.5) walk.push_back(rng.uniform() < 0.5 ? 'E' : 'F');
  if (walk.empty()) walk = "I";
  return walk;
}

/// Random synthetic solid across all generator kinds.
inline GeneratedSolid random_solid(Rng& rng, bool labeled = true) {
  const SynthKind kinds[] = {SynthKind::kBox, SynthKind::kPrism, SynthKind::kBoxWithHole, SynthKind::kFilletedBox};
  const SynthKind kind = kinds[rng.below(4)];
  SynthParams params;
  params.labeled = labeled;
  return generate_synthetic(kind, params, rng.next());
}

}  // namespace brepnet::testing
