#include <cmath>
#include <map>
#include <numbers>
#include <stdexcept>
#include <utility>

#include "brepnet/data.hpp"
#include "brepnet/rng.hpp"

namespace brepnet {
namespace {

/// Assembles a closed manifold solid from per-face vertex loops. Every
/// unordered vertex pair must be traversed exactly twice, once in each
/// direction; mates and edge indices fall out of the pairing.
class SolidBuilder {
 public:
  Index add_vertices(Index count) {
    const Index first = num_vertices_;
    num_vertices_ += count;
    return first;
  }

  Index add_face(FaceAttributes attrs, SegmentLabel label) {
    faces_.push_back(attrs);
    labels_.push_back(static_cast<int>(label));
    loops_of_face_.emplace_back();
    return static_cast<Index>(faces_.size()) - 1;
  }

  void add_loop(Index face, std::vector<Index> vertices) {
    if (vertices.size() < 2) throw std::logic_error("builder: loop needs at least 2 vertices");
    loops_of_face_[face].push_back(std::move(vertices));
  }

  void set_edge(Index v0, Index v1, EdgeAttributes attrs) {
    if (v0 == v1) throw std::logic_error("builder: closed-loop edges are not generated");
    edge_attrs_[key(v0, v1)] = attrs;
  }

  GeneratedSolid build(std::string id, bool labeled) const {
    GeneratedSolid out;
    SolidRecord& record = out.record;
    record.id = std::move(id);
    record.faces = faces_;
    if (labeled) record.labels = labels_;

    std::map<std::pair<Index, Index>, Index> edge_index;    // pair -> edge id
    std::map<std::pair<Index, Index>, Index> open_coedge;   // pair -> first traversal
    Index num_loops = 0;

    for (std::size_t f = 0; f < faces_.size(); ++f) {
      for (const auto& loop : loops_of_face_[f]) {
        ++num_loops;
        const Index first = record.topology.num_coedges();
        const Index n = static_cast<Index>(loop.size());
        for (Index j = 0; j < n; ++j) {
          const Index v0 = loop[j];
          const Index v1 = loop[(j + 1) % n];
          const auto k = key(v0, v1);

          const auto attrs_it = edge_attrs_.find(k);
          if (attrs_it == edge_attrs_.end()) throw std::logic_error("builder: edge without attributes");
          Index edge;
          if (const auto it = edge_index.find(k); it != edge_index.end()) {
            edge = it->second;
          } else {
            edge = static_cast<Index>(record.edges.size());
            edge_index[k] = edge;
            record.edges.push_back(attrs_it->second);
          }

          const Index coedge = record.topology.num_coedges();
          record.topology.coedge_next.push_back(j + 1 < n ? coedge + 1 : first);
          record.topology.coedge_mate.push_back(-1);
          record.topology.coedge_edge.push_back(edge);
          record.topology.coedge_face.push_back(static_cast<Index>(f));
          record.coedges.push_back({v0 < v1});

          if (const auto it = open_coedge.find(k); it != open_coedge.end()) {
            const Index partner = it->second;
            if (record.coedges[partner].forward == record.coedges[coedge].forward) {
              throw std::logic_error("builder: edge traversed twice in the same direction");
            }
            record.topology.coedge_mate[partner] = coedge;
            record.topology.coedge_mate[coedge] = partner;
            open_coedge.erase(it);
          } else {
            open_coedge[k] = coedge;
          }
        }
      }
    }
    if (!open_coedge.empty()) throw std::logic_error("builder: unmatched edge traversal");

    record.topology.num_faces = static_cast<Index>(record.faces.size());
    record.topology.num_edges = static_cast<Index>(record.edges.size());
    out.num_vertices = num_vertices_;
    // V - E + F - H = 2 - 2g with H the number of inner loops.
    const Index holes = num_loops - record.topology.num_faces;
    out.genus = (2 - (num_vertices_ - record.topology.num_edges + record.topology.num_faces - holes)) / 2;
    return out;
  }

 private:
  static std::pair<Index, Index> key(Index v0, Index v1) { return {std::min(v0, v1), std::max(v0, v1)}; }

  Index num_vertices_ = 0;
  std::vector<FaceAttributes> faces_;
  std::vector<int> labels_;
  std::vector<std::vector<std::vector<Index>>> loops_of_face_;
  std::map<std::pair<Index, Index>, EdgeAttributes> edge_attrs_;
};

EdgeAttributes line_edge(double length, EdgeConvexity convexity) {
  return {CurveType::kLine, convexity, false, length};
}

EdgeAttributes arc_edge(double length, EdgeConvexity convexity) {
  return {CurveType::kCircle, convexity, false, length};
}

FaceAttributes plane_face(double area) { return {SurfaceType::kPlane, area}; }

constexpr auto kSide = SegmentLabel::kExtrudeSide;
constexpr auto kEnd = SegmentLabel::kExtrudeEnd;

/// Extrusion-friendly dimension ranges: sketch lengths stay below the
/// extrude depth so side and end faces are not geometrically ambiguous.
struct BoxDims {
  double a, b, c;
};

BoxDims draw_box_dims(Rng& rng) {
  return {rng.uniform(0.8, 2.2), rng.uniform(0.8, 2.2), rng.uniform(2.6, 4.0)};
}

GeneratedSolid make_box(Rng& rng, bool labeled, std::uint64_t seed) {
  const BoxDims d = draw_box_dims(rng);
  SolidBuilder builder;
  builder.add_vertices(8);  // 0..3 bottom ring, 4..7 top ring

  const Index bottom = builder.add_face(plane_face(d.a * d.b), kEnd);
  const Index top = builder.add_face(plane_face(d.a * d.b), kEnd);
  const Index south = builder.add_face(plane_face(d.a * d.c), kSide);
  const Index east = builder.add_face(plane_face(d.b * d.c), kSide);
  const Index north = builder.add_face(plane_face(d.a * d.c), kSide);
  const Index west = builder.add_face(plane_face(d.b * d.c), kSide);

  builder.add_loop(bottom, {0, 3, 2, 1});
  builder.add_loop(top, {4, 5, 6, 7});
  builder.add_loop(south, {0, 1, 5, 4});
  builder.add_loop(east, {1, 2, 6, 5});
  builder.add_loop(north, {2, 3, 7, 6});
  builder.add_loop(west, {3, 0, 4, 7});

  const double ring[4] = {d.a, d.b, d.a, d.b};
  for (Index i = 0; i < 4; ++i) {
    builder.set_edge(i, (i + 1) % 4, line_edge(ring[i], EdgeConvexity::kConvex));
    builder.set_edge(4 + i, 4 + (i + 1) % 4, line_edge(ring[i], EdgeConvexity::kConvex));
    builder.set_edge(i, 4 + i, line_edge(d.c, EdgeConvexity::kConvex));
  }
  return builder.build("box_" + std::to_string(seed), labeled);
}

GeneratedSolid make_prism(Rng& rng, int sides, bool labeled, std::uint64_t seed) {
  const Index n = sides;
  const double radius = rng.uniform(0.8, 2.2);
  const double height = rng.uniform(2.6, 4.0);
  const double side_len = 2.0 * radius * std::sin(std::numbers::pi / n);
  const double cap_area = 0.5 * n * radius * radius * std::sin(2.0 * std::numbers::pi / n);

  SolidBuilder builder;
  builder.add_vertices(2 * n);  // 0..n-1 bottom ring, n..2n-1 top ring

  const Index bottom = builder.add_face(plane_face(cap_area), kEnd);
  const Index top = builder.add_face(plane_face(cap_area), kEnd);
  std::vector<Index> bottom_loop(n);
  for (Index i = 0; i < n; ++i) bottom_loop[i] = n - 1 - i;
  builder.add_loop(bottom, bottom_loop);
  std::vector<Index> top_loop(n);
  for (Index i = 0; i < n; ++i) top_loop[i] = n + i;
  builder.add_loop(top, top_loop);

  for (Index i = 0; i < n; ++i) {
    const Index side = builder.add_face(plane_face(side_len * height), kSide);
    builder.add_loop(side, {i, (i + 1) % n, n + (i + 1) % n, n + i});
    builder.set_edge(i, (i + 1) % n, line_edge(side_len, EdgeConvexity::kConvex));
    builder.set_edge(n + i, n + (i + 1) % n, line_edge(side_len, EdgeConvexity::kConvex));
    builder.set_edge(i, n + i, line_edge(height, EdgeConvexity::kConvex));
  }
  return builder.build("prism" + std::to_string(n) + "_" + std::to_string(seed), labeled);
}

GeneratedSolid make_box_with_hole(Rng& rng, bool labeled, std::uint64_t seed) {
  const BoxDims d = draw_box_dims(rng);
  const double w = d.a * rng.uniform(0.25, 0.45);
  const double h = d.b * rng.uniform(0.25, 0.45);

  SolidBuilder builder;
  builder.add_vertices(16);  // 0..3 bottom, 4..7 top, 8..11 hole bottom, 12..15 hole top

  const double top_area = d.a * d.b - w * h;
  const Index bottom = builder.add_face(plane_face(top_area), kEnd);
  const Index top = builder.add_face(plane_face(top_area), kEnd);
  const Index south = builder.add_face(plane_face(d.a * d.c), kSide);
  const Index east = builder.add_face(plane_face(d.b * d.c), kSide);
  const Index north = builder.add_face(plane_face(d.a * d.c), kSide);
  const Index west = builder.add_face(plane_face(d.b * d.c), kSide);

  // Outer shell. The pierced faces list their outer loop first.
  builder.add_loop(bottom, {0, 3, 2, 1});
  builder.add_loop(top, {4, 5, 6, 7});
  builder.add_loop(south, {0, 1, 5, 4});
  builder.add_loop(east, {1, 2, 6, 5});
  builder.add_loop(north, {2, 3, 7, 6});
  builder.add_loop(west, {3, 0, 4, 7});
  builder.add_loop(bottom, {8, 9, 10, 11});
  builder.add_loop(top, {15, 14, 13, 12});

  const double ring[4] = {d.a, d.b, d.a, d.b};
  for (Index i = 0; i < 4; ++i) {
    builder.set_edge(i, (i + 1) % 4, line_edge(ring[i], EdgeConvexity::kConvex));
    builder.set_edge(4 + i, 4 + (i + 1) % 4, line_edge(ring[i], EdgeConvexity::kConvex));
    builder.set_edge(i, 4 + i, line_edge(d.c, EdgeConvexity::kConvex));
  }

  // Hole walls; every rim and wall-corner edge is concave.
  const double rim[4] = {w, h, w, h};
  const double wall_area[4] = {w * d.c, h * d.c, w * d.c, h * d.c};
  for (Index i = 0; i < 4; ++i) {
    const Index j = (i + 1) % 4;
    const Index wall = builder.add_face(plane_face(wall_area[i]), SegmentLabel::kCutSide);
    builder.add_loop(wall, {8 + j, 8 + i, 12 + i, 12 + j});
    builder.set_edge(8 + i, 8 + j, line_edge(rim[i], EdgeConvexity::kConcave));
    builder.set_edge(12 + i, 12 + j, line_edge(rim[i], EdgeConvexity::kConcave));
    builder.set_edge(8 + i, 12 + i, line_edge(d.c, EdgeConvexity::kConcave));
  }
  return builder.build("boxhole_" + std::to_string(seed), labeled);
}

GeneratedSolid make_filleted_box(Rng& rng, bool labeled, std::uint64_t seed) {
  const BoxDims d = draw_box_dims(rng);
  const double r = rng.uniform(0.12, 0.35);
  const double arc_len = 0.5 * std::numbers::pi * r;

  // The edge between the top and north faces is filleted. Vertex layout:
  // 0..3 bottom ring, 4/5 top-south, 6/7 top side of the fillet strip,
  // 8/9 north side of the fillet strip.
  SolidBuilder builder;
  builder.add_vertices(10);

  const Index bottom = builder.add_face(plane_face(d.a * d.b), kEnd);
  const Index top = builder.add_face(plane_face(d.a * (d.b - r)), kEnd);
  const Index south = builder.add_face(plane_face(d.a * d.c), kSide);
  const Index north = builder.add_face(plane_face(d.a * (d.c - r)), kSide);
  const double end_area = d.b * d.c - r * r + 0.25 * std::numbers::pi * r * r;
  const Index east = builder.add_face(plane_face(end_area), kSide);
  const Index west = builder.add_face(plane_face(end_area), kSide);
  const Index fillet = builder.add_face({SurfaceType::kCylinder, arc_len * d.a}, SegmentLabel::kFillet);

  builder.add_loop(bottom, {0, 3, 2, 1});
  builder.add_loop(top, {4, 5, 6, 7});
  builder.add_loop(south, {0, 1, 5, 4});
  builder.add_loop(north, {2, 3, 9, 8});
  builder.add_loop(east, {1, 2, 8, 6, 5});
  builder.add_loop(west, {3, 0, 4, 7, 9});
  builder.add_loop(fillet, {7, 6, 8, 9});

  const auto convex = EdgeConvexity::kConvex;
  builder.set_edge(0, 1, line_edge(d.a, convex));
  builder.set_edge(1, 2, line_edge(d.b, convex));
  builder.set_edge(2, 3, line_edge(d.a, convex));
  builder.set_edge(0, 3, line_edge(d.b, convex));
  builder.set_edge(0, 4, line_edge(d.c, convex));
  builder.set_edge(1, 5, line_edge(d.c, convex));
  builder.set_edge(4, 5, line_edge(d.a, convex));
  builder.set_edge(5, 6, line_edge(d.b - r, convex));
  builder.set_edge(4, 7, line_edge(d.b - r, convex));
  builder.set_edge(2, 8, line_edge(d.c - r, convex));
  builder.set_edge(3, 9, line_edge(d.c - r, convex));
  // Tangential borders of the fillet strip are smooth; the end arcs stay
  // convex where the cylinder meets the planar end faces.
  builder.set_edge(6, 7, line_edge(d.a, EdgeConvexity::kSmooth));
  builder.set_edge(8, 9, line_edge(d.a, EdgeConvexity::kSmooth));
  builder.set_edge(6, 8, arc_edge(arc_len, convex));
  builder.set_edge(7, 9, arc_edge(arc_len, convex));

  return builder.build("filletbox_" + std::to_string(seed), labeled);
}

}  // namespace

SynthKind synth_kind_from_name(const std::string& name) {
  if (name == "box") return SynthKind::kBox;
  if (name == "n_prism") return SynthKind::kPrism;
  if (name == "box_with_hole") return SynthKind::kBoxWithHole;
  if (name == "filleted_box") return SynthKind::kFilletedBox;
  throw std::invalid_argument("unknown synthetic kind '" + name + "'");
}

std::string_view synth_kind_name(SynthKind kind) {
  switch (kind) {
    case SynthKind::kBox: return "box";
    case SynthKind::kPrism: return "n_prism";
    case SynthKind::kBoxWithHole: return "box_with_hole";
    case SynthKind::kFilletedBox: return "filleted_box";
  }
  throw std::invalid_argument("unknown synthetic kind");
}

GeneratedSolid generate_synthetic(SynthKind kind, const SynthParams& params, std::uint64_t seed) {
  Rng rng(seed);
  switch (kind) {
    case SynthKind::kBox:
      return make_box(rng, params.labeled, seed);
    case SynthKind::kPrism: {
      int sides = params.prism_sides;
      if (sides == 0) sides = rng.int_in(3, 8);
      if (sides < 3) throw std::invalid_argument("n_prism requires at least 3 sides");
      return make_prism(rng, sides, params.labeled, seed);
    }
    case SynthKind::kBoxWithHole:
      return make_box_with_hole(rng, params.labeled, seed);
    case SynthKind::kFilletedBox:
      return make_filleted_box(rng, params.labeled, seed);
  }
  throw std::invalid_argument("unknown synthetic kind");
}

}  // namespace brepnet
