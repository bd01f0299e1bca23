#include "brepnet/topology.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

namespace brepnet {
namespace {

std::string at(Index i) { return " at coedge " + std::to_string(i); }

bool in_range(Index value, Index count) { return value >= 0 && value < count; }

}  // namespace

bool ValidationReport::has(ValidationIssue::Kind kind) const {
  return std::any_of(issues.begin(), issues.end(), [kind](const ValidationIssue& v) { return v.kind == kind; });
}

ValidationReport validate(const SolidTopology& topo) {
  ValidationReport report;
  auto add = [&report](ValidationIssue::Kind kind, std::string message) {
    report.issues.push_back({kind, std::move(message)});
  };

  const Index nc = topo.num_coedges();
  const std::size_t n = static_cast<std::size_t>(nc);
  if (topo.coedge_mate.size() != n || topo.coedge_edge.size() != n || topo.coedge_face.size() != n) {
    add(ValidationIssue::Kind::kArrayLengthMismatch, "coedge arrays have differing lengths");
    return report;  // nothing else is meaningful
  }

  if (nc != 2 * topo.num_edges) {
    add(ValidationIssue::Kind::kCoedgeEdgeCountMismatch,
        "expected |c| = 2|e|, got |c|=" + std::to_string(nc) + " |e|=" + std::to_string(topo.num_edges));
  }

  // Range checks first; later checks skip entries already known bad.
  std::vector<bool> next_ok(n, true), mate_ok(n, true), edge_ok(n, true), face_ok(n, true);
  for (Index i = 0; i < nc; ++i) {
    if (!in_range(topo.coedge_next[i], nc)) {
      next_ok[i] = false;
      add(ValidationIssue::Kind::kIndexOutOfRange, "next index " + std::to_string(topo.coedge_next[i]) + at(i));
    }
    if (!in_range(topo.coedge_mate[i], nc)) {
      mate_ok[i] = false;
      add(ValidationIssue::Kind::kIndexOutOfRange, "mate index " + std::to_string(topo.coedge_mate[i]) + at(i));
    }
    if (!in_range(topo.coedge_edge[i], topo.num_edges)) {
      edge_ok[i] = false;
      add(ValidationIssue::Kind::kIndexOutOfRange, "edge index " + std::to_string(topo.coedge_edge[i]) + at(i));
    }
    if (!in_range(topo.coedge_face[i], topo.num_faces)) {
      face_ok[i] = false;
      add(ValidationIssue::Kind::kIndexOutOfRange, "face index " + std::to_string(topo.coedge_face[i]) + at(i));
    }
  }

  // next must be a bijection.
  {
    std::vector<Index> hits(n, 0);
    for (Index i = 0; i < nc; ++i) {
      if (next_ok[i]) ++hits[topo.coedge_next[i]];
    }
    for (Index j = 0; j < nc; ++j) {
      if (hits[j] != 1) {
        add(ValidationIssue::Kind::kNextNotPermutation,
            "coedge " + std::to_string(j) + " is the next of " + std::to_string(hits[j]) + " coedges");
      }
    }
  }

  // mate must be a fixed-point-free involution.
  for (Index i = 0; i < nc; ++i) {
    if (!mate_ok[i]) continue;
    const Index m = topo.coedge_mate[i];
    if (m == i) {
      add(ValidationIssue::Kind::kMateFixedPoint, "mate(" + std::to_string(i) + ") = " + std::to_string(i));
    } else if (mate_ok[m] && topo.coedge_mate[m] != i) {
      add(ValidationIssue::Kind::kMateNotInvolution,
          "mate(mate(" + std::to_string(i) + ")) = " + std::to_string(topo.coedge_mate[m]));
    }
  }

  // Each edge owns exactly 2 coedges; each face owns at least 1.
  {
    std::vector<Index> per_edge(static_cast<std::size_t>(std::max<Index>(topo.num_edges, 0)), 0);
    std::vector<Index> per_face(static_cast<std::size_t>(std::max<Index>(topo.num_faces, 0)), 0);
    for (Index i = 0; i < nc; ++i) {
      if (edge_ok[i]) ++per_edge[topo.coedge_edge[i]];
      if (face_ok[i]) ++per_face[topo.coedge_face[i]];
    }
    for (Index e = 0; e < topo.num_edges; ++e) {
      if (per_edge[e] != 2) {
        add(ValidationIssue::Kind::kEdgeOwnershipCount,
            "edge " + std::to_string(e) + " owns " + std::to_string(per_edge[e]) + " coedges");
      }
    }
    for (Index f = 0; f < topo.num_faces; ++f) {
      if (per_face[f] == 0) {
        add(ValidationIssue::Kind::kFaceWithoutCoedge, "face " + std::to_string(f) + " owns no coedge");
      }
    }
  }

  // All coedges of a loop share one face. Walk cycles only when next is a
  // clean permutation, otherwise cycles may not terminate.
  const bool next_is_permutation =
      !report.has(ValidationIssue::Kind::kNextNotPermutation) && std::all_of(next_ok.begin(), next_ok.end(), [](bool b) { return b; });
  if (next_is_permutation) {
    std::vector<bool> seen(n, false);
    for (Index start = 0; start < nc; ++start) {
      if (seen[start]) continue;
      const Index face = face_ok[start] ? topo.coedge_face[start] : -1;
      Index i = start;
      do {
        seen[i] = true;
        if (face_ok[i] && topo.coedge_face[i] != face) {
          add(ValidationIssue::Kind::kLoopFaceMismatch,
              "loop through coedge " + std::to_string(start) + " spans faces " + std::to_string(face) + " and " +
                  std::to_string(topo.coedge_face[i]));
          break;
        }
        i = topo.coedge_next[i];
      } while (i != start);
    }
  }

  return report;
}

Index next_of(const SolidTopology& topo, Index coedge) { return topo.coedge_next[coedge]; }

Index mate_of(const SolidTopology& topo, Index coedge) { return topo.coedge_mate[coedge]; }

Index prev_of(const SolidTopology& topo, Index coedge) {
  // next restricted to the loop is a cycle, so the predecessor is found by
  // walking the loop once.
  Index i = coedge;
  while (topo.coedge_next[i] != coedge) {
    i = topo.coedge_next[i];
  }
  return i;
}

std::vector<Index> LoopDecomposition::loops_per_face(Index num_faces) const {
  std::vector<Index> counts(static_cast<std::size_t>(num_faces), 0);
  for (Index f : loop_face) ++counts[f];
  return counts;
}

LoopDecomposition decompose_loops(const SolidTopology& topo) {
  const Index nc = topo.num_coedges();
  {
    std::vector<bool> hit(static_cast<std::size_t>(nc), false);
    for (Index i = 0; i < nc; ++i) {
      const Index j = topo.coedge_next[i];
      if (j < 0 || j >= nc || hit[j]) throw std::invalid_argument("decompose_loops: next is not a permutation");
      hit[j] = true;
    }
  }

  LoopDecomposition out;
  std::vector<bool> seen(static_cast<std::size_t>(nc), false);
  for (Index start = 0; start < nc; ++start) {
    if (seen[start]) continue;
    std::vector<Index> loop;
    Index i = start;
    do {
      seen[i] = true;
      loop.push_back(i);
      i = topo.coedge_next[i];
    } while (i != start);
    out.loop_face.push_back(topo.coedge_face[start]);
    out.loops.push_back(std::move(loop));
  }
  return out;
}

}  // namespace brepnet
