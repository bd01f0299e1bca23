#pragma once

#include <string>
#include <vector>

#include "brepnet/types.hpp"

namespace brepnet {

/// Closed manifold B-rep topology reduced to the pointer structure the
/// coedges store. Immutable after construction; the network never needs
/// vertices, so they are not modeled here.
struct SolidTopology {
  std::vector<Index> coedge_next;  // next coedge in the loop (permutation)
  std::vector<Index> coedge_mate;  // adjacent coedge (fixed-point-free involution)
  std::vector<Index> coedge_edge;  // parent edge per coedge
  std::vector<Index> coedge_face;  // parent face per coedge
  Index num_faces = 0;
  Index num_edges = 0;

  Index num_coedges() const { return static_cast<Index>(coedge_next.size()); }
};

struct ValidationIssue {
  enum class Kind {
    kArrayLengthMismatch,
    kIndexOutOfRange,
    kNextNotPermutation,
    kMateFixedPoint,
    kMateNotInvolution,
    kEdgeOwnershipCount,
    kFaceWithoutCoedge,
    kLoopFaceMismatch,
    kCoedgeEdgeCountMismatch,  // |c| != 2|e|
  };
  Kind kind;
  std::string message;
};

struct ValidationReport {
  std::vector<ValidationIssue> issues;
  bool ok() const { return issues.empty(); }
  bool has(ValidationIssue::Kind kind) const;
};

/// Checks every structural invariant and collects all violations instead of
/// failing fast, so datasets can be triaged. Out-of-range indices become
/// report entries, never crashes.
ValidationReport validate(const SolidTopology& topo);

/// Previous coedge in the loop. prev is the inverse of the stored next
/// permutation; only next is stored.
Index prev_of(const SolidTopology& topo, Index coedge);

Index next_of(const SolidTopology& topo, Index coedge);
Index mate_of(const SolidTopology& topo, Index coedge);

struct LoopDecomposition {
  std::vector<std::vector<Index>> loops;  // cyclic coedge sequences
  std::vector<Index> loop_face;           // owning face per loop

  std::size_t num_loops() const { return loops.size(); }
  /// Loop count per face, indexed by face.
  std::vector<Index> loops_per_face(Index num_faces) const;
};

/// Partitions the coedges into the cycles of coedge_next. Throws
/// std::invalid_argument when next is not a permutation.
LoopDecomposition decompose_loops(const SolidTopology& topo);

}  // namespace brepnet
