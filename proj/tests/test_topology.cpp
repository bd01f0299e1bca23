#include <doctest.h>

#include <numeric>

#include "brepnet/data.hpp"
#include "brepnet/topology.hpp"
#include "test_support.hpp"

using namespace brepnet;
using namespace brepnet::testing;

TEST_CASE("cube topology validates clean") {
  const SolidTopology cube = make_cube_topology();
  CHECK(cube.num_faces == 6);
  CHECK(cube.num_edges == 12);
  CHECK(cube.num_coedges() == 24);
  const ValidationReport report = validate(cube);
  CHECK(report.ok());
}

TEST_CASE("mate fixed point is reported") {
  SolidTopology cube = make_cube_topology();
  cube.coedge_mate[3] = 3;
  const ValidationReport report = validate(cube);
  CHECK_FALSE(report.ok());
  CHECK(report.has(ValidationIssue::Kind::kMateFixedPoint));
}

TEST_CASE("edge owning three coedges breaks manifoldness") {
  SolidTopology cube = make_cube_topology();
  // Repoint one coedge's parent edge: some edge now owns 3 coedges and
  // another owns 1.
  const Index victim = 0;
  const Index other_edge = (cube.coedge_edge[victim] + 1) % cube.num_edges;
  cube.coedge_edge[victim] = other_edge;
  const ValidationReport report = validate(cube);
  CHECK_FALSE(report.ok());
  CHECK(report.has(ValidationIssue::Kind::kEdgeOwnershipCount));
}

TEST_CASE("out-of-range indices become report entries") {
  SolidTopology cube = make_cube_topology();
  cube.coedge_next[5] = 99;
  cube.coedge_face[7] = -2;
  const ValidationReport report = validate(cube);
  CHECK_FALSE(report.ok());
  CHECK(report.has(ValidationIssue::Kind::kIndexOutOfRange));
}

TEST_CASE("validation is total, collecting every violation") {
  SolidTopology cube = make_cube_topology();
  cube.coedge_mate[3] = 3;
  cube.coedge_next[5] = 99;
  const ValidationReport report = validate(cube);
  CHECK(report.has(ValidationIssue::Kind::kMateFixedPoint));
  CHECK(report.has(ValidationIssue::Kind::kIndexOutOfRange));
}

TEST_CASE("count mismatch |c| != 2|e| is reported") {
  SolidTopology cube = make_cube_topology();
  cube.num_edges = 13;
  const ValidationReport report = validate(cube);
  CHECK(report.has(ValidationIssue::Kind::kCoedgeEdgeCountMismatch));
}

TEST_CASE("prev_of inverts a plain 4-cycle") {
  SolidTopology ring;
  ring.coedge_next = {1, 2, 3, 0};
  CHECK(prev_of(ring, 0) == 3);
  CHECK(prev_of(ring, 1) == 0);
  CHECK(prev_of(ring, 2) == 1);
}

TEST_CASE("prev_of is the inverse of next on a prism") {
  const GeneratedSolid prism = generate_synthetic(SynthKind::kPrism, {.prism_sides = 5}, 11);
  const SolidTopology& topo = prism.record.topology;
  for (Index i = 0; i < topo.num_coedges(); ++i) {
    CHECK(prev_of(topo, next_of(topo, i)) == i);
    CHECK(next_of(topo, prev_of(topo, i)) == i);
  }
}

TEST_CASE("prev_of matches the pointer-walk oracle on the cube") {
  const SolidTopology cube = make_cube_topology();
  for (Index i = 0; i < cube.num_coedges(); ++i) {
    CHECK(prev_of(cube, i) == walk_oracle(cube, i, "P"));
  }
}

TEST_CASE("cube decomposes into 6 loops of length 4") {
  const LoopDecomposition loops = decompose_loops(make_cube_topology());
  REQUIRE(loops.num_loops() == 6);
  for (const auto& loop : loops.loops) CHECK(loop.size() == 4);
}

TEST_CASE("triangular prism loop histogram") {
  const GeneratedSolid prism = generate_synthetic(SynthKind::kPrism, {.prism_sides = 3}, 7);
  const LoopDecomposition loops = decompose_loops(prism.record.topology);
  int len3 = 0, len4 = 0;
  for (const auto& loop : loops.loops) {
    if (loop.size() == 3) ++len3;
    if (loop.size() == 4) ++len4;
  }
  CHECK(len3 == 2);
  CHECK(len4 == 3);
}

TEST_CASE("box with through hole: both pierced faces own two loops") {
  const GeneratedSolid solid = generate_synthetic(SynthKind::kBoxWithHole, {}, 3);
  CHECK(validate(solid.record.topology).ok());
  const LoopDecomposition loops = decompose_loops(solid.record.topology);
  const std::vector<Index> per_face = loops.loops_per_face(solid.record.topology.num_faces);
  int with_two = 0;
  for (Index count : per_face) {
    if (count == 2) ++with_two;
  }
  CHECK(with_two == 2);
}

TEST_CASE("decompose_loops rejects a non-permutation next") {
  SolidTopology bad = make_cube_topology();
  bad.coedge_next[0] = bad.coedge_next[1];
  CHECK_THROWS_AS(decompose_loops(bad), std::invalid_argument);
}

TEST_CASE("loop face mismatch is reported") {
  SolidTopology cube = make_cube_topology();
  cube.coedge_face[1] = (cube.coedge_face[1] + 1) % cube.num_faces;
  const ValidationReport report = validate(cube);
  CHECK(report.has(ValidationIssue::Kind::kLoopFaceMismatch));
}

TEST_CASE("random solids: permutation identities and loop flattening") {
  Rng rng(2024);
  for (int trial = 0; trial < 50; ++trial) {
    const GeneratedSolid solid = random_solid(rng);
    const SolidTopology& topo = solid.record.topology;
    REQUIRE(validate(topo).ok());

    for (Index i = 0; i < topo.num_coedges(); ++i) {
      CHECK(mate_of(topo, mate_of(topo, i)) == i);
      CHECK(prev_of(topo, next_of(topo, i)) == i);
    }

    const LoopDecomposition loops = decompose_loops(topo);
    std::vector<Index> flattened;
    for (const auto& loop : loops.loops) flattened.insert(flattened.end(), loop.begin(), loop.end());
    std::sort(flattened.begin(), flattened.end());
    std::vector<Index> expected(static_cast<std::size_t>(topo.num_coedges()));
    std::iota(expected.begin(), expected.end(), Index{0});
    CHECK(flattened == expected);
  }
}

TEST_CASE("Euler characteristic on sphere-genus solids") {
  Rng rng(99);
  const SynthKind sphere_kinds[] = {SynthKind::kBox, SynthKind::kPrism, SynthKind::kFilletedBox};
  for (int trial = 0; trial < 30; ++trial) {
    const SynthKind kind = sphere_kinds[rng.below(3)];
    const GeneratedSolid solid = generate_synthetic(kind, {}, rng.next());
    const Index v = solid.num_vertices;
    const Index e = solid.record.topology.num_edges;
    const Index f = solid.record.topology.num_faces;
    CHECK(solid.genus == 0);
    CHECK(v - e + f == 2);
  }
}
