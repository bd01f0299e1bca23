#include <doctest.h>

#include <numeric>

#include "brepnet/walks.hpp"
#include "test_support.hpp"

using namespace brepnet;
using namespace brepnet::testing;

TEST_CASE("operators mirror the pointer arrays") {
  const SolidTopology cube = make_cube_topology();
  const Operators ops = build_operators(cube);
  CHECK(ops.next.dest == cube.coedge_next);
  CHECK(ops.mate.dest == cube.coedge_mate);
  CHECK(ops.face.dest == cube.coedge_face);
  CHECK(ops.edge.dest == cube.coedge_edge);
  CHECK(ops.face.num_targets == 6);
  CHECK(ops.edge.num_targets == 12);

  SUBCASE("mate is an involution on all 24 coedges") {
    for (Index i = 0; i < 24; ++i) CHECK(ops.mate.dest[ops.mate.dest[i]] == i);
  }

  SUBCASE("F maps each loop's coedges to one face") {
    const LoopDecomposition loops = decompose_loops(cube);
    for (std::size_t l = 0; l < loops.num_loops(); ++l) {
      for (Index i : loops.loops[l]) CHECK(ops.face.dest[i] == loops.loop_face[l]);
    }
  }
}

TEST_CASE("P equals the brute-force inverse of N on a prism") {
  const GeneratedSolid prism = generate_synthetic(SynthKind::kPrism, {.prism_sides = 7}, 5);
  const Operators ops = build_operators(prism.record.topology);
  std::vector<Index> inverse(ops.next.dest.size());
  for (std::size_t i = 0; i < ops.next.dest.size(); ++i) inverse[ops.next.dest[i]] = static_cast<Index>(i);
  CHECK(ops.prev.dest == inverse);
}

TEST_CASE("build_operators rejects invalid topology") {
  SolidTopology bad = make_cube_topology();
  bad.coedge_mate[0] = 0;
  CHECK_THROWS_AS(build_operators(bad), std::invalid_argument);
}

TEST_CASE("walk parsing") {
  CHECK(parse_walk("MNE") == std::vector<WalkStep>{WalkStep::kMate, WalkStep::kNext, WalkStep::kEdge});
  CHECK(parse_walk("I").empty());
  CHECK_THROWS_AS(parse_walk("EF"), WalkParseError);
  CHECK_THROWS_AS(parse_walk(""), WalkParseError);
  CHECK_THROWS_AS(parse_walk("NXE"), WalkParseError);
  CHECK_THROWS_AS(parse_walk("FE"), WalkParseError);
  CHECK_THROWS_AS(parse_walk("NEF"), WalkParseError);

  SUBCASE("errors carry the column position") {
    try {
      parse_walk("NXE");
      FAIL("expected WalkParseError");
    } catch (const WalkParseError& e) {
      CHECK(e.column() == 2);
    }
  }
}

TEST_CASE("compile_walk basics on the cube") {
  const SolidTopology cube = make_cube_topology();
  const Operators ops = build_operators(cube);

  SUBCASE("identity walk") {
    const WalkMatrix identity = compile_walk(ops, "I");
    for (Index i = 0; i < 24; ++i) CHECK(identity.dest[i] == i);
  }

  SUBCASE("MN is next-after-mate, per the pointer oracle") {
    const WalkMatrix mn = compile_walk(ops, "MN");
    for (Index i = 0; i < 24; ++i) CHECK(mn.dest[i] == cube.coedge_next[cube.coedge_mate[i]]);
  }

  SUBCASE("terminal F is the parent-face array") {
    const WalkMatrix f = compile_walk(ops, "F");
    CHECK(f.kind == WalkMatrix::Kind::kCoedgeToFace);
    CHECK(f.dest == cube.coedge_face);
  }
}

TEST_CASE("kernel presets match the published walk lists") {
  const KernelSpec winged = kernel_preset("winged_edge");
  CHECK(winged.face_walks == std::vector<std::string>{"F", "MF"});
  CHECK(winged.edge_walks == std::vector<std::string>{"E", "NE", "PE", "MNE", "MPE"});
  CHECK(winged.coedge_walks == std::vector<std::string>{"I", "M", "N", "P", "MN", "MP"});

  const KernelSpec simple = kernel_preset("simple_edge");
  CHECK(simple.face_walks == std::vector<std::string>{"F", "MF"});
  CHECK(simple.edge_walks == std::vector<std::string>{"E"});
  CHECK(simple.coedge_walks == std::vector<std::string>{"I", "M"});

  // Same entity counts as simple_edge, next instead of mate.
  const KernelSpec asym = kernel_preset("asymmetric");
  CHECK(asym.coedge_walks == std::vector<std::string>{"I", "N"});
  CHECK(asym.num_walks() == simple.num_walks());

  CHECK_THROWS_AS(kernel_preset("banana"), std::invalid_argument);

  SUBCASE("every preset compiles on the cube") {
    const Operators ops = build_operators(make_cube_topology());
    for (const auto name : kKernelPresetNames) {
      const CompiledKernel k = compile_kernel(ops, kernel_preset(std::string(name)));
      CHECK(k.face_walks.size() == 2);
      CHECK_FALSE(k.edge_walks.empty());
      CHECK_FALSE(k.coedge_walks.empty());
    }
  }
}

TEST_CASE("kernel validation rejects malformed walk lists") {
  KernelSpec spec;
  spec.name = "bad";
  spec.face_walks = {"F"};
  spec.edge_walks = {"E"};
  spec.coedge_walks = {};
  CHECK_THROWS_AS(validate_kernel(spec), std::invalid_argument);

  spec.coedge_walks = {"I"};
  spec.face_walks = {"E"};  // wrong terminal
  CHECK_THROWS_AS(validate_kernel(spec), std::invalid_argument);

  spec.face_walks = {"F"};
  spec.coedge_walks = {"MF"};  // coedge list must stay on coedges
  CHECK_THROWS_AS(validate_kernel(spec), std::invalid_argument);
}

TEST_CASE("gather semantics") {
  const SolidTopology cube = make_cube_topology();
  const Operators ops = build_operators(cube);

  SUBCASE("identity gather copies the input") {
    Tensor2 h(24, 2);
    for (Index i = 0; i < 24; ++i) {
      h(i, 0) = i;
      h(i, 1) = -i;
    }
    CHECK(gather(compile_walk(ops, "I"), h) == h);
  }

  SUBCASE("F gather copies parent-face features per coedge") {
    Tensor2 face_features(6, 1);
    for (Index f = 0; f < 6; ++f) face_features(f, 0) = f;
    const Tensor2 gathered = gather(ops.face, face_features);
    REQUIRE(gathered.rows() == 24);
    for (Index i = 0; i < 24; ++i) CHECK(gathered(i, 0) == cube.coedge_face[i]);
  }

  SUBCASE("MNE gather equals sequential M, N, E gathers") {
    Tensor2 edge_features(12, 3);
    Rng rng(1);
    for (std::size_t i = 0; i < edge_features.size(); ++i) edge_features.data()[i] = rng.uniform();

    const Tensor2 direct = gather(compile_walk(ops, "MNE"), edge_features);
    // Step-by-step: gather E onto coedges, then permute by N, then by M.
    const Tensor2 after_e = gather(ops.edge, edge_features);
    const Tensor2 after_n = gather(ops.next, after_e);
    const Tensor2 after_m = gather(ops.mate, after_n);
    CHECK(direct == after_m);
  }

  SUBCASE("dimension mismatch throws") {
    Tensor2 wrong(5, 1);
    CHECK_THROWS_AS(gather(ops.face, wrong), std::invalid_argument);
  }
}

TEST_CASE("compile_walk agrees with the pointer oracle on random walks") {
  Rng rng(42);
  for (int trial = 0; trial < 20; ++trial) {
    const GeneratedSolid solid = random_solid(rng);
    const SolidTopology& topo = solid.record.topology;
    const Operators ops = build_operators(topo);
    for (int w = 0; w < 50; ++w) {
      const std::string walk = random_walk_string(rng);
      const WalkMatrix compiled = compile_walk(ops, walk);
      for (Index i = 0; i < topo.num_coedges(); ++i) {
        REQUIRE(compiled.dest[i] == walk_oracle(topo, i, walk));
      }
    }
  }
}

TEST_CASE("NP, PN and MM compile to the identity") {
  Rng rng(7);
  for (int trial = 0; trial < 10; ++trial) {
    const GeneratedSolid solid = random_solid(rng);
    const Operators ops = build_operators(solid.record.topology);
    for (const char* walk : {"NP", "PN", "MM"}) {
      const WalkMatrix compiled = compile_walk(ops, walk);
      for (Index i = 0; i < compiled.num_coedges(); ++i) REQUIRE(compiled.dest[i] == i);
    }
  }
}

TEST_CASE("gather keeps repeated destinations; Psi carries repeats") {
  // At the cube's valence-3 corners NMN and MPM land on the same coedge.
  const SolidTopology cube = make_cube_topology();
  const Operators ops = build_operators(cube);
  const WalkMatrix nmn = compile_walk(ops, "NMN");
  const WalkMatrix mpm = compile_walk(ops, "MPM");
  CHECK(nmn.dest == mpm.dest);

  Tensor2 h(24, 1);
  for (Index i = 0; i < 24; ++i) h(i, 0) = i;
  CHECK(gather(nmn, h) == gather(mpm, h));
}

TEST_CASE("gather/scatter adjointness is exact in index arithmetic") {
  // Integer-valued tensors keep both inner products exactly representable.
  Rng rng(5);
  const GeneratedSolid solid = random_solid(rng);
  const Operators ops = build_operators(solid.record.topology);
  const SolidTopology& topo = solid.record.topology;

  for (const WalkMatrix* walk : {&ops.face, &ops.edge, &ops.mate}) {
    Tensor2 h(walk->num_targets, 3);
    for (std::size_t i = 0; i < h.size(); ++i) h.data()[i] = static_cast<double>(rng.int_in(-8, 8));
    Tensor2 g(topo.num_coedges(), 3);
    for (std::size_t i = 0; i < g.size(); ++i) g.data()[i] = static_cast<double>(rng.int_in(-8, 8));

    const Tensor2 gathered = gather(*walk, h);
    const Tensor2 scattered = scatter_add(*walk, g);

    double lhs = 0.0, rhs = 0.0;
    for (std::size_t i = 0; i < gathered.size(); ++i) lhs += gathered.data()[i] * g.data()[i];
    for (std::size_t i = 0; i < scattered.size(); ++i) rhs += scattered.data()[i] * h.data()[i];
    CHECK(lhs == rhs);
  }
}

TEST_CASE("gather respects walk composition") {
  Rng rng(17);
  const GeneratedSolid solid = random_solid(rng);
  const Operators ops = build_operators(solid.record.topology);

  Tensor2 h(solid.record.topology.num_coedges(), 2);
  for (std::size_t i = 0; i < h.size(); ++i) h.data()[i] = rng.uniform();

  const std::string prefix = "MN";
  const std::string suffix = "PM";
  const Tensor2 composed = gather(compile_walk(ops, prefix + suffix), h);
  const Tensor2 staged = gather(compile_walk(ops, prefix), gather(compile_walk(ops, suffix), h));
  CHECK(composed == staged);
}
