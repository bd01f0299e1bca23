#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include "brepnet/model.hpp"
#include "brepnet/pipeline.hpp"
#include "test_support.hpp"

using namespace brepnet;
using namespace brepnet::testing;

namespace {

ArchitectureConfig small_config(const std::string& kernel = "winged_edge", Index s = 4) {
  ArchitectureConfig config;
  config.kernel = kernel;
  config.hidden_width = s;
  return config;
}

Batch single_batch(const SolidRecord& record) {
  return make_batch(std::span<const SolidRecord>(&record, 1), StandardizerSet::identity());
}

/// Relabels the coedges by perm (new index = perm[old index]) and remaps the
/// pointer arrays consistently.
SolidRecord permute_coedges(const SolidRecord& record, const std::vector<Index>& perm) {
  const SolidTopology& topo = record.topology;
  SolidRecord out = record;
  for (Index i = 0; i < topo.num_coedges(); ++i) {
    const Index j = perm[i];
    out.topology.coedge_next[j] = perm[topo.coedge_next[i]];
    out.topology.coedge_mate[j] = perm[topo.coedge_mate[i]];
    out.topology.coedge_edge[j] = topo.coedge_edge[i];
    out.topology.coedge_face[j] = topo.coedge_face[i];
    out.coedges[j] = record.coedges[i];
  }
  return out;
}

std::filesystem::path temp_file(const std::string& name) {
  return std::filesystem::temp_directory_path() / name;
}

}  // namespace

TEST_CASE("parameter counts reproduce the published table") {
  ArchitectureConfig config;
  config.num_hidden_units = 1;
  config.mlp_depth = 2;
  config.num_classes = 8;
  config.final_layer_bias = false;

  config.kernel = "winged_edge";
  config.hidden_width = 84;
  CHECK(parameter_count(config) == 359100);

  const struct {
    const char* kernel;
    Index s;
    std::size_t exact;
  } rows[] = {
      {"simple_edge", 120, 358920},          {"asymmetric", 120, 358920},
      {"asymmetric_plus", 113, 357645},      {"asymmetric_plus_plus", 107, 358878},
      {"winged_edge", 84, 359100},           {"winged_edge_plus", 75, 356625},
      {"winged_edge_plus_plus", 63, 357777},
  };
  for (const auto& row : rows) {
    config.kernel = row.kernel;
    config.hidden_width = row.s;
    CHECK(parameter_count(config) == row.exact);
  }
}

TEST_CASE("parameter_count matches the allocated tensors") {
  for (const auto kernel : {"simple_edge", "winged_edge", "winged_edge_plus_plus"}) {
    ArchitectureConfig config = small_config(kernel, 6);
    config.num_hidden_units = 2;
    const BRepNetModel model = init_model(config, 1);
    std::size_t allocated = 0;
    for (const auto& unit : model.units) allocated += unit.parameter_count();
    CHECK(allocated == parameter_count(config));
  }
}

TEST_CASE("unit layer widths follow the architecture") {
  ArchitectureConfig config = small_config("winged_edge", 84);
  CHECK(unit_layer_widths(config, 0) == std::vector<Index>{70, 252, 252});
  CHECK(unit_layer_widths(config, 1) == std::vector<Index>{1092, 252, 8});
}

TEST_CASE("config validation") {
  ArchitectureConfig config = small_config();
  CHECK_NOTHROW(validate_config(config));
  config.kernel = "nope";
  CHECK_THROWS_AS(validate_config(config), std::invalid_argument);
  config = small_config();
  config.hidden_width = 0;
  CHECK_THROWS_AS(validate_config(config), std::invalid_argument);
  config = small_config();
  config.num_classes = 1;
  CHECK_THROWS_AS(validate_config(config), std::invalid_argument);
}

TEST_CASE("logits shape and determinism on the cube") {
  const SolidRecord cube = make_cube_record();
  const Batch batch = single_batch(cube);
  const BRepNetModel model = init_model(small_config(), 42);

  const Tensor2 logits = classify_faces(model, batch);
  CHECK(logits.rows() == 6);
  CHECK(logits.cols() == 8);

  const Tensor2 again = classify_faces(model, batch);
  CHECK(logits == again);

  const BRepNetModel same_seed = init_model(small_config(), 42);
  CHECK(classify_faces(same_seed, batch) == logits);
}

TEST_CASE("batched two-cube logits equal concatenated per-cube logits") {
  const SolidRecord cube_a = make_cube_record("a");
  SolidRecord cube_b = make_cube_record("b");
  cube_b.faces[2].area = 3.5;  // make the solids distinguishable

  const BRepNetModel model = init_model(small_config(), 11);
  const std::vector<SolidRecord> both = {cube_a, cube_b};
  const Tensor2 batched = classify_faces(model, make_batch(both, StandardizerSet::identity()));
  const Tensor2 la = classify_faces(model, single_batch(cube_a));
  const Tensor2 lb = classify_faces(model, single_batch(cube_b));

  REQUIRE(batched.rows() == la.rows() + lb.rows());
  for (Index r = 0; r < la.rows(); ++r) {
    for (Index c = 0; c < 8; ++c) {
      CHECK(std::abs(batched(r, c) - la(r, c)) < 1e-10);
      CHECK(std::abs(batched(la.rows() + r, c) - lb(r, c)) < 1e-10);
    }
  }
}

TEST_CASE("conv unit pools each edge from its two coedge rows") {
  // One hidden unit with an identity-like construction is hard to arrange
  // through the full stack; instead verify via segment pooling on the real
  // forward: edge hidden states must equal the max of the two coedge rows of
  // Z^e. We recover Z^e by running the unit MLP manually.
  const SolidRecord cube = make_cube_record();
  const Batch batch = single_batch(cube);
  ArchitectureConfig config = small_config("simple_edge", 3);
  const BRepNetModel model = init_model(config, 5);

  const ForwardResult result = forward(model, batch, {.pooling = PoolingMode::kMax, .capture_hidden = true});
  REQUIRE(result.hidden.size() == 1);

  // Recompute Z for unit 0 by hand.
  const CompiledKernel kernel = compile_kernel(batch.operators, kernel_preset("simple_edge"));
  std::vector<Tensor2> parts;
  for (const auto& w : kernel.face_walks) parts.push_back(gather(w, batch.x_faces));
  for (const auto& w : kernel.edge_walks) parts.push_back(gather(w, batch.x_edges));
  for (const auto& w : kernel.coedge_walks) parts.push_back(gather(w, batch.x_coedges));
  const Tensor2 psi = hconcat(std::span<const Tensor2>(parts));
  const Tensor2 z = mlp_forward(model.units[0], psi);
  const Tensor2 z_e = slice_cols(z, 6, 9);

  for (Index e = 0; e < batch.topology.num_edges; ++e) {
    std::vector<Index> owners;
    for (Index i = 0; i < batch.topology.num_coedges(); ++i) {
      if (batch.topology.coedge_edge[i] == e) owners.push_back(i);
    }
    REQUIRE(owners.size() == 2);
    for (Index c = 0; c < 3; ++c) {
      CHECK(result.hidden[0].edges(e, c) == std::max(z_e(owners[0], c), z_e(owners[1], c)));
    }
  }
}

TEST_CASE("pooling is the only bridge between the loops of a pierced face") {
  const GeneratedSolid solid = generate_synthetic(SynthKind::kBoxWithHole, {}, 19);
  const SolidRecord& record = solid.record;

  ArchitectureConfig config = small_config("winged_edge", 8);
  config.num_hidden_units = 2;
  const BRepNetModel model = init_model(config, 123);

  // The pierced top face owns two loops; its outer loop was emitted first by
  // the generator, so it has the smaller coedge indices.
  const LoopDecomposition loops = decompose_loops(record.topology);
  Index pierced_face = -1;
  std::vector<const std::vector<Index>*> face_loops;
  for (Index f = 0; f < record.topology.num_faces; ++f) {
    face_loops.clear();
    for (std::size_t l = 0; l < loops.num_loops(); ++l) {
      if (loops.loop_face[l] == f) face_loops.push_back(&loops.loops[l]);
    }
    if (face_loops.size() == 2) {
      pierced_face = f;
      break;
    }
  }
  REQUIRE(pierced_face >= 0);
  const auto min_index = [](const std::vector<Index>& loop) { return *std::min_element(loop.begin(), loop.end()); };
  const std::vector<Index>& outer_loop =
      min_index(*face_loops[0]) < min_index(*face_loops[1]) ? *face_loops[0] : *face_loops[1];
  const std::vector<Index>& inner_loop =
      min_index(*face_loops[0]) < min_index(*face_loops[1]) ? *face_loops[1] : *face_loops[0];

  const Batch base = single_batch(record);
  Batch perturbed = base;
  perturbed.x_coedges(inner_loop.front(), 0) += 7.5;

  const ForwardOptions capture{.pooling = PoolingMode::kMax, .capture_hidden = true};
  const ForwardResult pooled_base = forward(model, base, capture);
  const ForwardResult pooled_perturbed = forward(model, perturbed, capture);

  double pooled_delta = 0.0;
  for (Index i : outer_loop) {
    for (Index c = 0; c < config.hidden_width; ++c) {
      pooled_delta = std::max(pooled_delta, std::abs(pooled_base.hidden[1].coedges(i, c) -
                                                     pooled_perturbed.hidden[1].coedges(i, c)));
    }
  }
  CHECK(pooled_delta > 0.0);

  const ForwardOptions ablated{.pooling = PoolingMode::kDisabled, .capture_hidden = true};
  const ForwardResult flat_base = forward(model, base, ablated);
  const ForwardResult flat_perturbed = forward(model, perturbed, ablated);
  for (Index i : outer_loop) {
    for (Index c = 0; c < config.hidden_width; ++c) {
      CHECK(flat_base.hidden[1].coedges(i, c) == flat_perturbed.hidden[1].coedges(i, c));
    }
  }
}

TEST_CASE("full-network gradients match finite differences on a small solid") {
  const GeneratedSolid prism = generate_synthetic(SynthKind::kPrism, {.prism_sides = 6}, 2);
  const Batch batch = single_batch(prism.record);
  const BRepNetModel model = init_model(small_config("winged_edge", 3), 9);
  const GradCheckReport report = gradient_check(model, batch);
  CHECK(report.passed);
  CHECK(report.max_rel_err < 1e-5);
}

TEST_CASE("a parameter behind a dead ReLU unit gets exactly zero gradient") {
  const GeneratedSolid prism = generate_synthetic(SynthKind::kPrism, {.prism_sides = 5}, 3);
  const Batch batch = single_batch(prism.record);
  BRepNetModel model = init_model(small_config("winged_edge", 4), 1);

  // Column 0 of the first layer always produces a negative pre-activation.
  Tensor2& w0 = model.units[0].weights[0];
  for (Index r = 0; r < w0.rows(); ++r) w0(r, 0) = 0.0;
  model.units[0].biases[0](0, 0) = -1.0;

  ModelGrads grads = ModelGrads::zeros_like(model);
  loss_and_gradients(model, batch, grads);
  for (Index r = 0; r < w0.rows(); ++r) CHECK(grads.units[0].dweights[0](r, 0) == 0.0);
  CHECK(grads.units[0].dbiases[0](0, 0) == 0.0);
}

TEST_CASE("gradients are linear in the loss scale") {
  const SolidRecord cube = make_cube_record();
  const Batch batch = single_batch(cube);
  const BRepNetModel model = init_model(small_config("simple_edge", 3), 4);

  ForwardCache cache;
  const Tensor2 logits = forward_with_cache(model, batch, cache);
  Tensor2 dlogits(logits.rows(), logits.cols());
  Rng rng(6);
  for (std::size_t i = 0; i < dlogits.size(); ++i) dlogits.data()[i] = rng.uniform(-1.0, 1.0);

  ModelGrads once = ModelGrads::zeros_like(model);
  backward_from_dlogits(model, batch, cache, dlogits, once);

  Tensor2 doubled = dlogits;
  scale_inplace(doubled, 2.0);
  ModelGrads twice = ModelGrads::zeros_like(model);
  backward_from_dlogits(model, batch, cache, doubled, twice);

  const auto flat_once = once.flat();
  const auto flat_twice = twice.flat();
  for (std::size_t b = 0; b < flat_once.size(); ++b) {
    for (std::size_t i = 0; i < flat_once[b]->size(); ++i) {
      CHECK(flat_twice[b]->data()[i] == doctest::Approx(2.0 * flat_once[b]->data()[i]).epsilon(1e-12));
    }
  }
}

TEST_CASE("consistent coedge relabeling leaves per-face logits unchanged") {
  const GeneratedSolid solid = generate_synthetic(SynthKind::kFilletedBox, {}, 8);
  const SolidRecord& record = solid.record;

  std::vector<Index> perm(static_cast<std::size_t>(record.topology.num_coedges()));
  for (std::size_t i = 0; i < perm.size(); ++i) perm[i] = static_cast<Index>(i);
  Rng rng(55);
  rng.shuffle(std::span<Index>(perm));
  const SolidRecord permuted = permute_coedges(record, perm);
  REQUIRE(validate(permuted.topology).ok());

  const BRepNetModel model = init_model(small_config("winged_edge", 5), 21);
  const Tensor2 original = classify_faces(model, single_batch(record));
  const Tensor2 relabeled = classify_faces(model, single_batch(permuted));
  CHECK(original == relabeled);
}

TEST_CASE("model save/load round trip is exact") {
  const GeneratedSolid solid = generate_synthetic(SynthKind::kBox, {}, 14);
  BRepNetModel model = init_model(small_config("asymmetric_plus", 5), 77);
  const std::vector<SolidRecord> one = {solid.record};
  model.standardizer = fit_standardizers(one);

  const auto path = temp_file("brepnet_roundtrip.model");
  save_model(path, model);
  const BRepNetModel loaded = load_model(path);

  CHECK(loaded.config.kernel == model.config.kernel);
  CHECK(loaded.init_seed == model.init_seed);
  for (std::size_t u = 0; u < model.units.size(); ++u) {
    for (std::size_t l = 0; l < model.units[u].num_layers(); ++l) {
      CHECK(loaded.units[u].weights[l] == model.units[u].weights[l]);
      CHECK(loaded.units[u].biases[l] == model.units[u].biases[l]);
    }
  }

  const Batch batch = make_batch(one, model.standardizer);
  CHECK(classify_faces(model, batch) == classify_faces(loaded, batch));
  std::filesystem::remove(path);
}

TEST_CASE("model io failure modes") {
  BRepNetModel model = init_model(small_config("simple_edge", 3), 1);
  const auto path = temp_file("brepnet_broken.model");
  save_model(path, model);

  auto read_bytes = [&] {
    std::ifstream in(path, std::ios::binary);
    return std::vector<char>((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  };
  auto write_bytes = [&](const std::vector<char>& bytes) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  };
  const std::vector<char> original = read_bytes();

  SUBCASE("truncated file reports a corrupt payload") {
    std::vector<char> truncated(original.begin(), original.end() - 40);
    write_bytes(truncated);
    try {
      load_model(path);
      FAIL("expected ModelIoError");
    } catch (const ModelIoError& e) {
      CHECK(e.kind() == ModelIoError::Kind::kCorrupt);
    }
  }

  SUBCASE("future version tag is refused before any payload is read") {
    std::vector<char> bytes = original;
    bytes[4] = 99;  // version field follows the 4-byte magic
    write_bytes(bytes);
    try {
      load_model(path);
      FAIL("expected ModelIoError");
    } catch (const ModelIoError& e) {
      CHECK(e.kind() == ModelIoError::Kind::kVersion);
    }
  }

  SUBCASE("bit flip in the payload fails the checksum") {
    std::vector<char> bytes = original;
    bytes[bytes.size() - 12] ^= 0x10;  // inside the last parameter tensor
    write_bytes(bytes);
    try {
      load_model(path);
      FAIL("expected ModelIoError");
    } catch (const ModelIoError& e) {
      CHECK(e.kind() == ModelIoError::Kind::kChecksum);
    }
  }

  std::filesystem::remove(path);
}

TEST_CASE("single precision forward stays close to double") {
  const GeneratedSolid solid = generate_synthetic(SynthKind::kBoxWithHole, {}, 4);
  const Batch batch = single_batch(solid.record);
  const BRepNetModel model = init_model(small_config("winged_edge", 8), 2);

  const Tensor2 d = classify_faces(model, batch);
  const Tensor2f f = classify_faces_single_precision(model, batch);
  REQUIRE(d.rows() == f.rows());
  for (std::size_t i = 0; i < d.size(); ++i) {
    CHECK(std::abs(d.data()[i] - static_cast<double>(f.data()[i])) < 1e-3);
  }
}
