#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "brepnet/features.hpp"
#include "brepnet/tensor.hpp"
#include "brepnet/topology.hpp"
#include "brepnet/types.hpp"
#include "brepnet/walks.hpp"

namespace brepnet {

/// One solid: topology, per-entity attributes, and optional per-face labels
/// from the 8-class vocabulary.
struct SolidRecord {
  std::string id;
  SolidTopology topology;
  std::vector<FaceAttributes> faces;
  std::vector<EdgeAttributes> edges;
  std::vector<CoedgeAttributes> coedges;
  std::vector<int> labels;  // empty, or one per face

  bool has_labels() const { return !labels.empty(); }
};

class SchemaError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Parses one solid document (JSON text, schema in the README). Throws
/// SchemaError on malformed documents; does not run topology validation.
SolidRecord parse_solid_document(const std::string& text);

std::string to_document(const SolidRecord& record);
void write_document(const std::filesystem::path& path, const SolidRecord& record);

struct ReadReport {
  struct Skipped {
    std::string source;  // file path or array position
    std::string reason;
  };
  std::vector<Skipped> skipped;
  std::size_t loaded = 0;
};

/// Reads a dataset from a directory of *.json documents, a single document
/// file, or a file holding a JSON array of documents. Every record is
/// validated; invalid or malformed ones are skipped and reported. Throws
/// only when the path itself is unreadable.
std::vector<SolidRecord> read_dataset(const std::filesystem::path& path, ReadReport* report = nullptr);

struct SplitRatios {
  double train = 0.70;
  double validation = 0.15;
  double test = 0.15;
};

struct DatasetSplit {
  std::vector<SolidRecord> train;
  std::vector<SolidRecord> validation;
  std::vector<SolidRecord> test;
};

/// Deterministic shuffled split. When split_file is given it overrides the
/// ratios: the file maps record ids to their split (schema in the README);
/// ids missing from the file are dropped with no error.
DatasetSplit split_dataset(std::vector<SolidRecord> records, const SplitRatios& ratios, std::uint64_t seed,
                           const std::optional<std::filesystem::path>& split_file = {});

/// Minibatch: row-wise concatenated feature matrices plus the topology of
/// the disconnected union, whose incidence operators are exactly the
/// block-diagonal concatenation of the per-solid ones.
struct Batch {
  SolidTopology topology;
  Operators operators;
  Tensor2 x_faces;
  Tensor2 x_edges;
  Tensor2 x_coedges;
  std::vector<int> labels;  // per face; -1 where a solid is unlabeled
  std::vector<std::string> solid_ids;
  std::vector<Index> face_offsets;    // size num_solids + 1
  std::vector<Index> edge_offsets;    // size num_solids + 1
  std::vector<Index> coedge_offsets;  // size num_solids + 1

  std::size_t num_solids() const { return solid_ids.size(); }
  Index num_faces() const { return topology.num_faces; }
};

/// Builds one batch from an explicit list of records (no budget logic).
Batch make_batch(std::span<const SolidRecord> records, const StandardizerSet& standardizer);

/// Greedy fill in shuffled order: solids are appended while the face budget
/// holds; a solid larger than the budget forms its own batch.
std::vector<Batch> make_batches(std::span<const SolidRecord> records, Index face_budget, std::uint64_t seed,
                                const StandardizerSet& standardizer);

enum class SynthKind { kBox, kPrism, kBoxWithHole, kFilletedBox };

SynthKind synth_kind_from_name(const std::string& name);
std::string_view synth_kind_name(SynthKind kind);

struct SynthParams {
  int prism_sides = 0;  // 0 draws 3..8 from the seed; values < 3 are invalid
  bool labeled = true;
};

struct GeneratedSolid {
  SolidRecord record;
  Index num_vertices = 0;  // for Euler checks; not part of the document schema
  Index genus = 0;
};

/// Deterministic synthetic solid with generator-assigned attributes and
/// labels (prism/box sides -> ExtrudeSide, caps -> ExtrudeEnd, hole walls ->
/// CutSide with concave rims, fillet strip -> Fillet with smooth borders).
GeneratedSolid generate_synthetic(SynthKind kind, const SynthParams& params, std::uint64_t seed);

}  // namespace brepnet
