#include <numeric>
#include <stdexcept>

#include "brepnet/data.hpp"
#include "brepnet/rng.hpp"

namespace brepnet {

Batch make_batch(std::span<const SolidRecord> records, const StandardizerSet& standardizer) {
  if (records.empty()) throw std::invalid_argument("make_batch: no records");

  Batch batch;
  batch.face_offsets.push_back(0);
  batch.edge_offsets.push_back(0);
  batch.coedge_offsets.push_back(0);

  std::vector<Tensor2> xf, xe, xc;
  for (const SolidRecord& record : records) {
    const SolidTopology& topo = record.topology;
    const Index face_off = batch.topology.num_faces;
    const Index edge_off = batch.topology.num_edges;
    const Index coedge_off = batch.topology.num_coedges();

    for (Index i = 0; i < topo.num_coedges(); ++i) {
      batch.topology.coedge_next.push_back(topo.coedge_next[i] + coedge_off);
      batch.topology.coedge_mate.push_back(topo.coedge_mate[i] + coedge_off);
      batch.topology.coedge_edge.push_back(topo.coedge_edge[i] + edge_off);
      batch.topology.coedge_face.push_back(topo.coedge_face[i] + face_off);
    }
    batch.topology.num_faces += topo.num_faces;
    batch.topology.num_edges += topo.num_edges;

    xf.push_back(standardizer.faces.apply(encode_faces(record.faces)));
    xe.push_back(standardizer.edges.apply(encode_edges(record.edges)));
    xc.push_back(standardizer.coedges.apply(encode_coedges(record.coedges)));

    if (record.has_labels()) {
      batch.labels.insert(batch.labels.end(), record.labels.begin(), record.labels.end());
    } else {
      batch.labels.insert(batch.labels.end(), static_cast<std::size_t>(topo.num_faces), -1);
    }

    batch.solid_ids.push_back(record.id);
    batch.face_offsets.push_back(batch.topology.num_faces);
    batch.edge_offsets.push_back(batch.topology.num_edges);
    batch.coedge_offsets.push_back(batch.topology.num_coedges());
  }

  batch.x_faces = vconcat(std::span<const Tensor2>(xf));
  batch.x_edges = vconcat(std::span<const Tensor2>(xe));
  batch.x_coedges = vconcat(std::span<const Tensor2>(xc));
  // The union topology's operators are the block-diagonal concatenation of
  // the per-solid ones.
  batch.operators = build_operators(batch.topology);
  return batch;
}

std::vector<Batch> make_batches(std::span<const SolidRecord> records, Index face_budget, std::uint64_t seed,
                                const StandardizerSet& standardizer) {
  if (face_budget < 1) throw std::invalid_argument("make_batches: face budget must be >= 1");

  std::vector<std::size_t> order(records.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng(seed);
  rng.shuffle(std::span<std::size_t>(order));

  std::vector<Batch> batches;
  std::vector<SolidRecord> pending;
  Index pending_faces = 0;
  auto flush = [&] {
    if (pending.empty()) return;
    batches.push_back(make_batch(pending, standardizer));
    pending.clear();
    pending_faces = 0;
  };

  for (std::size_t idx : order) {
    const SolidRecord& record = records[idx];
    const Index faces = record.topology.num_faces;
    if (!pending.empty() && pending_faces + faces > face_budget) flush();
    pending.push_back(record);  // a solid above the budget forms its own batch
    pending_faces += faces;
    if (pending_faces >= face_budget) flush();
  }
  flush();
  return batches;
}

}  // namespace brepnet
