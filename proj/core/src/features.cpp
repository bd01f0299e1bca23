#include "brepnet/features.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace brepnet {

Tensor2 encode_faces(std::span<const FaceAttributes> faces) {
  Tensor2 x(static_cast<Index>(faces.size()), kFaceFeatureWidth);
  for (Index i = 0; i < x.rows(); ++i) {
    const FaceAttributes& f = faces[i];
    const int type = static_cast<int>(f.surface_type);
    if (f.surface_type != SurfaceType::kNonrationalBspline) x(i, type) = 1.0;
    x(i, 6) = f.area;
  }
  return x;
}

Tensor2 encode_edges(std::span<const EdgeAttributes> edges) {
  Tensor2 x(static_cast<Index>(edges.size()), kEdgeFeatureWidth);
  for (Index i = 0; i < x.rows(); ++i) {
    const EdgeAttributes& e = edges[i];
    x(i, static_cast<int>(e.curve_type)) = 1.0;
    x(i, 5 + static_cast<int>(e.convexity)) = 1.0;
    x(i, 8) = e.closed ? 1.0 : 0.0;
    x(i, 9) = e.length;
  }
  return x;
}

Tensor2 encode_coedges(std::span<const CoedgeAttributes> coedges) {
  Tensor2 x(static_cast<Index>(coedges.size()), kCoedgeFeatureWidth);
  for (Index i = 0; i < x.rows(); ++i) x(i, 0) = coedges[i].forward ? 1.0 : 0.0;
  return x;
}

std::vector<Index> face_flag_columns() { return {0, 1, 2, 3, 4, 5}; }
std::vector<Index> edge_flag_columns() { return {0, 1, 2, 3, 4, 5, 6, 7, 8}; }
std::vector<Index> coedge_flag_columns() { return {0}; }

Standardizer Standardizer::fit(const Tensor2& x, double sigma_guard, std::span<const Index> passthrough_columns) {
  if (x.rows() == 0) throw std::invalid_argument("Standardizer::fit: empty training set");
  const Index cols = x.cols();
  Standardizer s;
  s.mean.assign(static_cast<std::size_t>(cols), 0.0);
  s.sigma.assign(static_cast<std::size_t>(cols), 0.0);
  s.scaled.assign(static_cast<std::size_t>(cols), 1);

  const double n = static_cast<double>(x.rows());
  for (Index r = 0; r < x.rows(); ++r) {
    for (Index c = 0; c < cols; ++c) s.mean[c] += x(r, c);
  }
  for (Index c = 0; c < cols; ++c) s.mean[c] /= n;
  for (Index r = 0; r < x.rows(); ++r) {
    for (Index c = 0; c < cols; ++c) {
      const double d = x(r, c) - s.mean[c];
      s.sigma[c] += d * d;
    }
  }
  for (Index c = 0; c < cols; ++c) {
    s.sigma[c] = std::sqrt(s.sigma[c] / n);
    if (s.sigma[c] < sigma_guard) s.scaled[c] = 0;  // near-constant column
  }
  for (Index c : passthrough_columns) {
    if (c < 0 || c >= cols) throw std::invalid_argument("Standardizer::fit: passthrough column out of range");
    s.scaled[c] = 0;
  }
  return s;
}

Standardizer Standardizer::identity(Index num_columns) {
  Standardizer s;
  s.mean.assign(static_cast<std::size_t>(num_columns), 0.0);
  s.sigma.assign(static_cast<std::size_t>(num_columns), 1.0);
  s.scaled.assign(static_cast<std::size_t>(num_columns), 0);
  return s;
}

void Standardizer::apply_inplace(Tensor2& x) const {
  if (x.cols() != num_columns()) throw std::invalid_argument("Standardizer::apply: column count mismatch");
  for (Index r = 0; r < x.rows(); ++r) {
    for (Index c = 0; c < x.cols(); ++c) {
      if (scaled[c]) x(r, c) = (x(r, c) - mean[c]) / sigma[c];
    }
  }
}

Tensor2 Standardizer::apply(const Tensor2& x) const {
  Tensor2 out = x;
  apply_inplace(out);
  return out;
}

StandardizerSet StandardizerSet::identity() {
  return {Standardizer::identity(kFaceFeatureWidth), Standardizer::identity(kEdgeFeatureWidth),
          Standardizer::identity(kCoedgeFeatureWidth)};
}

}  // namespace brepnet
