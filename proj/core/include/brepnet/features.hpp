#pragma once

#include <span>
#include <string>
#include <vector>

#include "brepnet/tensor.hpp"
#include "brepnet/types.hpp"

namespace brepnet {

enum class SurfaceType : int {
  kPlane = 0,
  kCylinder,
  kCone,
  kSphere,
  kTorus,
  kRationalBspline,
  kNonrationalBspline,  // encoded as all-zero type flags
};

enum class CurveType : int {
  kLine = 0,
  kCircle,
  kEllipse,
  kHelix,
  kIntersectionCurve,
};

enum class EdgeConvexity : int {
  kConcave = 0,
  kConvex,
  kSmooth,
};

struct FaceAttributes {
  SurfaceType surface_type = SurfaceType::kPlane;
  double area = 0.0;
};

struct EdgeAttributes {
  CurveType curve_type = CurveType::kLine;
  EdgeConvexity convexity = EdgeConvexity::kConvex;
  bool closed = false;
  double length = 0.0;
};

struct CoedgeAttributes {
  bool forward = true;  // coedge direction agrees with the curve direction
};

inline constexpr Index kFaceFeatureWidth = 7;    // 5 surface flags + rational flag + area
inline constexpr Index kEdgeFeatureWidth = 10;   // 5 curve flags + 3 convexity flags + closed + length
inline constexpr Index kCoedgeFeatureWidth = 1;  // forward flag

/// Row layout [plane, cylinder, cone, sphere, torus, rational, area].
/// Non-rational B-splines leave all type columns zero.
Tensor2 encode_faces(std::span<const FaceAttributes> faces);

/// Row layout [line, circle, ellipse, helix, intersection,
///             concave, convex, smooth, closed, length].
Tensor2 encode_edges(std::span<const EdgeAttributes> edges);

/// Row layout [forward], values in {0, 1}.
Tensor2 encode_coedges(std::span<const CoedgeAttributes> coedges);

/// Binary (flag) columns of each feature matrix, for the optional switch
/// that leaves them unstandardized.
std::vector<Index> face_flag_columns();
std::vector<Index> edge_flag_columns();
std::vector<Index> coedge_flag_columns();

/// Column-wise standardization x' = (x - mu) / sigma, fit on the training
/// set only. Columns whose deviation falls below the guard pass through
/// unchanged, as do columns explicitly listed as passthrough.
struct Standardizer {
  std::vector<double> mean;
  std::vector<double> sigma;         // population deviation (divide by n)
  std::vector<std::uint8_t> scaled;  // per column: 0 = passthrough

  Index num_columns() const { return static_cast<Index>(mean.size()); }

  static constexpr double kSigmaGuard = 1e-8;

  static Standardizer fit(const Tensor2& x, double sigma_guard = kSigmaGuard,
                          std::span<const Index> passthrough_columns = {});
  /// Identity transform for a given width (used before any fit happens).
  static Standardizer identity(Index num_columns);

  void apply_inplace(Tensor2& x) const;
  Tensor2 apply(const Tensor2& x) const;
};

/// One standardizer per input feature matrix.
struct StandardizerSet {
  Standardizer faces;
  Standardizer edges;
  Standardizer coedges;

  static StandardizerSet identity();
};

}  // namespace brepnet
