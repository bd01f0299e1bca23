#pragma once

#include <array>
#include <cstdint>
#include <string_view>

namespace brepnet {

/// Entity index into the coedge/edge/face arrays of a solid.
using Index = std::int32_t;

/// The fixed face-segmentation vocabulary. The integer values are part of
/// the dataset schema contract and must not be reordered.
enum class SegmentLabel : int {
  kExtrudeSide = 0,
  kExtrudeEnd = 1,
  kCutSide = 2,
  kCutEnd = 3,
  kFillet = 4,
  kChamfer = 5,
  kRevolveSide = 6,
  kRevolveEnd = 7,
};

inline constexpr int kNumSegmentClasses = 8;

inline constexpr std::array<std::string_view, kNumSegmentClasses> kSegmentLabelNames = {
    "ExtrudeSide", "ExtrudeEnd", "CutSide", "CutEnd",
    "Fillet",      "Chamfer",    "RevolveSide", "RevolveEnd",
};

}  // namespace brepnet
