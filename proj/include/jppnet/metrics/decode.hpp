// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "jppnet/core/types.hpp"

namespace jpp::metrics {

inline constexpr float kDefaultDetectThreshold = 0.05F;

/// Per-pixel argmax over 20 score channels; ties go to the lower class.
LabelMap decode_parsing(const HeatmapStack& scores);

/// Per-channel argmax (first in raster order on ties) multiplied by `stride`.
/// Channels whose peak is below `tau` decode to an absent joint.
JointSet decode_pose(const HeatmapStack& heatmaps, double stride = 1.0,
                     float tau = kDefaultDetectThreshold);

}  // namespace jpp::metrics
