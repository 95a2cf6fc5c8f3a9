#ifndef SEPAINT_BASELINES_HPP
#define SEPAINT_BASELINES_HPP

#include <string>

#include "sepaint/field.hpp"

namespace sepaint {

enum class BaselineKind { nearest, linear, cubic };

const char* baseline_name(BaselineKind k);
BaselineKind baseline_from_name(const std::string& name);

/// Fill unknown pixels from known ones. Known pixels pass through unchanged.
///
/// nearest: label of the Euclidean-nearest known pixel; ties broken toward
///   the smaller row, then the smaller column.
/// linear: inverse-distance-squared weighted mean of the 8 nearest known
///   pixels' label IDs treated as reals, rounded half-up, clamped to
///   [0, K-1]. Interpolating IDs can invent classes absent from the input
///   (e.g. 8 and 10 average to 9); that is the point of this baseline.
/// cubic: same neighbor set, weight (1 - (d/d_max)^3)^3 for d < d_max else 0
///   with d_max the farthest neighbor's distance; if every weight vanishes,
///   falls back to the nearest label.
///
/// num_classes <= 0 derives K as 1 + the largest label in y0. Throws
/// DomainError when the mask has no known pixel.
LabelMap complete(BaselineKind kind, const LabelMap& y0, const Mask& mask,
                  int num_classes = -1);

namespace detail {
/// Same contract with the neighbor-search mode pinned: exhaustive scan or the
/// grid-bucketed search normally reserved for maps larger than 256x256.
/// Exposed so tests can check the two produce identical output.
LabelMap complete_with_mode(BaselineKind kind, const LabelMap& y0, const Mask& mask,
                            int num_classes, bool bucketed);
}  // namespace detail

}  // namespace sepaint

#endif
