#ifndef SEPAINT_MASKGEN_HPP
#define SEPAINT_MASKGEN_HPP

#include <cstdint>
#include <string>

#include "sepaint/field.hpp"

namespace sepaint {

enum class MaskFamily { rect, half, speckle, strokes, coverage };

const char* mask_family_name(MaskFamily f);
MaskFamily mask_family_from_name(const std::string& name);

/// Parameters for every family live side by side; generate() reads only the
/// ones its family uses. Generation is a pure function of (spec, H, W).
struct MaskSpec {
    MaskFamily family = MaskFamily::rect;
    std::uint64_t seed = 0;

    // rect: `rect_count` axis-aligned rectangles become unknown; each side is
    // a uniform fraction of the map dimension in [rect_min_frac, rect_max_frac].
    int rect_count = 2;
    double rect_min_frac = 0.25;
    double rect_max_frac = 0.5;

    // half: one axis-aligned half unknown. 0 = left, 1 = right, 2 = top,
    // 3 = bottom, -1 = pick one of the four from the seed.
    int half_side = -1;

    // speckle: each pixel known independently with probability known_rate.
    double known_rate = 0.05;

    // strokes: `stroke_count` polylines of `stroke_segments` segments, drawn
    // with a disk brush of radius stroke_thickness, become unknown.
    int stroke_count = 3;
    int stroke_segments = 4;
    int stroke_thickness = 2;

    // coverage: union of disks of footprint_radius along a seeded random walk
    // of walk_steps is known; everything else unknown.
    int walk_steps = 200;
    int footprint_radius = 4;
};

/// Deterministic mask construction. Invalid parameters throw ConfigError.
Mask generate(const MaskSpec& spec, int height, int width);

/// Fraction of pixels with M = 0, computed from the mask itself.
double unknown_fraction(const Mask& mask);

}  // namespace sepaint

#endif
