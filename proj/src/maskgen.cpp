#include "sepaint/maskgen.hpp"

#include <algorithm>
#include <cmath>

#include "sepaint/errors.hpp"
#include "sepaint/rng.hpp"

namespace sepaint {

const char* mask_family_name(MaskFamily f) {
    switch (f) {
        case MaskFamily::rect: return "rect";
        case MaskFamily::half: return "half";
        case MaskFamily::speckle: return "speckle";
        case MaskFamily::strokes: return "strokes";
        case MaskFamily::coverage: return "coverage";
    }
    return "?";
}

MaskFamily mask_family_from_name(const std::string& name) {
    if (name == "rect") return MaskFamily::rect;
    if (name == "half") return MaskFamily::half;
    if (name == "speckle") return MaskFamily::speckle;
    if (name == "strokes") return MaskFamily::strokes;
    if (name == "coverage") return MaskFamily::coverage;
    throw ConfigError("unknown mask family '" + name + "'");
}

namespace {

int uniform_int(double u, int lo, int hi) {  // inclusive range
    return lo + std::min(hi - lo, static_cast<int>(u * (hi - lo + 1)));
}

void paint_disk(Mask& m, double ci, double cj, double radius, std::uint8_t value) {
    const int i0 = std::max(0, static_cast<int>(std::floor(ci - radius)));
    const int i1 = std::min(m.height - 1, static_cast<int>(std::ceil(ci + radius)));
    const int j0 = std::max(0, static_cast<int>(std::floor(cj - radius)));
    const int j1 = std::min(m.width - 1, static_cast<int>(std::ceil(cj + radius)));
    const double r2 = radius * radius;
    for (int i = i0; i <= i1; ++i)
        for (int j = j0; j <= j1; ++j) {
            const double di = i - ci, dj = j - cj;
            if (di * di + dj * dj <= r2) m.at(i, j) = value;
        }
}

void paint_segment(Mask& m, double i0, double j0, double i1, double j1, double radius,
                   std::uint8_t value) {
    const double len = std::hypot(i1 - i0, j1 - j0);
    const int steps = std::max(1, static_cast<int>(std::ceil(len / 0.5)));
    for (int s = 0; s <= steps; ++s) {
        const double f = static_cast<double>(s) / steps;
        paint_disk(m, i0 + f * (i1 - i0), j0 + f * (j1 - j0), radius, value);
    }
}

Mask gen_rect(const MaskSpec& spec, int h, int w) {
    if (spec.rect_count < 1) throw ConfigError("maskgen: rect_count must be >= 1");
    if (!(spec.rect_min_frac > 0.0) || spec.rect_max_frac > 1.0 ||
        spec.rect_min_frac > spec.rect_max_frac)
        throw ConfigError("maskgen: rect fractions must satisfy 0 < min <= max <= 1");
    Mask m(h, w, 1);
    RngStream rng(spec.seed);
    for (int r = 0; r < spec.rect_count; ++r) {
        const double fh = spec.rect_min_frac +
                          rng.next_uniform() * (spec.rect_max_frac - spec.rect_min_frac);
        const double fw = spec.rect_min_frac +
                          rng.next_uniform() * (spec.rect_max_frac - spec.rect_min_frac);
        const int rh = std::max(1, static_cast<int>(std::lround(fh * h)));
        const int rw = std::max(1, static_cast<int>(std::lround(fw * w)));
        const int i0 = uniform_int(rng.next_uniform(), 0, h - rh);
        const int j0 = uniform_int(rng.next_uniform(), 0, w - rw);
        for (int i = i0; i < i0 + rh; ++i)
            for (int j = j0; j < j0 + rw; ++j) m.at(i, j) = 0;
    }
    return m;
}

Mask gen_half(const MaskSpec& spec, int h, int w) {
    if (spec.half_side < -1 || spec.half_side > 3)
        throw ConfigError("maskgen: half_side must be in {-1, 0, 1, 2, 3}");
    int side = spec.half_side;
    if (side == -1) side = uniform_int(RngStream(spec.seed).next_uniform(), 0, 3);
    Mask m(h, w, 1);
    const int hw = w / 2, hh = h / 2;
    for (int i = 0; i < h; ++i)
        for (int j = 0; j < w; ++j) {
            const bool unknown = (side == 0 && j < hw) || (side == 1 && j >= w - hw) ||
                                 (side == 2 && i < hh) || (side == 3 && i >= h - hh);
            if (unknown) m.at(i, j) = 0;
        }
    return m;
}

Mask gen_speckle(const MaskSpec& spec, int h, int w) {
    if (spec.known_rate < 0.0 || spec.known_rate > 1.0)
        throw ConfigError("maskgen: known_rate must be in [0, 1]");
    Mask m(h, w, 0);
    RngStream rng(spec.seed);
    const UniformBlock block = rng.reserve(static_cast<std::uint64_t>(h) * w);
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
    for (std::size_t p = 0; p < m.known.size(); ++p)
        m.known[p] = block.at(p) < spec.known_rate ? 1 : 0;
    return m;
}

Mask gen_strokes(const MaskSpec& spec, int h, int w) {
    if (spec.stroke_count < 1 || spec.stroke_segments < 1 || spec.stroke_thickness < 1)
        throw ConfigError("maskgen: stroke parameters must be >= 1");
    Mask m(h, w, 1);
    RngStream rng(spec.seed);
    for (int s = 0; s < spec.stroke_count; ++s) {
        double ci = rng.next_uniform() * (h - 1);
        double cj = rng.next_uniform() * (w - 1);
        for (int seg = 0; seg < spec.stroke_segments; ++seg) {
            const double ni = rng.next_uniform() * (h - 1);
            const double nj = rng.next_uniform() * (w - 1);
            paint_segment(m, ci, cj, ni, nj, spec.stroke_thickness, 0);
            ci = ni;
            cj = nj;
        }
    }
    return m;
}

Mask gen_coverage(const MaskSpec& spec, int h, int w) {
    if (spec.walk_steps < 1 || spec.footprint_radius < 1)
        throw ConfigError("maskgen: walk parameters must be >= 1");
    Mask m(h, w, 0);
    RngStream rng(spec.seed);
    double ci = rng.next_uniform() * (h - 1);
    double cj = rng.next_uniform() * (w - 1);
    paint_disk(m, ci, cj, spec.footprint_radius, 1);
    const double step = std::max(1.0, spec.footprint_radius / 2.0);
    for (int s = 0; s < spec.walk_steps; ++s) {
        const double angle = rng.next_uniform() * 2.0 * 3.14159265358979323846;
        ci = std::clamp(ci + step * std::cos(angle), 0.0, static_cast<double>(h - 1));
        cj = std::clamp(cj + step * std::sin(angle), 0.0, static_cast<double>(w - 1));
        paint_disk(m, ci, cj, spec.footprint_radius, 1);
    }
    return m;
}

}  // namespace

Mask generate(const MaskSpec& spec, int height, int width) {
    if (height < 1 || width < 1) throw ConfigError("maskgen: empty mask shape");
    switch (spec.family) {
        case MaskFamily::rect: return gen_rect(spec, height, width);
        case MaskFamily::half: return gen_half(spec, height, width);
        case MaskFamily::speckle: return gen_speckle(spec, height, width);
        case MaskFamily::strokes: return gen_strokes(spec, height, width);
        case MaskFamily::coverage: return gen_coverage(spec, height, width);
    }
    throw ConfigError("maskgen: unknown family");
}

double unknown_fraction(const Mask& mask) {
    if (mask.size() == 0) return 0.0;
    return static_cast<double>(mask.unknown_count()) / static_cast<double>(mask.size());
}

}  // namespace sepaint
