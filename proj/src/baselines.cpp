#include "sepaint/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "sepaint/errors.hpp"

namespace sepaint {

const char* baseline_name(BaselineKind k) {
    switch (k) {
        case BaselineKind::nearest: return "nearest";
        case BaselineKind::linear: return "linear";
        case BaselineKind::cubic: return "cubic";
    }
    return "?";
}

BaselineKind baseline_from_name(const std::string& name) {
    if (name == "nearest") return BaselineKind::nearest;
    if (name == "linear") return BaselineKind::linear;
    if (name == "cubic") return BaselineKind::cubic;
    throw ConfigError("unknown baseline '" + name + "'");
}

namespace {

struct KnownPixel {
    int i, j;
    std::int32_t label;
};

/// Up to 8 nearest candidates ordered by (d^2, scan order). Scan order is
/// row-major over known pixels, which is exactly the smaller-row-then-column
/// tie-break.
struct BestK {
    struct Entry {
        double d2;
        std::size_t ord;
    };
    Entry e[8];
    int cap = 8;
    int n = 0;

    bool better(double d2, std::size_t ord, const Entry& x) const {
        return d2 < x.d2 || (d2 == x.d2 && ord < x.ord);
    }
    void insert(double d2, std::size_t ord) {
        if (n == cap && !better(d2, ord, e[n - 1])) return;
        int pos = n < cap ? n : n - 1;
        e[pos] = {d2, ord};
        while (pos > 0 && better(e[pos].d2, e[pos].ord, e[pos - 1])) {
            std::swap(e[pos], e[pos - 1]);
            --pos;
        }
        if (n < cap) ++n;
    }
    double worst_d2() const {
        return n < cap ? std::numeric_limits<double>::infinity() : e[n - 1].d2;
    }
};

std::int32_t fill_value(BaselineKind kind, const BestK& best,
                        const std::vector<KnownPixel>& known, int k_classes) {
    const std::int32_t nearest_label = known[best.e[0].ord].label;
    if (kind == BaselineKind::nearest) return nearest_label;

    double wsum = 0.0, vsum = 0.0;
    if (kind == BaselineKind::linear) {
        for (int c = 0; c < best.n; ++c) {
            const double w = 1.0 / best.e[c].d2;
            wsum += w;
            vsum += w * known[best.e[c].ord].label;
        }
    } else {
        const double dmax = std::sqrt(best.e[best.n - 1].d2);
        for (int c = 0; c < best.n; ++c) {
            const double d = std::sqrt(best.e[c].d2);
            if (d >= dmax) continue;
            const double a = 1.0 - (d / dmax) * (d / dmax) * (d / dmax);
            const double w = a * a * a;
            wsum += w;
            vsum += w * known[best.e[c].ord].label;
        }
        if (wsum == 0.0) return nearest_label;
    }
    const double v = vsum / wsum;
    const auto rounded = static_cast<std::int32_t>(std::floor(v + 0.5));
    return std::clamp(rounded, std::int32_t{0}, static_cast<std::int32_t>(k_classes - 1));
}

void search_exhaustive(int i, int j, const std::vector<KnownPixel>& known, BestK& best) {
    for (std::size_t ord = 0; ord < known.size(); ++ord) {
        const double di = i - known[ord].i, dj = j - known[ord].j;
        best.insert(di * di + dj * dj, ord);
    }
}

constexpr int kCell = 16;

struct BucketGrid {
    int cells_h = 0, cells_w = 0;
    std::vector<std::vector<std::size_t>> cells;  // known-pixel indices, ascending

    BucketGrid(const std::vector<KnownPixel>& known, int h, int w)
        : cells_h((h + kCell - 1) / kCell), cells_w((w + kCell - 1) / kCell),
          cells(static_cast<std::size_t>(cells_h) * cells_w) {
        for (std::size_t ord = 0; ord < known.size(); ++ord)
            cells[static_cast<std::size_t>(known[ord].i / kCell) * cells_w +
                  known[ord].j / kCell]
                .push_back(ord);
    }
};

void search_bucketed(int i, int j, const std::vector<KnownPixel>& known,
                     const BucketGrid& grid, BestK& best) {
    const int ci = i / kCell, cj = j / kCell;
    const int max_ring = std::max(std::max(ci, grid.cells_h - 1 - ci),
                                  std::max(cj, grid.cells_w - 1 - cj));
    for (int ring = 0; ring <= max_ring; ++ring) {
        // Any point in a ring-R cell is at least (R-1)*kCell away, so once the
        // candidate set is full and its worst member beats the next ring's
        // lower bound, the search is complete.
        const double lb = ring > 0 ? static_cast<double>((ring - 1) * kCell) : 0.0;
        if (best.n == best.cap && best.worst_d2() <= lb * lb && ring > 0) break;
        const int r0 = std::max(0, ci - ring), r1 = std::min(grid.cells_h - 1, ci + ring);
        const int c0 = std::max(0, cj - ring), c1 = std::min(grid.cells_w - 1, cj + ring);
        for (int r = r0; r <= r1; ++r)
            for (int c = c0; c <= c1; ++c) {
                if (ring > 0 && std::max(std::abs(r - ci), std::abs(c - cj)) != ring)
                    continue;  // interior cells were handled by smaller rings
                for (std::size_t ord : grid.cells[static_cast<std::size_t>(r) * grid.cells_w + c]) {
                    const double di = i - known[ord].i, dj = j - known[ord].j;
                    best.insert(di * di + dj * dj, ord);
                }
            }
    }
}

}  // namespace

namespace detail {

LabelMap complete_with_mode(BaselineKind kind, const LabelMap& y0, const Mask& mask,
                            int num_classes, bool bucketed) {
    if (y0.height != mask.height || y0.width != mask.width)
        throw DomainError("baseline: mask shape does not match the map");

    std::vector<KnownPixel> known;
    known.reserve(mask.known_count());
    std::int32_t max_label = 0;
    for (int i = 0; i < y0.height; ++i)
        for (int j = 0; j < y0.width; ++j) {
            max_label = std::max(max_label, y0.at(i, j));
            if (mask.at(i, j)) known.push_back({i, j, y0.at(i, j)});
        }
    if (known.empty()) throw DomainError("baseline: mask has no known pixel");
    const int kc = num_classes > 0 ? num_classes : max_label + 1;

    const int want = kind == BaselineKind::nearest ? 1 : 8;
    BucketGrid grid = bucketed ? BucketGrid(known, y0.height, y0.width)
                               : BucketGrid({}, 1, 1);

    LabelMap out = y0;
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic, 8)
#endif
    for (std::size_t p = 0; p < out.labels.size(); ++p) {
        if (mask.known[p]) continue;
        const int i = static_cast<int>(p) / y0.width;
        const int j = static_cast<int>(p) % y0.width;
        BestK best;
        best.cap = std::min<int>(want, static_cast<int>(known.size()));
        if (bucketed)
            search_bucketed(i, j, known, grid, best);
        else
            search_exhaustive(i, j, known, best);
        out.labels[p] = fill_value(kind, best, known, kc);
    }
    return out;
}

}  // namespace detail

LabelMap complete(BaselineKind kind, const LabelMap& y0, const Mask& mask, int num_classes) {
    const bool bucketed =
        static_cast<long>(y0.height) * y0.width > 256L * 256L;
    return detail::complete_with_mode(kind, y0, mask, num_classes, bucketed);
}

}  // namespace sepaint
