#ifndef SEPAINT_FIELD_HPP
#define SEPAINT_FIELD_HPP

#include <cstdint>
#include <vector>

namespace sepaint {

/// H x W grid of integer class IDs. Row-major storage.
struct LabelMap {
    int height = 0;
    int width = 0;
    std::vector<std::int32_t> labels;

    LabelMap() = default;
    LabelMap(int h, int w, std::int32_t fill = 0)
        : height(h), width(w), labels(static_cast<std::size_t>(h) * w, fill) {}

    std::int32_t& at(int i, int j) { return labels[static_cast<std::size_t>(i) * width + j]; }
    std::int32_t at(int i, int j) const { return labels[static_cast<std::size_t>(i) * width + j]; }
    std::size_t size() const { return labels.size(); }

    bool operator==(const LabelMap&) const = default;
};

/// H x W x K per-pixel class distributions. Layout: probs[(i*W + j)*K + k].
/// Plain storage; simplex validity is checked by the operations that need it.
struct CategoricalField {
    int height = 0;
    int width = 0;
    int num_classes = 0;
    std::vector<double> probs;

    CategoricalField() = default;
    CategoricalField(int h, int w, int k, double fill = 0.0)
        : height(h), width(w), num_classes(k),
          probs(static_cast<std::size_t>(h) * w * k, fill) {}

    double* pixel(int i, int j) {
        return probs.data() + (static_cast<std::size_t>(i) * width + j) * num_classes;
    }
    const double* pixel(int i, int j) const {
        return probs.data() + (static_cast<std::size_t>(i) * width + j) * num_classes;
    }
    std::size_t pixel_count() const { return static_cast<std::size_t>(height) * width; }

    bool same_shape(const CategoricalField& o) const {
        return height == o.height && width == o.width && num_classes == o.num_classes;
    }
};

/// Binary observation mask: 1 = known, 0 = unknown.
struct Mask {
    int height = 0;
    int width = 0;
    std::vector<std::uint8_t> known;

    Mask() = default;
    Mask(int h, int w, std::uint8_t fill = 0)
        : height(h), width(w), known(static_cast<std::size_t>(h) * w, fill) {}

    std::uint8_t& at(int i, int j) { return known[static_cast<std::size_t>(i) * width + j]; }
    std::uint8_t at(int i, int j) const { return known[static_cast<std::size_t>(i) * width + j]; }
    std::size_t size() const { return known.size(); }

    std::size_t known_count() const;
    std::size_t unknown_count() const { return size() - known_count(); }

    bool operator==(const Mask&) const = default;
};

/// One-hot encoding. Throws DomainError if any label >= num_classes.
CategoricalField one_hot(const LabelMap& map, int num_classes);

/// Per-pixel argmax; ties broken toward the lowest class index.
LabelMap argmax_decode(const CategoricalField& field);

/// True when every pixel distribution is nonnegative and sums to 1 within tol.
bool is_simplex_field(const CategoricalField& field, double tol = 1e-9);

}  // namespace sepaint

#endif
