#include "sepaint/field.hpp"

#include <cmath>
#include <cstddef>

#include "sepaint/errors.hpp"

namespace sepaint {

std::size_t Mask::known_count() const {
    std::size_t n = 0;
    for (auto v : known) n += (v != 0);
    return n;
}

CategoricalField one_hot(const LabelMap& map, int num_classes) {
    CategoricalField out(map.height, map.width, num_classes, 0.0);
    const std::size_t n = map.size();
    for (std::size_t p = 0; p < n; ++p) {
        const std::int32_t c = map.labels[p];
        if (c < 0 || c >= num_classes)
            throw DomainError("one_hot: label " + std::to_string(c) + " outside [0, " +
                              std::to_string(num_classes) + ")");
        out.probs[p * num_classes + c] = 1.0;
    }
    return out;
}

LabelMap argmax_decode(const CategoricalField& field) {
    LabelMap out(field.height, field.width);
    const int k_count = field.num_classes;
    const std::size_t n = field.pixel_count();
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
    for (std::size_t p = 0; p < n; ++p) {
        const double* row = field.probs.data() + p * k_count;
        int best = 0;
        for (int k = 1; k < k_count; ++k)
            if (row[k] > row[best]) best = k;
        out.labels[p] = best;
    }
    return out;
}

bool is_simplex_field(const CategoricalField& field, double tol) {
    const int k_count = field.num_classes;
    const std::size_t n = field.pixel_count();
    for (std::size_t p = 0; p < n; ++p) {
        const double* row = field.probs.data() + p * k_count;
        double sum = 0.0;
        for (int k = 0; k < k_count; ++k) {
            if (!(row[k] >= 0.0)) return false;  // also rejects NaN
            sum += row[k];
        }
        if (std::abs(sum - 1.0) > tol) return false;
    }
    return true;
}

}  // namespace sepaint
