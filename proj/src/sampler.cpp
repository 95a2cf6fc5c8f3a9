#include "sepaint/sampler.hpp"

#include <cmath>

#include "sepaint/errors.hpp"

namespace sepaint {

namespace {
constexpr double kProbFloor = 1e-30;

double clamp_unit(double e) {
    constexpr double lo = 1e-12;
    constexpr double hi = 1.0 - 1e-12;
    return e < lo ? lo : (e > hi ? hi : e);
}

int gumbel_max_raw(const double* p, int k_count, UniformBlock block, std::uint64_t base) {
    int best = 0;
    double best_score = -HUGE_VAL;
    for (int k = 0; k < k_count; ++k) {
        const double eps = block.at(base + k);
        const double score =
            std::log(p[k] < kProbFloor ? kProbFloor : p[k]) - std::log(-std::log(eps));
        if (score > best_score) {
            best_score = score;
            best = k;
        }
    }
    return best;
}

}  // namespace

int gumbel_max(std::span<const double> p, std::span<const double> eps) {
    if (p.size() != eps.size() || p.empty())
        throw DomainError("gumbel_max: p and eps must be nonempty and the same length");
    int best = 0;
    double best_score = -HUGE_VAL;
    for (std::size_t k = 0; k < p.size(); ++k) {
        const double e = clamp_unit(eps[k]);
        const double score =
            std::log(p[k] < kProbFloor ? kProbFloor : p[k]) - std::log(-std::log(e));
        if (score > best_score) {
            best_score = score;
            best = static_cast<int>(k);
        }
    }
    return best;
}

LabelMap argmax_field(const CategoricalField& probs) { return argmax_decode(probs); }

LabelMap sample_field(const CategoricalField& probs, RngStream& rng, bool deterministic) {
    if (deterministic) return argmax_field(probs);

    const int k_count = probs.num_classes;
    const std::size_t n = probs.pixel_count();
    const UniformBlock block = rng.reserve(n * static_cast<std::uint64_t>(k_count));

    LabelMap out(probs.height, probs.width);
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
    for (std::size_t p = 0; p < n; ++p) {
        out.labels[p] = gumbel_max_raw(probs.probs.data() + p * k_count, k_count, block,
                                       p * static_cast<std::uint64_t>(k_count));
    }
    return out;
}

}  // namespace sepaint
