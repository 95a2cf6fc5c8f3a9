#include "sepaint/serial_ref.hpp"

#include <cmath>

#include "sepaint/catdiff.hpp"
#include "sepaint/errors.hpp"

namespace sepaint::serial {

namespace {

void check_step(int t, const NoiseSchedule& sch) {
    if (t < 1 || t > sch.steps()) throw DomainError("serial: step out of range");
}

CategoricalField affine_toward_uniform(const CategoricalField& in, double keep) {
    const double add = (1.0 - keep) / in.num_classes;
    CategoricalField out(in.height, in.width, in.num_classes);
    for (std::size_t i = 0; i < in.probs.size(); ++i) out.probs[i] = keep * in.probs[i] + add;
    return out;
}

}  // namespace

CategoricalField forward_step_probs(const CategoricalField& x_prev, int t,
                                    const NoiseSchedule& sch) {
    check_step(t, sch);
    return affine_toward_uniform(x_prev, 1.0 - sch.beta(t));
}

CategoricalField marginal_probs(const CategoricalField& x0, int t, const NoiseSchedule& sch) {
    check_step(t, sch);
    return affine_toward_uniform(x0, sch.alpha_bar(t));
}

CategoricalField posterior_probs(const CategoricalField& x_t, const CategoricalField& x0, int t,
                                 const NoiseSchedule& sch) {
    check_step(t, sch);
    if (!x_t.same_shape(x0)) throw DomainError("serial posterior: shape mismatch");

    const int k_count = x_t.num_classes;
    const double alpha = sch.alpha(t);
    const double bar_prev = sch.alpha_bar(t - 1);
    const double add_t = (1.0 - alpha) / k_count;
    const double add_0 = (1.0 - bar_prev) / k_count;

    CategoricalField out(x_t.height, x_t.width, k_count);
    for (std::size_t p = 0; p < x_t.pixel_count(); ++p) {
        const double* xt = x_t.probs.data() + p * k_count;
        const double* x0p = x0.probs.data() + p * k_count;
        double* o = out.probs.data() + p * k_count;

        double max_logit = -HUGE_VAL;
        for (int k = 0; k < k_count; ++k) {
            double a = alpha * xt[k] + add_t;
            double b = bar_prev * x0p[k] + add_0;
            if (a < kProbFloor) a = kProbFloor;
            if (b < kProbFloor) b = kProbFloor;
            o[k] = std::log(a) + std::log(b);
            if (o[k] > max_logit) max_logit = o[k];
        }
        double sum = 0.0;
        for (int k = 0; k < k_count; ++k) {
            o[k] = std::exp(o[k] - max_logit);
            sum += o[k];
        }
        for (int k = 0; k < k_count; ++k) o[k] /= sum;
    }
    return out;
}

double categorical_kl(const CategoricalField& p, const CategoricalField& q) {
    if (!p.same_shape(q)) throw DomainError("serial kl: shape mismatch");
    const int k_count = p.num_classes;
    double total = 0.0;
    for (std::size_t px = 0; px < p.pixel_count(); ++px) {
        const double* pp = p.probs.data() + px * k_count;
        const double* qp = q.probs.data() + px * k_count;
        for (int k = 0; k < k_count; ++k) {
            if (pp[k] <= 0.0) continue;
            const double qk = qp[k] < kProbFloor ? kProbFloor : qp[k];
            total += pp[k] * (std::log(pp[k]) - std::log(qk));
        }
    }
    return total / static_cast<double>(p.pixel_count());
}

LabelMap argmax_decode(const CategoricalField& field) {
    LabelMap out(field.height, field.width);
    for (std::size_t p = 0; p < field.pixel_count(); ++p) {
        const double* row = field.probs.data() + p * field.num_classes;
        int best = 0;
        for (int k = 1; k < field.num_classes; ++k)
            if (row[k] > row[best]) best = k;
        out.labels[p] = best;
    }
    return out;
}

LabelMap sample_field(const CategoricalField& probs, RngStream& rng, bool deterministic) {
    if (deterministic) return sepaint::serial::argmax_decode(probs);

    const int k_count = probs.num_classes;
    const std::size_t n = probs.pixel_count();
    const UniformBlock block = rng.reserve(n * static_cast<std::uint64_t>(k_count));

    LabelMap out(probs.height, probs.width);
    for (std::size_t p = 0; p < n; ++p) {
        const double* row = probs.probs.data() + p * k_count;
        int best = 0;
        double best_score = -HUGE_VAL;
        for (int k = 0; k < k_count; ++k) {
            const double eps = block.at(p * static_cast<std::uint64_t>(k_count) + k);
            const double score =
                std::log(row[k] < kProbFloor ? kProbFloor : row[k]) - std::log(-std::log(eps));
            if (score > best_score) {
                best_score = score;
                best = k;
            }
        }
        out.labels[p] = best;
    }
    return out;
}

}  // namespace sepaint::serial
