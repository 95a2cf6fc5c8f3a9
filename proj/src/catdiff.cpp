#include "sepaint/catdiff.hpp"

#include <cmath>

#include "sepaint/errors.hpp"

namespace sepaint {

namespace {

void check_step(int t, const NoiseSchedule& sch) {
    if (t < 1 || t > sch.steps())
        throw DomainError("catdiff: step " + std::to_string(t) + " outside [1, " +
                          std::to_string(sch.steps()) + "]");
}

// p_out = keep * p_in + spread/K, the shared shape of Eqs. for the forward
// transition (keep = 1 - beta_t) and the marginal (keep = alpha_bar_t).
CategoricalField affine_toward_uniform(const CategoricalField& in, double keep) {
    const int k_count = in.num_classes;
    const double add = (1.0 - keep) / k_count;
    CategoricalField out(in.height, in.width, k_count);
    const std::size_t n = in.probs.size();
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
    for (std::size_t i = 0; i < n; ++i) out.probs[i] = keep * in.probs[i] + add;
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
    if (!x_t.same_shape(x0)) throw DomainError("posterior_probs: x_t and x0 shapes differ");

    const int k_count = x_t.num_classes;
    const double alpha = sch.alpha(t);
    const double bar_prev = sch.alpha_bar(t - 1);
    const double add_t = (1.0 - alpha) / k_count;
    const double add_0 = (1.0 - bar_prev) / k_count;

    CategoricalField out(x_t.height, x_t.width, k_count);
    const std::size_t n = x_t.pixel_count();
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
    for (std::size_t p = 0; p < n; ++p) {
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
        // plain division keeps this bitwise-identical to the serial reference
        for (int k = 0; k < k_count; ++k) o[k] /= sum;
    }
    return out;
}

CategoricalField reverse_probs(const CategoricalField& x_t, const CategoricalField& x0_hat, int t,
                               const NoiseSchedule& sch) {
    return posterior_probs(x_t, x0_hat, t, sch);
}

double categorical_kl(const CategoricalField& p, const CategoricalField& q) {
    if (!p.same_shape(q)) throw DomainError("categorical_kl: shape mismatch");

    const int k_count = p.num_classes;
    const int rows = p.height;
    const int cols = p.width;
    // Row partial sums combined in row order keep the reduction deterministic
    // for any thread count.
    std::vector<double> row_sum(static_cast<std::size_t>(rows), 0.0);
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
    for (int i = 0; i < rows; ++i) {
        double acc = 0.0;
        for (int j = 0; j < cols; ++j) {
            const double* pp = p.pixel(i, j);
            const double* qp = q.pixel(i, j);
            for (int k = 0; k < k_count; ++k) {
                if (pp[k] <= 0.0) continue;
                const double qk = qp[k] < kProbFloor ? kProbFloor : qp[k];
                acc += pp[k] * (std::log(pp[k]) - std::log(qk));
            }
        }
        row_sum[i] = acc;
    }
    double total = 0.0;
    for (int i = 0; i < rows; ++i) total += row_sum[i];
    return total / static_cast<double>(p.pixel_count());
}

}  // namespace sepaint
