#ifndef SEPAINT_CATDIFF_HPP
#define SEPAINT_CATDIFF_HPP

#include "sepaint/field.hpp"
#include "sepaint/schedule.hpp"

namespace sepaint {

/// Probabilities are floored at this value before any logarithm.
inline constexpr double kProbFloor = 1e-30;

/// One forward transition: p = (1 - beta_t) * x_prev + beta_t / K, per pixel.
/// Requires 1 <= t <= T.
CategoricalField forward_step_probs(const CategoricalField& x_prev, int t,
                                    const NoiseSchedule& sch);

/// Closed-form marginal: p = alpha_bar_t * x0 + (1 - alpha_bar_t) / K.
/// Requires 1 <= t <= T.
CategoricalField marginal_probs(const CategoricalField& x0, int t, const NoiseSchedule& sch);

/// Closed-form posterior of x_{t-1} given (x_t, x0):
///   p  propto  [alpha_t x_t + (1 - alpha_t)/K] * [alpha_bar_{t-1} x0 + (1 - alpha_bar_{t-1})/K]
/// normalized per pixel, computed in log space with log-sum-exp. Requires
/// 1 <= t <= T; t = 1 uses the alpha_bar_0 = 1 convention. x0 may be a soft
/// distribution (the denoiser's estimate).
CategoricalField posterior_probs(const CategoricalField& x_t, const CategoricalField& x0, int t,
                                 const NoiseSchedule& sch);

/// Parameterized reverse distribution: the posterior with x0 replaced by the
/// denoiser estimate x0_hat.
CategoricalField reverse_probs(const CategoricalField& x_t, const CategoricalField& x0_hat, int t,
                               const NoiseSchedule& sch);

/// Mean over pixels of sum_k p_k (log p_k - log q_k), with 0 log 0 := 0 and
/// q floored before the log. Nonnegative; zero iff p == q up to the floor.
double categorical_kl(const CategoricalField& p, const CategoricalField& q);

}  // namespace sepaint

#endif
