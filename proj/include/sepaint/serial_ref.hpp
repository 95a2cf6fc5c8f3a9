#ifndef SEPAINT_SERIAL_REF_HPP
#define SEPAINT_SERIAL_REF_HPP

#include "sepaint/field.hpp"
#include "sepaint/rng.hpp"
#include "sepaint/schedule.hpp"

namespace sepaint::serial {

/// Serial reference implementations of the parallel kernels. Plain loops,
/// no OpenMP. Per-pixel ops match the parallel path bitwise; the KL
/// reduction accumulates straight through and may differ in the last ulps.

CategoricalField forward_step_probs(const CategoricalField& x_prev, int t,
                                    const NoiseSchedule& sch);
CategoricalField marginal_probs(const CategoricalField& x0, int t, const NoiseSchedule& sch);
CategoricalField posterior_probs(const CategoricalField& x_t, const CategoricalField& x0, int t,
                                 const NoiseSchedule& sch);
double categorical_kl(const CategoricalField& p, const CategoricalField& q);
LabelMap argmax_decode(const CategoricalField& field);
LabelMap sample_field(const CategoricalField& probs, RngStream& rng, bool deterministic = false);

}  // namespace sepaint::serial

#endif
