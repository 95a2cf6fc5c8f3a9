#ifndef SEPAINT_SAMPLER_HPP
#define SEPAINT_SAMPLER_HPP

#include <span>

#include "sepaint/field.hpp"
#include "sepaint/rng.hpp"

namespace sepaint {

/// Gumbel-Max draw: argmax_i(log p_i - log(-log eps_i)). Exact Categorical(p)
/// sampling for i.i.d. uniform eps. p may be unnormalized; eps values are
/// clamped into (0, 1). Ties go to the lowest index.
int gumbel_max(std::span<const double> p, std::span<const double> eps);

/// Per-pixel plain argmax, ties to the lowest class index. Consumes no draws.
/// This is the "{eps_i} = 0" final-step convention: equal Gumbel noise on all
/// classes reduces the argmax to the argmax of p itself.
LabelMap argmax_field(const CategoricalField& probs);

/// Per-pixel Gumbel-Max over the field. Reserves height*width*K draws from
/// the stream in one block; pixel (i, j) uses draws [(i*W + j)*K, ... + K),
/// i.e. row-major per pixel, K uniforms per call. With deterministic = true
/// no draws are consumed and the result is argmax_field(probs).
LabelMap sample_field(const CategoricalField& probs, RngStream& rng, bool deterministic = false);

}  // namespace sepaint

#endif
