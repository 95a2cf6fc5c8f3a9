#include "sepaint/inpaint.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "sepaint/catdiff.hpp"
#include "sepaint/errors.hpp"
#include "sepaint/sampler.hpp"

namespace sepaint {

const char* strategy_name(Strategy s) { return s == Strategy::lb_con ? "lb" : "seq"; }

Strategy strategy_from_name(const std::string& name) {
    if (name == "lb" || name == "lb_con") return Strategy::lb_con;
    if (name == "seq" || name == "seq_con") return Strategy::seq_con;
    throw ConfigError("unknown strategy '" + name + "' (expected lb or seq)");
}

LabelMap merge(const LabelMap& x, const LabelMap& y, const Mask& m) {
    if (x.height != y.height || x.width != y.width || x.height != m.height ||
        x.width != m.width)
        throw DomainError("merge: shape mismatch");
    LabelMap out = x;
    for (std::size_t p = 0; p < out.labels.size(); ++p)
        if (m.known[p]) out.labels[p] = y.labels[p];
    return out;
}

namespace {

/// One reverse step: sample the level-`target` map given the level-
/// (`target`+1) map. Deterministic draws no uniforms.
LabelMap reverse_sample(const DenoiserParams& params, const LabelMap& x, int level,
                        const NoiseSchedule& sch, RngStream& rng, bool det) {
    const CategoricalField xh = one_hot(x, params.spec.num_classes);
    const CategoricalField x0_hat = predict_x0(params, xh, level);
    const CategoricalField probs = reverse_probs(xh, x0_hat, level, sch);
    return sample_field(probs, rng, det);
}

/// Known map noised to level t (Eq. 17). At t = 0, and under the
/// deterministic convention, this is exactly y0: the marginal argmax is the
/// true class whenever alpha_bar > 0, which the schedule guarantees.
LabelMap noisy_known(const LabelMap& y0, int t, const NoiseSchedule& sch, RngStream& rng,
                     bool det, int k) {
    if (t == 0 || det) return y0;
    const CategoricalField probs = marginal_probs(one_hot(y0, k), t, sch);
    return sample_field(probs, rng, false);
}

/// The look-back: one forward transition applied to the merged map. beta is
/// indexed at max(t, 1); at t = 0 the step is deterministic and the argmax is
/// the input map for any beta < 1, so the clamp cannot change the result.
LabelMap lookback_sample(const LabelMap& m, int t, const NoiseSchedule& sch, RngStream& rng,
                         bool det, int k) {
    const CategoricalField probs = forward_step_probs(one_hot(m, k), std::max(t, 1), sch);
    return sample_field(probs, rng, det);
}

LabelMap engine(const DenoiserParams& params, const LabelMap& y0, const Mask& mask,
                const NoiseSchedule& sch, RngStream& rng, int lookbacks, bool paste_known) {
    if (lookbacks < 0) throw DomainError("inpaint: lookbacks must be >= 0");
    if (y0.height != mask.height || y0.width != mask.width)
        throw DomainError("inpaint: mask shape does not match the map");
    const int k = params.spec.num_classes;
    const int T = sch.steps();

    // x_T ~ uniform over classes.
    const CategoricalField uniform(y0.height, y0.width, k, 1.0 / k);
    LabelMap x = sample_field(uniform, rng);

    for (int t = T - 1; t >= 0; --t) {
        const bool det = t <= 1;
        x = reverse_sample(params, x, t + 1, sch, rng, det);
        if (t > T - 2) continue;  // the first step down from x_T is bare
        for (int rep = 0; rep < lookbacks; ++rep) {
            const LabelMap m = merge(x, noisy_known(y0, t, sch, rng, det, k), mask);
            const LabelMap xl = lookback_sample(m, t, sch, rng, det, k);
            x = reverse_sample(params, xl, t + 1, sch, rng, det);
        }
        x = merge(x, noisy_known(y0, t, sch, rng, det, k), mask);
    }
    if (paste_known) x = merge(x, y0, mask);
    return x;
}

}  // namespace

LabelMap seq_con(const DenoiserParams& params, const LabelMap& y0, const Mask& mask,
                 const NoiseSchedule& sch, RngStream& rng, bool paste_known) {
    return engine(params, y0, mask, sch, rng, 0, paste_known);
}

LabelMap lb_con(const DenoiserParams& params, const LabelMap& y0, const Mask& mask,
                const NoiseSchedule& sch, RngStream& rng, int lookbacks, bool paste_known) {
    return engine(params, y0, mask, sch, rng, lookbacks, paste_known);
}

UncertaintyMap vote_entropy(const std::vector<LabelMap>& samples, int num_classes) {
    if (samples.empty()) throw DomainError("vote_entropy: no samples");
    if (num_classes < 1) throw DomainError("vote_entropy: num_classes must be >= 1");
    const int h0 = samples[0].height, w0 = samples[0].width;
    UncertaintyMap out(h0, w0);
    const std::size_t n = samples.size();
    for (const LabelMap& s : samples) {
        if (s.height != h0 || s.width != w0) throw DomainError("vote_entropy: shape mismatch");
        for (std::int32_t v : s.labels)
            if (v < 0 || v >= num_classes)
                throw DomainError("vote_entropy: label out of class range");
    }
    if (num_classes < 2 || n < 2) return out;  // entropy is identically zero

    const double inv_logk = 1.0 / std::log(static_cast<double>(num_classes));
    std::vector<int> counts(num_classes);
    for (std::size_t p = 0; p < out.values.size(); ++p) {
        std::fill(counts.begin(), counts.end(), 0);
        for (const LabelMap& s : samples) ++counts[s.labels[p]];
        double h = 0.0;
        for (int c : counts)
            if (c > 0) {
                const double f = static_cast<double>(c) / static_cast<double>(n);
                h -= f * std::log(f);
            }
        out.values[p] = h * inv_logk;
    }
    return out;
}

MultiSampleResult multi_sample(const DenoiserParams& params, const LabelMap& y0,
                               const Mask& mask, const NoiseSchedule& sch, int num_samples,
                               std::uint64_t seed, int lookbacks, bool paste_known) {
    if (num_samples < 1) throw DomainError("multi_sample: need at least one sample");
    MultiSampleResult out;
    out.samples.resize(num_samples);
    for (int s = 0; s < num_samples; ++s) {
        RngStream rng(seed + static_cast<std::uint64_t>(s));
        out.samples[s] = engine(params, y0, mask, sch, rng, lookbacks, paste_known);
    }
    out.uncertainty = vote_entropy(out.samples, params.spec.num_classes);
    return out;
}

LabelMap run_inpaint(const DenoiserParams& params, const LabelMap& y0, const Mask& mask,
                     const NoiseSchedule& sch, const InpaintConfig& config) {
    RngStream rng(config.seed);
    const int r = config.strategy == Strategy::seq_con ? 0 : config.lookbacks;
    return engine(params, y0, mask, sch, rng, r, config.paste_known);
}

}  // namespace sepaint
