#ifndef SEPAINT_INPAINT_HPP
#define SEPAINT_INPAINT_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "sepaint/denoiser.hpp"
#include "sepaint/field.hpp"
#include "sepaint/rng.hpp"
#include "sepaint/schedule.hpp"

namespace sepaint {

enum class Strategy { lb_con, seq_con };

const char* strategy_name(Strategy s);
Strategy strategy_from_name(const std::string& name);

struct InpaintConfig {
    Strategy strategy = Strategy::lb_con;
    int lookbacks = 1;    // r, per-step look-back repetitions (lb_con only)
    int num_samples = 1;  // S
    bool paste_known = true;
    std::uint64_t seed = 0;
};

/// Mask merge: known pixels (M = 1) taken from y, unknown (M = 0) from x.
LabelMap merge(const LabelMap& x, const LabelMap& y, const Mask& m);

/// Sequential conditioning: reverse chain from uniform noise; after each
/// reverse step below T-1, the known region is overwritten with a noised
/// version of y0 at the current level. Equals lb_con with r = 0 (same code
/// path, bit for bit).
LabelMap seq_con(const DenoiserParams& params, const LabelMap& y0, const Mask& mask,
                 const NoiseSchedule& sch, RngStream& rng, bool paste_known = true);

/// Look-back conditioning: seq_con plus, per step t <= T-2 and repeated r
/// times, a refinement pass [merge noised known region -> one forward
/// "look-back" step to level t+1 -> reverse-sample level t again]. The final
/// per-step merge then carries the conditioned map down the chain. All
/// sampling in loop iterations t <= 1 is deterministic (argmax).
LabelMap lb_con(const DenoiserParams& params, const LabelMap& y0, const Mask& mask,
                const NoiseSchedule& sch, RngStream& rng, int lookbacks = 1,
                bool paste_known = true);

/// Per-pixel scalar in [0, 1].
struct UncertaintyMap {
    int height = 0;
    int width = 0;
    std::vector<double> values;

    UncertaintyMap() = default;
    UncertaintyMap(int h, int w)
        : height(h), width(w), values(static_cast<std::size_t>(h) * w, 0.0) {}

    double at(int i, int j) const { return values[static_cast<std::size_t>(i) * width + j]; }
};

struct MultiSampleResult {
    std::vector<LabelMap> samples;
    UncertaintyMap uncertainty;
};

/// Per-pixel entropy of the empirical class histogram across samples,
/// normalized by log num_classes. Identically zero for a single sample or a
/// single class.
UncertaintyMap vote_entropy(const std::vector<LabelMap>& samples, int num_classes);

/// S independent chains with seeds seed+0 .. seed+S-1; uncertainty is the
/// per-pixel entropy of the empirical class histogram across samples,
/// normalized by log K (0 = all samples agree, 1 = uniform disagreement).
MultiSampleResult multi_sample(const DenoiserParams& params, const LabelMap& y0, const Mask& mask,
                               const NoiseSchedule& sch, int num_samples, std::uint64_t seed,
                               int lookbacks = 1, bool paste_known = true);

/// Config-driven single-map entry point used by the CLI (seq_con ignores
/// lookbacks). Returns the first sample when num_samples = 1; callers wanting
/// S > 1 plus uncertainty use multi_sample.
LabelMap run_inpaint(const DenoiserParams& params, const LabelMap& y0, const Mask& mask,
                     const NoiseSchedule& sch, const InpaintConfig& config);

}  // namespace sepaint

#endif
