#ifndef SEPAINT_TRAINER_HPP
#define SEPAINT_TRAINER_HPP

#include <cstdint>
#include <functional>
#include <vector>

#include "sepaint/denoiser.hpp"
#include "sepaint/field.hpp"
#include "sepaint/rng.hpp"
#include "sepaint/schedule.hpp"

namespace sepaint {

enum class OptimizerKind { sgd_momentum, adam };

struct TrainConfig {
    double learning_rate = 1e-4;
    double lr_final = -1.0;  // < 0: constant LR; else decay linearly to this
    int batch_size = 16;
    int steps = 5000;
    int diffusion_steps = 200;
    ScheduleKind schedule = ScheduleKind::cosine;
    double cosine_s = 0.008;
    double beta_start = 1e-4;
    double beta_end = 0.02;
    bool augment_hflip = true;
    std::uint64_t seed = 0;
    int checkpoint_every = 0;  // 0 = never

    // Early stop: end training once the trailing `stop_window`-step mean loss
    // falls below stop_loss_frac x the mean over the first stop_window steps.
    // 0 disables.
    double stop_loss_frac = 0.0;
    int stop_window = 20;

    OptimizerKind optimizer = OptimizerKind::sgd_momentum;
    double momentum = 0.9;

    int num_classes = 5;
    int channels = 32;
    int blocks = 3;
    int time_embed_dim = 32;
};

struct LossResult {
    double loss = 0.0;
    std::vector<double> grad;  // empty when gradients were not requested
};

/// KL(posterior(x_t, x0_true) || posterior(x_t, s)) averaged over pixels,
/// with the analytic gradient with respect to the denoiser output s when
/// grad_s is non-null. Requires 2 <= t <= T. Exposed for gradient tests.
double kl_loss_and_grad(const CategoricalField& x_t, const CategoricalField& x0_true,
                        const CategoricalField& s, int t, const NoiseSchedule& sch,
                        CategoricalField* grad_s);

/// The t = 1 term: mean over pixels of -log s[true label], with d/ds.
double l0_loss_and_grad(const LabelMap& x0, const CategoricalField& s, CategoricalField* grad_s);

/// One stochastic estimate of the training objective on a batch: per item,
/// draw t uniform in {1..T}, sample x_t from the closed-form marginal, run
/// the denoiser, and score the posterior KL (t >= 2) or the per-pixel
/// negative log-likelihood of the clean labels (t = 1). Loss is the mean
/// over the batch; gradients are averaged in fixed item order.
///
/// Draw layout: one block of batch*(1 + H*W*K) uniforms, item i starting at
/// i*(1 + H*W*K) with the t draw first.
LossResult loss_step(const DenoiserParams& params, const std::vector<LabelMap>& batch,
                     const NoiseSchedule& sch, RngStream& rng, bool with_grad = true);

/// Same draws, but with the denoiser output replaced by the true one-hot
/// x0 (the oracle). Lower-bounds any model's loss on the same draws.
double oracle_loss_step(const DenoiserSpec& spec, const std::vector<LabelMap>& batch,
                        const NoiseSchedule& sch, RngStream& rng);

struct StepLog {
    int step;
    double loss;
    double wall_ms;
};

struct TrainResult {
    DenoiserParams params;
    NoiseSchedule schedule;
    std::vector<StepLog> log;
};

using CheckpointFn = std::function<void(int step, const DenoiserParams&, const NoiseSchedule&)>;

/// Full training loop: seeded batch selection with replacement, optional
/// horizontal-flip augmentation (probability 0.5 per item), optimizer update
/// per step. Aborts when the loss stays above 10x its initial value for 100
/// consecutive steps or turns non-finite.
TrainResult train(const TrainConfig& config, const std::vector<LabelMap>& dataset,
                  const CheckpointFn& on_checkpoint = nullptr);

/// Mirror a map left-right (the augmentation transform).
LabelMap hflip(const LabelMap& map);

}  // namespace sepaint

#endif
