#include "sepaint/trainer.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstddef>
#include <string>

#include "sepaint/catdiff.hpp"
#include "sepaint/errors.hpp"
#include "sepaint/sampler.hpp"

namespace sepaint {

namespace {

void check_batch(const std::vector<LabelMap>& batch, int h, int w, int k) {
    if (batch.empty()) throw DomainError("loss_step: empty batch");
    for (std::size_t i = 0; i < batch.size(); ++i) {
        const LabelMap& m = batch[i];
        if (m.height != h || m.width != w)
            throw DomainError("loss_step: batch item " + std::to_string(i) + " is " +
                              std::to_string(m.height) + "x" + std::to_string(m.width) +
                              ", model wants " + std::to_string(h) + "x" + std::to_string(w));
        for (std::int32_t v : m.labels)
            if (v < 0 || v >= k)
                throw DomainError("loss_step: batch item " + std::to_string(i) +
                                  " has label " + std::to_string(v) + " outside [0, " +
                                  std::to_string(k) + ")");
    }
}

int draw_t(double u, int T) { return 1 + std::min(static_cast<int>(u * T), T - 1); }

}  // namespace

double kl_loss_and_grad(const CategoricalField& x_t, const CategoricalField& x0_true,
                        const CategoricalField& s, int t, const NoiseSchedule& sch,
                        CategoricalField* grad_s) {
    if (!x_t.same_shape(x0_true) || !x_t.same_shape(s))
        throw DomainError("kl_loss_and_grad: shape mismatch");
    if (t < 2 || t > sch.steps())
        throw DomainError("kl_loss_and_grad: t must be in [2, T], got " + std::to_string(t));

    const int kc = x_t.num_classes;
    const std::size_t npix = x_t.pixel_count();
    const double alpha = sch.alpha(t);
    const double c = sch.alpha_bar(t - 1);
    const double ua = (1.0 - alpha) / kc;
    const double u = (1.0 - c) / kc;
    const double inv_npix = 1.0 / static_cast<double>(npix);

    if (grad_s) *grad_s = CategoricalField(x_t.height, x_t.width, kc);

    // Per pixel: a_k = alpha x_t + ua;  target p propto a * (c x0 + u);
    // model q propto g, g_k = a_k (c s_k + u).  All factors are strictly
    // positive at t >= 2 because c < 1 and alpha < 1.
    double total = 0.0;
#ifdef _OPENMP
#pragma omp parallel for reduction(+ : total) schedule(static)
#endif
    for (std::size_t px = 0; px < npix; ++px) {
        const double* xt = x_t.probs.data() + px * kc;
        const double* x0 = x0_true.probs.data() + px * kc;
        const double* sp = s.probs.data() + px * kc;

        double bsum = 0.0, gsum = 0.0;
        for (int k2 = 0; k2 < kc; ++k2) {
            const double a = alpha * xt[k2] + ua;
            bsum += a * (c * x0[k2] + u);
            gsum += a * (c * sp[k2] + u);
        }
        double acc = 0.0;
        double* gout = grad_s ? grad_s->probs.data() + px * kc : nullptr;
        for (int k2 = 0; k2 < kc; ++k2) {
            const double a = alpha * xt[k2] + ua;
            const double p = a * (c * x0[k2] + u) / bsum;
            const double g = a * (c * sp[k2] + u);
            const double q = g / gsum;
            if (p > 0.0) acc += p * (std::log(p) - std::log(std::max(q, kProbFloor)));
            if (gout) gout[k2] = c * a * (1.0 / gsum - p / g) * inv_npix;
        }
        total += acc;
    }
    return total * inv_npix;
}

double l0_loss_and_grad(const LabelMap& x0, const CategoricalField& s, CategoricalField* grad_s) {
    if (x0.height != s.height || x0.width != s.width)
        throw DomainError("l0_loss_and_grad: shape mismatch");
    const int kc = s.num_classes;
    const std::size_t npix = s.pixel_count();
    const double inv_npix = 1.0 / static_cast<double>(npix);

    if (grad_s) *grad_s = CategoricalField(s.height, s.width, kc);

    double total = 0.0;
#ifdef _OPENMP
#pragma omp parallel for reduction(+ : total) schedule(static)
#endif
    for (std::size_t px = 0; px < npix; ++px) {
        const std::int32_t lab = x0.labels[px];
        const double st = std::max(s.probs[px * kc + lab], kProbFloor);
        total += -std::log(st);
        if (grad_s) grad_s->probs[px * kc + lab] = -inv_npix / st;
    }
    return total * inv_npix;
}

LossResult loss_step(const DenoiserParams& params, const std::vector<LabelMap>& batch,
                     const NoiseSchedule& sch, RngStream& rng, bool with_grad) {
    const DenoiserSpec& spec = params.spec;
    check_batch(batch, spec.height, spec.width, spec.num_classes);

    const int n = static_cast<int>(batch.size());
    const int T = sch.steps();
    const std::uint64_t per_item =
        1 + static_cast<std::uint64_t>(spec.height) * spec.width * spec.num_classes;
    const UniformBlock block = rng.reserve(static_cast<std::uint64_t>(n) * per_item);
    const std::size_t pcount = spec.param_count();

    std::vector<double> losses(n, 0.0);
    std::vector<std::vector<double>> grads;
    if (with_grad) grads.resize(n);
    std::string error;

#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic)
#endif
    for (int i = 0; i < n; ++i) {
        try {
            const std::uint64_t base = static_cast<std::uint64_t>(i) * per_item;
            const int t = draw_t(block.at(base), T);
            const CategoricalField x0h = one_hot(batch[i], spec.num_classes);
            const CategoricalField marg = marginal_probs(x0h, t, sch);
            RngStream item_rng(block.seed, block.start + base + 1);
            const LabelMap xt = sample_field(marg, item_rng);
            const CategoricalField xth = one_hot(xt, spec.num_classes);

            DenoiserTrace<float> trace;
            const CategoricalField s =
                denoiser_forward<float>(params, xth, t, with_grad ? &trace : nullptr);

            CategoricalField gs;
            double li;
            if (t >= 2)
                li = kl_loss_and_grad(xth, x0h, s, t, sch, with_grad ? &gs : nullptr);
            else
                li = l0_loss_and_grad(batch[i], s, with_grad ? &gs : nullptr);
            if (!std::isfinite(li))
                throw DomainError("loss_step: non-finite loss at batch item " +
                                  std::to_string(i) + ", t = " + std::to_string(t));
            losses[i] = li;
            if (with_grad) grads[i] = denoiser_backward<float>(params, trace, gs);
        } catch (const std::exception& e) {
#ifdef _OPENMP
#pragma omp critical
#endif
            if (error.empty()) error = e.what();
        }
    }
    if (!error.empty()) throw DomainError(error);

    LossResult out;
    for (int i = 0; i < n; ++i) out.loss += losses[i];
    out.loss /= n;
    if (with_grad) {
        out.grad.assign(pcount, 0.0);
        const double inv_n = 1.0 / n;
        for (int i = 0; i < n; ++i)
            for (std::size_t j = 0; j < pcount; ++j) out.grad[j] += grads[i][j] * inv_n;
    }
    return out;
}

double oracle_loss_step(const DenoiserSpec& spec, const std::vector<LabelMap>& batch,
                        const NoiseSchedule& sch, RngStream& rng) {
    check_batch(batch, spec.height, spec.width, spec.num_classes);

    const int n = static_cast<int>(batch.size());
    const int T = sch.steps();
    const std::uint64_t per_item =
        1 + static_cast<std::uint64_t>(spec.height) * spec.width * spec.num_classes;
    const UniformBlock block = rng.reserve(static_cast<std::uint64_t>(n) * per_item);

    double total = 0.0;
    for (int i = 0; i < n; ++i) {
        const std::uint64_t base = static_cast<std::uint64_t>(i) * per_item;
        const int t = draw_t(block.at(base), T);
        const CategoricalField x0h = one_hot(batch[i], spec.num_classes);
        const CategoricalField marg = marginal_probs(x0h, t, sch);
        RngStream item_rng(block.seed, block.start + base + 1);
        const LabelMap xt = sample_field(marg, item_rng);
        const CategoricalField xth = one_hot(xt, spec.num_classes);

        // Perfect prediction: x0_hat = one-hot truth.
        if (t >= 2)
            total += kl_loss_and_grad(xth, x0h, x0h, t, sch, nullptr);
        else
            total += l0_loss_and_grad(batch[i], x0h, nullptr);
    }
    return total / n;
}

LabelMap hflip(const LabelMap& map) {
    LabelMap out(map.height, map.width);
    for (int i = 0; i < map.height; ++i)
        for (int j = 0; j < map.width; ++j) out.at(i, j) = map.at(i, map.width - 1 - j);
    return out;
}

TrainResult train(const TrainConfig& config, const std::vector<LabelMap>& dataset,
                  const CheckpointFn& on_checkpoint) {
    if (dataset.empty()) throw ConfigError("train: empty dataset");
    if (config.batch_size < 1) throw ConfigError("train: batch_size must be >= 1");
    if (config.steps < 1) throw ConfigError("train: steps must be >= 1");
    if (!(config.learning_rate > 0.0)) throw ConfigError("train: learning_rate must be > 0");
    if (config.stop_loss_frac < 0.0 || config.stop_loss_frac >= 1.0)
        throw ConfigError("train: stop_loss_frac must be in [0, 1)");
    if (config.stop_window < 1) throw ConfigError("train: stop_window must be >= 1");

    const int h = dataset[0].height;
    const int w = dataset[0].width;
    check_batch(dataset, h, w, config.num_classes);

    NoiseSchedule sch = config.schedule == ScheduleKind::cosine
                            ? cosine_schedule(config.diffusion_steps, config.cosine_s)
                            : linear_schedule(config.diffusion_steps, config.beta_start,
                                              config.beta_end);

    DenoiserSpec spec;
    spec.num_classes = config.num_classes;
    spec.height = h;
    spec.width = w;
    spec.channels = config.channels;
    spec.blocks = config.blocks;
    spec.time_embed_dim = config.time_embed_dim;

    TrainResult result{init_denoiser(spec, config.seed ^ 0x517cc1b727220a95ULL), sch, {}};
    const std::size_t pcount = spec.param_count();

    RngStream rng(config.seed);
    const std::size_t nd = dataset.size();

    // Optimizer state (double precision).
    std::vector<double> vel, adam_m, adam_v;
    if (config.optimizer == OptimizerKind::sgd_momentum)
        vel.assign(pcount, 0.0);
    else {
        adam_m.assign(pcount, 0.0);
        adam_v.assign(pcount, 0.0);
    }
    const double b1 = 0.9, b2 = 0.999, adam_eps = 1e-8;

    double initial_loss = 0.0;
    int high_streak = 0;
    const auto start = std::chrono::steady_clock::now();
    result.log.reserve(config.steps);

    for (int step = 1; step <= config.steps; ++step) {
        const UniformBlock sel = rng.reserve(2 * static_cast<std::uint64_t>(config.batch_size));
        std::vector<LabelMap> batch;
        batch.reserve(config.batch_size);
        for (int i = 0; i < config.batch_size; ++i) {
            const std::size_t idx = std::min(
                nd - 1, static_cast<std::size_t>(sel.at(2 * static_cast<std::uint64_t>(i)) * nd));
            const bool flip =
                config.augment_hflip && sel.at(2 * static_cast<std::uint64_t>(i) + 1) < 0.5;
            batch.push_back(flip ? hflip(dataset[idx]) : dataset[idx]);
        }

        const LossResult lr = loss_step(result.params, batch, sch, rng, true);

        // Linear learning-rate decay toward lr_final (constant when lr_final < 0).
        const double lr_to = config.lr_final < 0.0 ? config.learning_rate : config.lr_final;
        const double lr_frac = config.steps > 1 ? double(step - 1) / (config.steps - 1) : 0.0;
        const double step_lr = config.learning_rate + (lr_to - config.learning_rate) * lr_frac;

        if (config.optimizer == OptimizerKind::sgd_momentum) {
            for (std::size_t j = 0; j < pcount; ++j) {
                vel[j] = config.momentum * vel[j] - step_lr * lr.grad[j];
                result.params.values[j] =
                    static_cast<float>(result.params.values[j] + vel[j]);
            }
        } else {
            const double c1 = 1.0 - std::pow(b1, step);
            const double c2 = 1.0 - std::pow(b2, step);
            for (std::size_t j = 0; j < pcount; ++j) {
                adam_m[j] = b1 * adam_m[j] + (1.0 - b1) * lr.grad[j];
                adam_v[j] = b2 * adam_v[j] + (1.0 - b2) * lr.grad[j] * lr.grad[j];
                const double update = step_lr * (adam_m[j] / c1) /
                                      (std::sqrt(adam_v[j] / c2) + adam_eps);
                result.params.values[j] = static_cast<float>(result.params.values[j] - update);
            }
        }

        const double ms = std::chrono::duration<double, std::milli>(
                              std::chrono::steady_clock::now() - start)
                              .count();
        result.log.push_back({step, lr.loss, ms});

        if (step == 1) initial_loss = lr.loss;
        if (lr.loss > 10.0 * initial_loss && initial_loss > 0.0) {
            if (++high_streak >= 100)
                throw DomainError("train: diverged (loss " + std::to_string(lr.loss) +
                                  " > 10x initial " + std::to_string(initial_loss) +
                                  " for 100 consecutive steps, at step " +
                                  std::to_string(step) + ")");
        } else {
            high_streak = 0;
        }

        if (on_checkpoint && config.checkpoint_every > 0 && step % config.checkpoint_every == 0)
            on_checkpoint(step, result.params, sch);

        if (config.stop_loss_frac > 0.0 && step >= 2 * config.stop_window) {
            const int w = config.stop_window;
            double head = 0.0, tail = 0.0;
            for (int i = 0; i < w; ++i) {
                head += result.log[i].loss;
                tail += result.log[result.log.size() - 1 - i].loss;
            }
            if (tail < config.stop_loss_frac * head) break;
        }
    }
    return result;
}

}  // namespace sepaint
