#include <cmath>
#include <vector>

#include "doctest.h"
#include "sepaint/catdiff.hpp"
#include "sepaint/errors.hpp"
#include "sepaint/trainer.hpp"

using namespace sepaint;

namespace {

CategoricalField random_simplex(int h, int w, int k, std::uint64_t seed) {
    CategoricalField f(h, w, k);
    RngStream r(seed);
    for (std::size_t px = 0; px < f.pixel_count(); ++px) {
        double sum = 0.0;
        for (int c = 0; c < k; ++c) {
            f.probs[px * k + c] = r.next_uniform();
            sum += f.probs[px * k + c];
        }
        for (int c = 0; c < k; ++c) f.probs[px * k + c] /= sum;
    }
    return f;
}

LabelMap random_map(int h, int w, int k, std::uint64_t seed) {
    LabelMap m(h, w);
    RngStream r(seed);
    for (auto& v : m.labels)
        v = static_cast<std::int32_t>(r.next_uniform() * k) % k;
    return m;
}

std::vector<LabelMap> toy_dataset(int n, int h, int w, int k, std::uint64_t seed) {
    std::vector<LabelMap> out;
    out.reserve(n);
    for (int i = 0; i < n; ++i) out.push_back(random_map(h, w, k, seed + i));
    return out;
}

}  // namespace

TEST_CASE("KL loss value agrees with the generic KL of posteriors") {
    const NoiseSchedule sch = linear_schedule(8, 0.05, 0.3);
    const int t = 5, K = 4;
    const CategoricalField xt = one_hot(random_map(2, 3, K, 1), K);
    const CategoricalField x0 = one_hot(random_map(2, 3, K, 2), K);
    const CategoricalField s = random_simplex(2, 3, K, 3);

    const double direct = kl_loss_and_grad(xt, x0, s, t, sch, nullptr);
    const double generic =
        categorical_kl(posterior_probs(xt, x0, t, sch), posterior_probs(xt, s, t, sch));
    CHECK(direct == doctest::Approx(generic).epsilon(1e-12));
    CHECK(direct >= 0.0);
}

TEST_CASE("KL gradient with respect to the estimate matches finite differences") {
    const NoiseSchedule sch = cosine_schedule(16);
    const int K = 3;
    for (int t : {2, 7, 16}) {
        const CategoricalField xt = one_hot(random_map(2, 2, K, 10 + t), K);
        const CategoricalField x0 = one_hot(random_map(2, 2, K, 20 + t), K);
        CategoricalField s = random_simplex(2, 2, K, 30 + t);

        CategoricalField grad;
        kl_loss_and_grad(xt, x0, s, t, sch, &grad);
        for (std::size_t i = 0; i < s.probs.size(); ++i) {
            const double h = 1e-7;
            const double orig = s.probs[i];
            s.probs[i] = orig + h;
            const double fp = kl_loss_and_grad(xt, x0, s, t, sch, nullptr);
            s.probs[i] = orig - h;
            const double fm = kl_loss_and_grad(xt, x0, s, t, sch, nullptr);
            s.probs[i] = orig;
            const double fd = (fp - fm) / (2 * h);
            CHECK(grad.probs[i] == doctest::Approx(fd).epsilon(1e-5));
        }
    }
}

TEST_CASE("t=1 log-likelihood term and gradient") {
    const LabelMap x0 = random_map(3, 3, 4, 4);
    CategoricalField s = random_simplex(3, 3, 4, 5);
    CategoricalField grad;
    const double loss = l0_loss_and_grad(x0, s, &grad);

    double want = 0.0;
    for (std::size_t p = 0; p < x0.size(); ++p) want -= std::log(s.probs[p * 4 + x0.labels[p]]);
    CHECK(loss == doctest::Approx(want / 9.0).epsilon(1e-14));

    for (std::size_t i = 0; i < s.probs.size(); ++i) {
        const double h = 1e-7, orig = s.probs[i];
        s.probs[i] = orig + h;
        const double fp = l0_loss_and_grad(x0, s, nullptr);
        s.probs[i] = orig - h;
        const double fm = l0_loss_and_grad(x0, s, nullptr);
        s.probs[i] = orig;
        CHECK(grad.probs[i] == doctest::Approx((fp - fm) / (2 * h)).epsilon(1e-5));
    }
}

TEST_CASE("loss_step is a pure function of the stream position") {
    DenoiserSpec spec;
    spec.num_classes = 3;
    spec.height = 6;
    spec.width = 6;
    spec.channels = 4;
    spec.blocks = 1;
    spec.time_embed_dim = 4;
    const DenoiserParams params = init_denoiser(spec, 3);
    const NoiseSchedule sch = cosine_schedule(12);
    const std::vector<LabelMap> batch = toy_dataset(3, 6, 6, 3, 50);

    RngStream r1(9), r2(9);
    const LossResult a = loss_step(params, batch, sch, r1);
    const LossResult b = loss_step(params, batch, sch, r2);
    CHECK(a.loss == b.loss);
    CHECK(a.grad == b.grad);
    CHECK(r1.counter() == r2.counter());
    CHECK(r1.counter() == 3ULL * (1 + 6 * 6 * 3));
    CHECK(std::isfinite(a.loss));
    CHECK(a.loss >= 0.0);
    for (double g : a.grad) CHECK(std::isfinite(g));
}

TEST_CASE("the oracle denoiser scores zero and lower-bounds any model") {
    DenoiserSpec spec;
    spec.num_classes = 4;
    spec.height = 5;
    spec.width = 5;
    spec.channels = 4;
    spec.blocks = 1;
    spec.time_embed_dim = 4;
    const DenoiserParams params = init_denoiser(spec, 8);
    const NoiseSchedule sch = cosine_schedule(20);
    const std::vector<LabelMap> batch = toy_dataset(4, 5, 5, 4, 60);

    for (std::uint64_t seed : {1ULL, 2ULL, 3ULL, 4ULL, 5ULL}) {
        RngStream ro(seed), rm(seed);
        const double oracle = oracle_loss_step(spec, batch, sch, ro);
        const LossResult model = loss_step(params, batch, sch, rm, false);
        CHECK(oracle <= 1e-12);
        CHECK(oracle <= model.loss);
        CHECK(ro.counter() == rm.counter());  // same draw accounting
    }
}

TEST_CASE("hflip mirrors columns and is an involution") {
    const LabelMap m = random_map(4, 7, 5, 70);
    const LabelMap f = hflip(m);
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 7; ++j) CHECK(f.at(i, j) == m.at(i, 6 - j));
    CHECK(hflip(f) == m);
}

TEST_CASE("a short training run is deterministic and learns a little") {
    TrainConfig cfg;
    cfg.learning_rate = 5e-3;
    cfg.batch_size = 4;
    cfg.steps = 40;
    cfg.diffusion_steps = 10;
    cfg.seed = 11;
    cfg.num_classes = 3;
    cfg.channels = 6;
    cfg.blocks = 1;
    cfg.time_embed_dim = 8;
    cfg.optimizer = OptimizerKind::adam;
    // structured maps: left half class 0, right half class 2
    std::vector<LabelMap> data;
    for (int i = 0; i < 16; ++i) {
        LabelMap m(8, 8);
        for (int r = 0; r < 8; ++r)
            for (int c = 0; c < 8; ++c) m.at(r, c) = c < 4 ? 0 : 2;
        data.push_back(m);
    }

    const TrainResult a = train(cfg, data);
    const TrainResult b = train(cfg, data);
    CHECK(a.params.values == b.params.values);
    REQUIRE(a.log.size() == 40);

    double first = 0.0, last = 0.0;
    for (int i = 0; i < 10; ++i) {
        first += a.log[i].loss;
        last += a.log[30 + i].loss;
    }
    CHECK(last < first);  // smoothed loss moved down on a trivially learnable set

    int checkpoints = 0;
    TrainConfig cfg2 = cfg;
    cfg2.steps = 10;
    cfg2.checkpoint_every = 4;
    train(cfg2, data, [&](int, const DenoiserParams&, const NoiseSchedule&) { ++checkpoints; });
    CHECK(checkpoints == 2);

    // a generous stop threshold ends the run at the first window check
    TrainConfig cfg3 = cfg;
    cfg3.stop_loss_frac = 0.999;
    cfg3.stop_window = 5;
    const TrainResult stopped = train(cfg3, data);
    CHECK(stopped.log.size() < a.log.size());
    CHECK(stopped.log.size() >= 10);  // at least 2x the window
}

TEST_CASE("training validates its inputs") {
    TrainConfig cfg;
    CHECK_THROWS_AS(train(cfg, {}), ConfigError);
    cfg.batch_size = 0;
    CHECK_THROWS_AS(train(cfg, toy_dataset(2, 4, 4, 5, 1)), ConfigError);
    cfg.batch_size = 2;
    cfg.learning_rate = 0.0;
    CHECK_THROWS_AS(train(cfg, toy_dataset(2, 4, 4, 5, 1)), ConfigError);
    cfg.learning_rate = 1e-3;
    cfg.stop_loss_frac = 1.5;
    CHECK_THROWS_AS(train(cfg, toy_dataset(2, 4, 4, 5, 1)), ConfigError);
    cfg.stop_loss_frac = 0.5;
    cfg.stop_window = 0;
    CHECK_THROWS_AS(train(cfg, toy_dataset(2, 4, 4, 5, 1)), ConfigError);

    DenoiserSpec spec;
    spec.num_classes = 3;
    spec.height = 4;
    spec.width = 4;
    spec.channels = 4;
    spec.blocks = 1;
    spec.time_embed_dim = 4;
    const DenoiserParams params = init_denoiser(spec, 1);
    const NoiseSchedule sch = cosine_schedule(8);
    RngStream rng(1);
    std::vector<LabelMap> bad = {random_map(4, 4, 3, 2)};
    bad[0].labels[3] = 7;  // out of class range
    CHECK_THROWS_AS(loss_step(params, bad, sch, rng), DomainError);
    CHECK_THROWS_AS(loss_step(params, {}, sch, rng), DomainError);
    CHECK_THROWS_AS(loss_step(params, {random_map(3, 4, 3, 2)}, sch, rng), DomainError);
}
