#include <cmath>
#include <vector>

#include "doctest.h"
#include "sepaint/errors.hpp"
#include "sepaint/inpaint.hpp"
#include "sepaint/maskgen.hpp"

using namespace sepaint;

namespace {

DenoiserParams micro_model(int k = 4, int h = 8, int w = 8, std::uint64_t seed = 7) {
    DenoiserSpec spec;
    spec.num_classes = k;
    spec.height = h;
    spec.width = w;
    spec.channels = 4;
    spec.blocks = 1;
    spec.time_embed_dim = 4;
    return init_denoiser(spec, seed);
}

LabelMap checkerboard(int h, int w, int k) {
    LabelMap m(h, w);
    for (int i = 0; i < h; ++i)
        for (int j = 0; j < w; ++j) m.at(i, j) = (i + j) % k;
    return m;
}

Mask rect_mask(int h, int w, int i0, int j0, int i1, int j1) {
    Mask m(h, w, 1);
    for (int i = i0; i < i1; ++i)
        for (int j = j0; j < j1; ++j) m.at(i, j) = 0;
    return m;
}

}  // namespace

TEST_CASE("merge takes known pixels from y and unknown from x") {
    LabelMap x(1, 2), y(1, 2);
    x.labels = {7, 4};
    y.labels = {3, 9};
    Mask m(1, 2);
    m.known = {1, 0};
    const LabelMap out = merge(x, y, m);
    CHECK(out.labels == std::vector<std::int32_t>{3, 4});

    Mask all_known(1, 2, 1), none_known(1, 2, 0);
    CHECK(merge(x, y, all_known) == y);
    CHECK(merge(x, y, none_known) == x);

    Mask bad(2, 2);
    CHECK_THROWS_AS(merge(x, y, bad), DomainError);
}

TEST_CASE("inpainting is deterministic for a fixed seed") {
    const DenoiserParams params = micro_model();
    const NoiseSchedule sch = cosine_schedule(20);
    const LabelMap y0 = checkerboard(8, 8, 4);
    const Mask mask = rect_mask(8, 8, 2, 2, 6, 6);

    RngStream r1(42), r2(42), r3(43);
    const LabelMap a = lb_con(params, y0, mask, sch, r1, 1);
    const LabelMap b = lb_con(params, y0, mask, sch, r2, 1);
    CHECK(a == b);
    CHECK(r1.counter() == r2.counter());
    // a different seed gives a different unknown region (overwhelmingly likely)
    const LabelMap c = lb_con(params, y0, mask, sch, r3, 1);
    CHECK(a != c);
}

TEST_CASE("lb_con with zero look-backs is bitwise identical to seq_con") {
    const DenoiserParams params = micro_model(3, 6, 10, 9);
    const NoiseSchedule sch = cosine_schedule(15);
    for (std::uint64_t seed = 0; seed < 6; ++seed) {
        MaskSpec ms;
        ms.family = MaskFamily::rect;
        ms.seed = seed;
        const Mask mask = generate(ms, 6, 10);
        const LabelMap y0 = checkerboard(6, 10, 3);
        RngStream ra(seed), rb(seed);
        const LabelMap a = lb_con(params, y0, mask, sch, ra, 0);
        const LabelMap b = seq_con(params, y0, mask, sch, rb);
        CHECK(a == b);
        CHECK(ra.counter() == rb.counter());
    }
}

TEST_CASE("known pixels survive exactly when pasting is on") {
    const DenoiserParams params = micro_model(5, 10, 10, 3);
    const NoiseSchedule sch = cosine_schedule(12);
    const LabelMap y0 = checkerboard(10, 10, 5);
    for (auto family : {MaskFamily::rect, MaskFamily::half, MaskFamily::speckle,
                        MaskFamily::strokes, MaskFamily::coverage}) {
        MaskSpec ms;
        ms.family = family;
        ms.seed = 77;
        const Mask mask = generate(ms, 10, 10);
        RngStream rng(5);
        const LabelMap out = lb_con(params, y0, mask, sch, rng, 2);
        for (std::size_t p = 0; p < mask.known.size(); ++p)
            if (mask.known[p]) CHECK(out.labels[p] == y0.labels[p]);
    }
}

TEST_CASE("more look-backs consume more randomness") {
    const DenoiserParams params = micro_model();
    const NoiseSchedule sch = cosine_schedule(10);
    const LabelMap y0 = checkerboard(8, 8, 4);
    const Mask mask = rect_mask(8, 8, 0, 0, 4, 8);

    std::uint64_t prev = 0;
    for (int r = 0; r < 3; ++r) {
        RngStream rng(1);
        (void)lb_con(params, y0, mask, sch, rng, r);
        if (r > 0) CHECK(rng.counter() > prev);
        prev = rng.counter();
    }
    RngStream rng(1);
    CHECK_THROWS_AS(lb_con(params, y0, mask, sch, rng, -1), DomainError);
}

TEST_CASE("vote entropy matches the two-class example") {
    // votes {0, 0, 1, 1} over K = 2: a perfect split has entropy log 2,
    // normalized to exactly 1.
    std::vector<LabelMap> samples(4, LabelMap(1, 2));
    samples[0].labels = {0, 0};
    samples[1].labels = {0, 0};
    samples[2].labels = {1, 0};
    samples[3].labels = {1, 0};
    const UncertaintyMap u = vote_entropy(samples, 2);
    CHECK(u.at(0, 0) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(u.at(0, 1) == 0.0);

    // 3-of-4 agreement over K = 4: -(3/4 log 3/4 + 1/4 log 1/4) / log 4
    samples[2].labels = {0, 0};
    samples[3].labels = {3, 0};
    const UncertaintyMap v = vote_entropy(samples, 4);
    const double want =
        -(0.75 * std::log(0.75) + 0.25 * std::log(0.25)) / std::log(4.0);
    CHECK(v.at(0, 0) == doctest::Approx(want).epsilon(1e-12));

    CHECK_THROWS_AS(vote_entropy({}, 2), DomainError);
    CHECK_THROWS_AS(vote_entropy(samples, 2), DomainError);  // label 3 out of range
    samples[1] = LabelMap(2, 2);
    CHECK_THROWS_AS(vote_entropy(samples, 4), DomainError);
}

TEST_CASE("multi-sample uncertainty is zero on known pixels and for S = 1") {
    const DenoiserParams params = micro_model(4, 8, 8, 11);
    const NoiseSchedule sch = cosine_schedule(16);
    const LabelMap y0 = checkerboard(8, 8, 4);
    const Mask mask = rect_mask(8, 8, 0, 0, 8, 4);  // left half unknown

    const MultiSampleResult one = multi_sample(params, y0, mask, sch, 1, 3);
    REQUIRE(one.samples.size() == 1);
    for (double v : one.uncertainty.values) CHECK(v == 0.0);

    const MultiSampleResult many = multi_sample(params, y0, mask, sch, 6, 3);
    REQUIRE(many.samples.size() == 6);
    for (std::size_t p = 0; p < mask.known.size(); ++p) {
        if (mask.known[p]) CHECK(many.uncertainty.values[p] == 0.0);
        CHECK(many.uncertainty.values[p] >= 0.0);
        CHECK(many.uncertainty.values[p] <= 1.0 + 1e-12);
    }
    // chains are independent: the first sample equals a lone run at seed+0
    RngStream rng(3);
    CHECK(many.samples[0] == lb_con(params, y0, mask, sch, rng, 1));

    CHECK_THROWS_AS(multi_sample(params, y0, mask, sch, 0, 3), DomainError);
}

TEST_CASE("run_inpaint dispatches on strategy") {
    const DenoiserParams params = micro_model(3, 6, 6, 2);
    const NoiseSchedule sch = cosine_schedule(10);
    const LabelMap y0 = checkerboard(6, 6, 3);
    const Mask mask = rect_mask(6, 6, 1, 1, 5, 5);

    InpaintConfig cfg;
    cfg.seed = 19;
    cfg.strategy = Strategy::seq_con;
    cfg.lookbacks = 5;  // must be ignored for seq_con
    const LabelMap via_config = run_inpaint(params, y0, mask, sch, cfg);
    RngStream rng(19);
    CHECK(via_config == seq_con(params, y0, mask, sch, rng));

    cfg.strategy = Strategy::lb_con;
    cfg.lookbacks = 2;
    RngStream rng2(19);
    CHECK(run_inpaint(params, y0, mask, sch, cfg) ==
          lb_con(params, y0, mask, sch, rng2, 2));
}

TEST_CASE("strategy names round-trip") {
    CHECK(strategy_from_name("lb") == Strategy::lb_con);
    CHECK(strategy_from_name("lb_con") == Strategy::lb_con);
    CHECK(strategy_from_name("seq") == Strategy::seq_con);
    CHECK(strategy_from_name("seq_con") == Strategy::seq_con);
    CHECK(strategy_name(Strategy::lb_con) == std::string("lb"));
    CHECK(strategy_name(Strategy::seq_con) == std::string("seq"));
    CHECK_THROWS_AS(strategy_from_name("bogus"), ConfigError);
}

TEST_CASE("shape mismatches are rejected") {
    const DenoiserParams params = micro_model();
    const NoiseSchedule sch = cosine_schedule(8);
    const LabelMap y0 = checkerboard(8, 8, 4);
    Mask wrong(4, 8);
    RngStream rng(0);
    CHECK_THROWS_AS(seq_con(params, y0, wrong, sch, rng), DomainError);
}
