#include <cmath>

#include "doctest.h"
#include "sepaint/errors.hpp"
#include "sepaint/maskgen.hpp"

using namespace sepaint;

TEST_CASE("every family is a pure function of spec and size") {
    for (auto family : {MaskFamily::rect, MaskFamily::half, MaskFamily::speckle,
                        MaskFamily::strokes, MaskFamily::coverage}) {
        MaskSpec spec;
        spec.family = family;
        spec.seed = 1234;
        const Mask a = generate(spec, 24, 31);
        const Mask b = generate(spec, 24, 31);
        CHECK(a.known == b.known);
        spec.seed = 1235;
        if (family != MaskFamily::half) {  // fixed halves ignore the seed
            const Mask c = generate(spec, 24, 31);
            CHECK(a.known != c.known);
        }
    }
}

TEST_CASE("rect masks carve the requested amount") {
    MaskSpec spec;
    spec.family = MaskFamily::rect;
    spec.rect_count = 1;
    spec.rect_min_frac = 0.5;
    spec.rect_max_frac = 0.5;
    const Mask m = generate(spec, 20, 20);
    // one 10x10 rectangle out of 400 pixels
    CHECK(unknown_fraction(m) == doctest::Approx(0.25).epsilon(1e-12));

    int transitions = 0;  // the unknown region is a single solid rectangle
    for (int i = 0; i < 20; ++i) {
        int run = 0;
        for (int j = 0; j < 20; ++j) run += m.at(i, j) == 0;
        if (run != 0) {
            CHECK(run == 10);
            ++transitions;
        }
    }
    CHECK(transitions == 10);
}

TEST_CASE("half masks blank exactly one half") {
    MaskSpec spec;
    spec.family = MaskFamily::half;
    spec.half_side = 0;  // left
    const Mask left = generate(spec, 6, 9);
    for (int i = 0; i < 6; ++i)
        for (int j = 0; j < 9; ++j) CHECK(left.at(i, j) == (j < 4 ? 0 : 1));

    spec.half_side = 3;  // bottom
    const Mask bottom = generate(spec, 7, 5);
    for (int i = 0; i < 7; ++i)
        for (int j = 0; j < 5; ++j) CHECK(bottom.at(i, j) == (i >= 4 ? 0 : 1));

    spec.half_side = -1;  // seeded choice still yields one of the four halves
    spec.seed = 99;
    const Mask any = generate(spec, 8, 8);
    CHECK(unknown_fraction(any) == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("speckle density lands within binomial bounds") {
    MaskSpec spec;
    spec.family = MaskFamily::speckle;
    spec.known_rate = 0.05;
    spec.seed = 7;
    const Mask m = generate(spec, 100, 100);
    int known = 0;
    for (auto v : m.known) known += v;
    // Binomial(10000, 0.05): mean 500, sd ~21.8; allow 3 sigma.
    CHECK(known > 500 - 66);
    CHECK(known < 500 + 66);

    spec.known_rate = 1.0;
    CHECK(unknown_fraction(generate(spec, 10, 10)) == 0.0);
    spec.known_rate = 0.0;
    CHECK(unknown_fraction(generate(spec, 10, 10)) == 1.0);
}

TEST_CASE("strokes and coverage produce mixed masks") {
    MaskSpec spec;
    spec.family = MaskFamily::strokes;
    spec.seed = 3;
    const Mask s = generate(spec, 32, 32);
    const double fs = unknown_fraction(s);
    CHECK(fs > 0.0);
    CHECK(fs < 1.0);

    spec.family = MaskFamily::coverage;
    spec.walk_steps = 40;
    spec.footprint_radius = 3;
    const Mask c = generate(spec, 32, 32);
    const double fc = unknown_fraction(c);
    CHECK(fc > 0.0);
    CHECK(fc < 1.0);
}

TEST_CASE("unknown_fraction counts zeros") {
    Mask m(2, 3, 1);
    m.at(0, 0) = 0;
    m.at(1, 2) = 0;
    CHECK(unknown_fraction(m) == doctest::Approx(2.0 / 6.0).epsilon(1e-15));
}

TEST_CASE("invalid parameters are configuration errors") {
    MaskSpec spec;
    CHECK_THROWS_AS(generate(spec, 0, 8), ConfigError);
    CHECK_THROWS_AS(generate(spec, 8, -1), ConfigError);

    spec.family = MaskFamily::rect;
    spec.rect_count = 0;
    CHECK_THROWS_AS(generate(spec, 8, 8), ConfigError);
    spec.rect_count = 1;
    spec.rect_min_frac = 0.8;
    spec.rect_max_frac = 0.4;
    CHECK_THROWS_AS(generate(spec, 8, 8), ConfigError);

    spec = MaskSpec{};
    spec.family = MaskFamily::half;
    spec.half_side = 4;
    CHECK_THROWS_AS(generate(spec, 8, 8), ConfigError);

    spec = MaskSpec{};
    spec.family = MaskFamily::speckle;
    spec.known_rate = 1.5;
    CHECK_THROWS_AS(generate(spec, 8, 8), ConfigError);

    spec = MaskSpec{};
    spec.family = MaskFamily::strokes;
    spec.stroke_thickness = 0;
    CHECK_THROWS_AS(generate(spec, 8, 8), ConfigError);

    spec = MaskSpec{};
    spec.family = MaskFamily::coverage;
    spec.walk_steps = 0;
    CHECK_THROWS_AS(generate(spec, 8, 8), ConfigError);

    CHECK_THROWS_AS(mask_family_from_name("blob"), ConfigError);
    CHECK(mask_family_from_name("rect") == MaskFamily::rect);
    CHECK(mask_family_name(MaskFamily::coverage) == std::string("coverage"));
}
