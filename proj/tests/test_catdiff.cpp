#include <cmath>
#include <vector>

#include "doctest.h"
#include "sepaint/catdiff.hpp"
#include "sepaint/errors.hpp"
#include "sepaint/rng.hpp"
#include "sepaint/schedule.hpp"

using namespace sepaint;

namespace {

CategoricalField random_simplex_field(int h, int w, int k, std::uint64_t seed) {
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

}  // namespace

TEST_CASE("composed forward steps equal the closed-form marginal (small)") {
    const int T = 8, K = 3;
    const NoiseSchedule sch = cosine_schedule(T);
    CategoricalField x = random_simplex_field(2, 2, K, 31);
    CategoricalField composed = x;
    for (int t = 1; t <= T; ++t) {
        composed = forward_step_probs(composed, t, sch);
        const CategoricalField direct = marginal_probs(x, t, sch);
        for (std::size_t i = 0; i < composed.probs.size(); ++i)
            CHECK(composed.probs[i] == doctest::Approx(direct.probs[i]).epsilon(1e-12));
    }
}

TEST_CASE("posterior matches a hand-computed two-class example") {
    // beta = {0.1, 0.2}: alpha_2 = 0.8, alpha_bar_1 = 0.9. At t = 2 with
    // x_t = class 0, x0 = class 1:
    //   a = [0.8 + 0.1, 0.1] = [0.9, 0.1]
    //   b = [0.05, 0.9 + 0.05] = [0.05, 0.95]
    //   a.b = [0.045, 0.095], normalized = [9/28, 19/28]
    const NoiseSchedule sch(ScheduleKind::linear, {0.1, 0.2}, 0.1, 0.2);
    CategoricalField xt(1, 1, 2), x0(1, 1, 2);
    xt.probs = {1.0, 0.0};
    x0.probs = {0.0, 1.0};
    const CategoricalField post = posterior_probs(xt, x0, 2, sch);
    CHECK(post.probs[0] == doctest::Approx(9.0 / 28.0).epsilon(1e-14));
    CHECK(post.probs[1] == doctest::Approx(19.0 / 28.0).epsilon(1e-14));
}

TEST_CASE("posterior agrees with brute-force Bayes on one-hot pairs") {
    const int T = 12, K = 3;
    const NoiseSchedule sch = cosine_schedule(T);
    for (int t = 2; t <= T; ++t) {
        for (int ct = 0; ct < K; ++ct) {
            for (int c0 = 0; c0 < K; ++c0) {
                CategoricalField xt(1, 1, K), x0(1, 1, K);
                xt.probs[ct] = 1.0;
                x0.probs[c0] = 1.0;
                const CategoricalField post = posterior_probs(xt, x0, t, sch);

                // Bayes: P(x_{t-1}=j | x_t=ct, x0=c0)
                //   prop to q(x_t=ct | x_{t-1}=j) * q(x_{t-1}=j | x0=c0)
                std::vector<double> bayes(K);
                double z = 0.0;
                for (int j = 0; j < K; ++j) {
                    const double like = (1.0 - sch.beta(t)) * (j == ct ? 1.0 : 0.0) +
                                        sch.beta(t) / K;
                    const double prior = sch.alpha_bar(t - 1) * (j == c0 ? 1.0 : 0.0) +
                                         (1.0 - sch.alpha_bar(t - 1)) / K;
                    bayes[j] = like * prior;
                    z += bayes[j];
                }
                for (int j = 0; j < K; ++j)
                    CHECK(post.probs[j] == doctest::Approx(bayes[j] / z).epsilon(1e-13));
            }
        }
    }
}

TEST_CASE("t = 1 posterior collapses onto the clean estimate") {
    const NoiseSchedule sch = cosine_schedule(16);
    CategoricalField xt(1, 1, 4), x0(1, 1, 4);
    xt.probs[2] = 1.0;
    x0.probs[1] = 1.0;
    const CategoricalField post = posterior_probs(xt, x0, 1, sch);
    CHECK(post.probs[1] == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(is_simplex_field(post, 1e-12));
}

TEST_CASE("reverse_probs is the posterior with the estimate plugged in") {
    const NoiseSchedule sch = cosine_schedule(10);
    const CategoricalField xt = random_simplex_field(3, 2, 4, 5);
    const CategoricalField hat = random_simplex_field(3, 2, 4, 6);
    const CategoricalField a = reverse_probs(xt, hat, 5, sch);
    const CategoricalField b = posterior_probs(xt, hat, 5, sch);
    CHECK(a.probs == b.probs);
}

TEST_CASE("marginals and posteriors stay on the simplex") {
    const NoiseSchedule sch = cosine_schedule(64);
    const CategoricalField x0 = random_simplex_field(4, 4, 5, 77);
    const CategoricalField xt = random_simplex_field(4, 4, 5, 78);
    for (int t : {1, 2, 17, 63, 64}) {
        CHECK(is_simplex_field(marginal_probs(x0, t, sch), 1e-12));
        CHECK(is_simplex_field(forward_step_probs(x0, t, sch), 1e-12));
        CHECK(is_simplex_field(posterior_probs(xt, x0, t, sch), 1e-12));
    }
}

TEST_CASE("categorical KL: hand values, zero case, and p-support convention") {
    CategoricalField p(1, 2, 2), q(1, 2, 2);
    // pixel 0: p = [1, 0] vs q = [0.5, 0.5] -> log 2
    p.probs = {1.0, 0.0, 0.75, 0.25};
    q.probs = {0.5, 0.5, 0.5, 0.5};
    const double want1 = std::log(2.0);
    const double want2 = 0.75 * std::log(1.5) + 0.25 * std::log(0.5);
    CHECK(categorical_kl(p, q) == doctest::Approx(0.5 * (want1 + want2)).epsilon(1e-14));

    CHECK(categorical_kl(q, q) == 0.0);

    // q = 0 where p > 0 hits the floor rather than producing inf
    CategoricalField q2 = q;
    q2.probs = {0.0, 1.0, 0.5, 0.5};
    const double v = categorical_kl(p, q2);
    CHECK(std::isfinite(v));
    CHECK(v > 0.0);
}

TEST_CASE("domain validation") {
    const NoiseSchedule sch = cosine_schedule(4);
    const CategoricalField f = random_simplex_field(1, 1, 2, 1);
    CHECK_THROWS_AS(marginal_probs(f, 0, sch), DomainError);
    CHECK_THROWS_AS(marginal_probs(f, 5, sch), DomainError);
    CHECK_THROWS_AS(forward_step_probs(f, -1, sch), DomainError);
    const CategoricalField g = random_simplex_field(1, 2, 2, 1);
    CHECK_THROWS_AS(posterior_probs(f, g, 2, sch), DomainError);
    CHECK_THROWS_AS(categorical_kl(f, g), DomainError);
}
