// Kernel benchmark: OpenMP-parallel implementations vs the serial reference.
// Also times the denoiser forward pass at a few widths, which is the budget
// driver for inpainting runs.

#include <chrono>
#include <cstdio>
#include <functional>
#include <string>

#include "sepaint/catdiff.hpp"
#include "sepaint/dataio.hpp"
#include "sepaint/denoiser.hpp"
#include "sepaint/field.hpp"
#include "sepaint/rng.hpp"
#include "sepaint/sampler.hpp"
#include "sepaint/schedule.hpp"
#include "sepaint/serial_ref.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace {

double time_ms(const std::function<void()>& fn, int reps) {
    fn();  // warm up
    const auto start = std::chrono::steady_clock::now();
    for (int i = 0; i < reps; ++i) fn();
    const auto end = std::chrono::steady_clock::now();
    return std::chrono::duration<double, std::milli>(end - start).count() / reps;
}

void row(const std::string& name, double serial_ms, double parallel_ms) {
    std::printf("%-28s %10.3f %12.3f %9.2fx\n", name.c_str(), serial_ms, parallel_ms,
                parallel_ms > 0 ? serial_ms / parallel_ms : 0.0);
}

}  // namespace

int main() {
    using namespace sepaint;

#ifdef _OPENMP
    std::printf("OpenMP threads: %d\n\n", omp_get_max_threads());
#else
    std::printf("built without OpenMP; both columns run the same serial code\n\n");
#endif

    const int h = 128, w = 128, k = 8, T = 100;
    const NoiseSchedule sch = cosine_schedule(T);

    SynthSpec syn;
    syn.count = 1;
    syn.height = h;
    syn.width = w;
    syn.num_classes = 5;
    const LabelMap map = synth(syn)[0];
    const CategoricalField x0 = one_hot(map, k);
    const CategoricalField xt = marginal_probs(x0, T / 2, sch);

    std::printf("%dx%d, K=%d, T=%d\n", h, w, k, T);
    std::printf("%-28s %10s %12s %9s\n", "kernel", "serial ms", "parallel ms", "speedup");

    CategoricalField sink_f;
    LabelMap sink_m;
    double sink_d = 0.0;

    row("marginal_probs",
        time_ms([&] { sink_f = serial::marginal_probs(x0, T / 2, sch); }, 20),
        time_ms([&] { sink_f = marginal_probs(x0, T / 2, sch); }, 20));
    row("posterior_probs",
        time_ms([&] { sink_f = serial::posterior_probs(xt, x0, T / 2, sch); }, 20),
        time_ms([&] { sink_f = posterior_probs(xt, x0, T / 2, sch); }, 20));
    row("categorical_kl",
        time_ms([&] { sink_d += serial::categorical_kl(xt, x0); }, 20),
        time_ms([&] { sink_d += categorical_kl(xt, x0); }, 20));
    row("argmax_decode",
        time_ms([&] { sink_m = serial::argmax_decode(xt); }, 20),
        time_ms([&] { sink_m = argmax_decode(xt); }, 20));
    {
        RngStream rs(1), rp(1);
        row("sample_field",
            time_ms([&] { sink_m = serial::sample_field(xt, rs); }, 20),
            time_ms([&] { sink_m = sample_field(xt, rp); }, 20));
    }

    std::printf("\ndenoiser forward (32x32, K=5, float)\n");
    std::printf("%-28s %10s\n", "config", "ms/call");
    for (int ch : {8, 16, 24, 32, 48}) {
        DenoiserSpec spec;
        spec.num_classes = 5;
        spec.height = 32;
        spec.width = 32;
        spec.channels = ch;
        spec.blocks = 3;
        spec.time_embed_dim = 32;
        const DenoiserParams params = init_denoiser(spec, 7);
        SynthSpec s2 = syn;
        s2.height = 32;
        s2.width = 32;
        const CategoricalField x = one_hot(synth(s2)[0], 5);
        const double ms = time_ms([&] { sink_f = predict_x0(params, x, 10); }, 10);
        std::printf("C=%-3d blocks=3               %10.3f  (%zu params)\n", ch, ms,
                    spec.param_count());
    }
    (void)sink_d;
    return 0;
}
