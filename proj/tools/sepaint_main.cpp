// sepaint: categorical-diffusion semantic-map inpainting toolkit.
//
// Subcommands: synth, train, sample, inpaint, maskgen, baseline, eval,
// ablate. Every run writes a reproducibility manifest beside its outputs;
// identical manifests produce identical artifacts. Progress goes to stderr,
// data to stdout or files. Exit codes: 0 success, 1 domain/format error,
// 2 usage error.

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "sepaint/baselines.hpp"
#include "sepaint/dataio.hpp"
#include "sepaint/errors.hpp"
#include "sepaint/inpaint.hpp"
#include "sepaint/maskgen.hpp"
#include "sepaint/metrics.hpp"
#include "sepaint/trainer.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace sepaint;

namespace {

constexpr const char* kVersion = "v1.0.0";

std::string out_base() {
    const char* env = std::getenv("SEPAINT_OUT_DIR");
    return env && *env ? std::string(env) : std::string(".");
}

/// --out left empty means "default name under the default output directory".
std::string resolve_out(const std::string& given, const std::string& fallback_name) {
    if (!given.empty()) return given;
    return (fs::path(out_base()) / fallback_name).string();
}

void ensure_parent_dir(const std::string& path) {
    const fs::path parent = fs::path(path).parent_path();
    if (!parent.empty()) fs::create_directories(parent);
}

void write_manifest(const std::string& path, const std::string& command, std::uint64_t seed,
                    const json& config) {
    const json j{{"command", command}, {"version", kVersion}, {"seed", seed},
                 {"config", config}};
    ensure_parent_dir(path);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw FormatError("cannot open " + path + " for writing", 0);
    out << j.dump(2) << "\n";
}

std::string numbered(const std::string& path, int index, int width = 2) {
    const fs::path p(path);
    char buf[32];
    std::snprintf(buf, sizeof buf, "_%0*d", width, index);
    return (p.parent_path() / (p.stem().string() + buf + p.extension().string())).string();
}

/// All *.smap files in a directory, sorted by name; every map must share one
/// shape. Returns the smallest class count covering every file.
std::vector<LabelMap> load_dataset(const std::string& dir, int* k_out) {
    std::vector<fs::path> paths;
    if (!fs::is_directory(dir)) throw DomainError("dataset directory not found: " + dir);
    for (const auto& e : fs::directory_iterator(dir))
        if (e.is_regular_file() && e.path().extension() == ".smap") paths.push_back(e.path());
    std::sort(paths.begin(), paths.end());
    if (paths.empty()) throw DomainError("no .smap files in " + dir);

    std::vector<LabelMap> maps;
    maps.reserve(paths.size());
    int k = 0;
    for (const fs::path& p : paths) {
        int file_k = 0;
        maps.push_back(read_smap(p.string(), &file_k));
        k = std::max(k, file_k);
        if (maps.back().height != maps[0].height || maps.back().width != maps[0].width)
            throw DomainError("dataset shapes differ: " + p.string());
    }
    if (k_out) *k_out = k;
    return maps;
}

int derive_classes(const LabelMap& a, const LabelMap& b) {
    std::int32_t m = 0;
    for (auto v : a.labels) m = std::max(m, v);
    for (auto v : b.labels) m = std::max(m, v);
    return static_cast<int>(m) + 1;
}

void print_report(const EvalReport& r) {
    std::printf("region   pixels   accuracy   mIoU\n");
    std::printf("%-8s %-8zu %-10.1f %.1f\n", eval_region_name(r.region), r.evaluated_pixels,
                r.accuracy, r.mean_iou);
    for (std::size_t k = 0; k < r.class_iou.size(); ++k) {
        if (r.iou_valid[k])
            std::printf("  class %-2zu IoU %.1f\n", k, r.class_iou[k]);
        else
            std::printf("  class %-2zu IoU -\n", k);
    }
}

// ---------------------------------------------------------------------------
// Option bags. CLI11 writes into these; run_* functions consume them.

struct SynthOpts {
    SynthSpec spec;
    std::string out;
};

struct MaskgenOpts {
    MaskSpec spec;
    std::string family = "rect";
    int height = 32, width = 32;
    std::string out;
};

struct TrainOpts {
    TrainConfig cfg;
    std::string schedule = "cosine";
    std::string optimizer = "sgd";
    std::string data;
    std::string out;
    bool no_hflip = false;
};

struct SampleOpts {
    std::string ckpt;
    int count = 1;
    std::uint64_t seed = 0;
    std::string out;
    bool png = false;
};

struct InpaintOpts {
    std::string ckpt, input, mask, gt;
    std::string strategy = "lb";
    std::string region = "missing";
    int lookbacks = 1;
    int samples = 1;
    std::uint64_t seed = 0;
    std::string out;
    bool png = false;
};

struct BaselineOpts {
    std::string method = "nearest";
    std::string input, mask, gt;
    std::string region = "missing";
    int classes = -1;
    std::string out;
};

struct EvalOpts {
    std::string pred, gt, mask;
    std::string region = "full";
    int classes = -1;
};

struct AblateOpts {
    std::string ckpt, data;
    std::vector<std::string> families = {"rect", "speckle"};
    int cases = 10;
    int lookbacks = 1;
    std::uint64_t seed = 0;
    std::string region = "missing";
    std::string out;  // optional JSON report
};

// ---------------------------------------------------------------------------

int run_synth(const SynthOpts& o) {
    const std::string dir = resolve_out(o.out, "synth");
    fs::create_directories(dir);
    const std::vector<LabelMap> maps = synth(o.spec);
    for (std::size_t i = 0; i < maps.size(); ++i) {
        char name[32];
        std::snprintf(name, sizeof name, "map_%05zu.smap", i);
        write_smap((fs::path(dir) / name).string(), maps[i], o.spec.num_classes);
    }
    write_manifest((fs::path(dir) / "manifest.json").string(), "synth", o.spec.seed,
                   {{"count", o.spec.count},
                    {"height", o.spec.height},
                    {"width", o.spec.width},
                    {"classes", o.spec.num_classes},
                    {"road_min_width", o.spec.road_min_width},
                    {"road_max_width", o.spec.road_max_width},
                    {"vertical_road_prob", o.spec.vertical_road_prob},
                    {"building_density", o.spec.building_density},
                    {"vehicle_rate", o.spec.vehicle_rate},
                    {"out", dir}});
    std::fprintf(stderr, "synth: wrote %zu maps (%dx%d, K=%d) to %s\n", maps.size(),
                 o.spec.height, o.spec.width, o.spec.num_classes, dir.c_str());
    return 0;
}

int run_maskgen(MaskgenOpts o) {
    o.spec.family = mask_family_from_name(o.family);
    const std::string out = resolve_out(o.out, "mask.smask");
    ensure_parent_dir(out);
    const Mask m = generate(o.spec, o.height, o.width);
    write_smask(out, m);
    write_manifest(out + ".manifest.json", "maskgen", o.spec.seed,
                   {{"family", o.family},
                    {"height", o.height},
                    {"width", o.width},
                    {"rect_count", o.spec.rect_count},
                    {"rect_min_frac", o.spec.rect_min_frac},
                    {"rect_max_frac", o.spec.rect_max_frac},
                    {"half_side", o.spec.half_side},
                    {"known_rate", o.spec.known_rate},
                    {"stroke_count", o.spec.stroke_count},
                    {"stroke_segments", o.spec.stroke_segments},
                    {"stroke_thickness", o.spec.stroke_thickness},
                    {"walk_steps", o.spec.walk_steps},
                    {"footprint_radius", o.spec.footprint_radius},
                    {"out", out}});
    std::fprintf(stderr, "maskgen: %s mask %dx%d, %.1f%% unknown -> %s\n", o.family.c_str(),
                 o.height, o.width, 100.0 * unknown_fraction(m), out.c_str());
    return 0;
}

int run_train(TrainOpts o) {
    o.cfg.schedule = o.schedule == "cosine" ? ScheduleKind::cosine : ScheduleKind::linear;
    o.cfg.optimizer =
        o.optimizer == "adam" ? OptimizerKind::adam : OptimizerKind::sgd_momentum;
    o.cfg.augment_hflip = !o.no_hflip;

    int data_k = 0;
    const std::vector<LabelMap> dataset = load_dataset(o.data, &data_k);
    if (o.cfg.num_classes < data_k)
        throw DomainError("dataset needs " + std::to_string(data_k) + " classes, --classes is " +
                          std::to_string(o.cfg.num_classes));
    std::fprintf(stderr, "train: %zu maps %dx%d, K=%d, %d steps\n", dataset.size(),
                 dataset[0].height, dataset[0].width, o.cfg.num_classes, o.cfg.steps);

    const std::string out = resolve_out(o.out, "model.spnt");
    ensure_parent_dir(out);
    const TrainResult result =
        train(o.cfg, dataset, [&](int step, const DenoiserParams& p, const NoiseSchedule& s) {
            save_checkpoint(out, p, s);
            std::fprintf(stderr, "train: checkpoint at step %d\n", step);
        });
    save_checkpoint(out, result.params, result.schedule);

    std::ofstream log(out + ".log.csv", std::ios::trunc);
    log << "step,loss,wall_ms\n";
    for (const StepLog& l : result.log)
        log << l.step << ',' << l.loss << ',' << l.wall_ms << '\n';

    write_manifest(out + ".manifest.json", "train", o.cfg.seed,
                   {{"data", o.data},
                    {"steps", o.cfg.steps},
                    {"batch", o.cfg.batch_size},
                    {"timesteps", o.cfg.diffusion_steps},
                    {"schedule", o.schedule},
                    {"beta_start", o.cfg.beta_start},
                    {"beta_end", o.cfg.beta_end},
                    {"cosine_s", o.cfg.cosine_s},
                    {"lr", o.cfg.learning_rate},
                    {"lr_final", o.cfg.lr_final},
                    {"optimizer", o.optimizer},
                    {"momentum", o.cfg.momentum},
                    {"classes", o.cfg.num_classes},
                    {"channels", o.cfg.channels},
                    {"blocks", o.cfg.blocks},
                    {"embed", o.cfg.time_embed_dim},
                    {"hflip", o.cfg.augment_hflip},
                    {"checkpoint_every", o.cfg.checkpoint_every},
                    {"stop_frac", o.cfg.stop_loss_frac},
                    {"stop_window", o.cfg.stop_window},
                    {"out", out}});
    std::fprintf(stderr, "train: first-step loss %.4f, last-step loss %.4f -> %s\n",
                 result.log.front().loss, result.log.back().loss, out.c_str());
    return 0;
}

int run_sample(const SampleOpts& o) {
    const Checkpoint ck = load_checkpoint(o.ckpt);
    const DenoiserSpec& spec = ck.params.spec;
    const std::string dir = resolve_out(o.out, "samples");
    fs::create_directories(dir);

    // Unconditional generation is inpainting with nothing known.
    const LabelMap empty(spec.height, spec.width, 0);
    const Mask none_known(spec.height, spec.width, 0);
    for (int s = 0; s < o.count; ++s) {
        RngStream rng(o.seed + static_cast<std::uint64_t>(s));
        const LabelMap map = seq_con(ck.params, empty, none_known, ck.schedule, rng);
        char name[32];
        std::snprintf(name, sizeof name, "sample_%05d.smap", s);
        const std::string path = (fs::path(dir) / name).string();
        write_smap(path, map, spec.num_classes);
        if (o.png) render_png(fs::path(path).replace_extension(".png").string(), map);
        std::fprintf(stderr, "sample: %d/%d\n", s + 1, o.count);
    }
    write_manifest((fs::path(dir) / "manifest.json").string(), "sample", o.seed,
                   {{"ckpt", o.ckpt}, {"count", o.count}, {"png", o.png}, {"out", dir}});
    return 0;
}

int run_inpaint(const InpaintOpts& o) {
    const Checkpoint ck = load_checkpoint(o.ckpt);
    const LabelMap y0 = read_smap(o.input);
    const Mask mask = read_smask(o.mask);

    InpaintConfig cfg;
    cfg.strategy = strategy_from_name(o.strategy);
    cfg.lookbacks = o.lookbacks;
    cfg.num_samples = o.samples;
    cfg.seed = o.seed;
    const std::string out = resolve_out(o.out, "inpainted.smap");
    ensure_parent_dir(out);

    const int r = cfg.strategy == Strategy::seq_con ? 0 : cfg.lookbacks;
    std::vector<std::string> written;
    LabelMap first(0, 0);
    if (o.samples == 1) {
        first = sepaint::run_inpaint(ck.params, y0, mask, ck.schedule, cfg);
        write_smap(out, first, ck.params.spec.num_classes);
        written.push_back(out);
    } else {
        const MultiSampleResult ms =
            multi_sample(ck.params, y0, mask, ck.schedule, o.samples, o.seed, r);
        first = ms.samples[0];
        for (int s = 0; s < o.samples; ++s) {
            const std::string path = numbered(out, s);
            write_smap(path, ms.samples[s], ck.params.spec.num_classes);
            written.push_back(path);
        }
        double unknown_sum = 0.0, known_sum = 0.0;
        std::size_t nu = 0, nk = 0;
        for (std::size_t p = 0; p < mask.known.size(); ++p) {
            if (mask.known[p]) {
                known_sum += ms.uncertainty.values[p];
                ++nk;
            } else {
                unknown_sum += ms.uncertainty.values[p];
                ++nu;
            }
        }
        const fs::path up = fs::path(out).parent_path() /
                            (fs::path(out).stem().string() + "_uncertainty.json");
        std::ofstream uout(up, std::ios::trunc);
        uout << json{{"height", ms.uncertainty.height},
                     {"width", ms.uncertainty.width},
                     {"values", ms.uncertainty.values}}
                    .dump()
             << "\n";
        std::fprintf(stderr, "inpaint: mean uncertainty unknown %.4f (n=%zu), known %.4f (n=%zu)\n",
                     nu ? unknown_sum / nu : 0.0, nu, nk ? known_sum / nk : 0.0, nk);
    }
    if (o.png) render_png(fs::path(out).replace_extension(".png").string(), first);

    write_manifest(out + ".manifest.json", "inpaint", o.seed,
                   {{"ckpt", o.ckpt},
                    {"input", o.input},
                    {"mask", o.mask},
                    {"strategy", o.strategy},
                    {"lookbacks", o.lookbacks},
                    {"samples", o.samples},
                    {"region", o.region},
                    {"out", out}});
    std::fprintf(stderr, "inpaint: %s strategy, %d sample(s) -> %s\n", o.strategy.c_str(),
                 o.samples, out.c_str());

    if (!o.gt.empty()) {
        const LabelMap gt = read_smap(o.gt);
        print_report(evaluate(first, gt, mask, eval_region_from_name(o.region),
                              ck.params.spec.num_classes));
    }
    return 0;
}

int run_baseline(const BaselineOpts& o) {
    const LabelMap y0 = read_smap(o.input);
    const Mask mask = read_smask(o.mask);
    const LabelMap filled = complete(baseline_from_name(o.method), y0, mask, o.classes);
    const std::string out = resolve_out(o.out, "baseline.smap");
    ensure_parent_dir(out);
    std::int32_t max_label = 0;
    for (auto v : filled.labels) max_label = std::max(max_label, v);
    write_smap(out, filled, o.classes > 0 ? o.classes : max_label + 1);
    write_manifest(out + ".manifest.json", "baseline", 0,
                   {{"method", o.method},
                    {"input", o.input},
                    {"mask", o.mask},
                    {"classes", o.classes},
                    {"out", out}});
    std::fprintf(stderr, "baseline: %s fill -> %s\n", o.method.c_str(), out.c_str());
    if (!o.gt.empty()) {
        const LabelMap gt = read_smap(o.gt);
        const int k = o.classes > 0 ? o.classes : derive_classes(filled, gt);
        print_report(evaluate(filled, gt, mask, eval_region_from_name(o.region), k));
    }
    return 0;
}

int run_eval(const EvalOpts& o) {
    const LabelMap pred = read_smap(o.pred);
    const LabelMap gt = read_smap(o.gt);
    const EvalRegion region = eval_region_from_name(o.region);
    Mask mask(pred.height, pred.width, 1);
    if (!o.mask.empty())
        mask = read_smask(o.mask);
    else if (region == EvalRegion::missing)
        throw UsageError("--region missing requires --mask");
    const int k = o.classes > 0 ? o.classes : derive_classes(pred, gt);
    print_report(evaluate(pred, gt, mask, region, k));
    return 0;
}

int run_ablate(const AblateOpts& o) {
    const Checkpoint ck = load_checkpoint(o.ckpt);
    const std::vector<LabelMap> dataset = load_dataset(o.data, nullptr);
    const EvalRegion region = eval_region_from_name(o.region);
    const int k = ck.params.spec.num_classes;

    struct Acc {
        double miou = 0.0, acc = 0.0;
        int n = 0;
    } totals[2];
    json cases = json::array();

    int case_index = 0;
    for (const std::string& family : o.families) {
        MaskSpec ms;
        ms.family = mask_family_from_name(family);
        for (int c = 0; c < o.cases; ++c, ++case_index) {
            const LabelMap& gt = dataset[case_index % dataset.size()];
            if (gt.height != ck.params.spec.height || gt.width != ck.params.spec.width)
                throw DomainError("ablate: dataset shape does not match the model");
            ms.seed = o.seed * 1000003ULL + static_cast<std::uint64_t>(case_index);
            const Mask mask = generate(ms, gt.height, gt.width);

            for (int strat = 0; strat < 2; ++strat) {
                InpaintConfig cfg;
                cfg.strategy = strat == 0 ? Strategy::lb_con : Strategy::seq_con;
                cfg.lookbacks = o.lookbacks;
                cfg.seed = o.seed + static_cast<std::uint64_t>(case_index);
                const LabelMap filled = sepaint::run_inpaint(ck.params, gt, mask, ck.schedule, cfg);
                const EvalReport rep = evaluate(filled, gt, mask, region, k);
                totals[strat].miou += rep.mean_iou;
                totals[strat].acc += rep.accuracy;
                ++totals[strat].n;
                cases.push_back({{"family", family},
                                 {"case", case_index},
                                 {"strategy", strat == 0 ? "lb" : "seq"},
                                 {"miou", rep.mean_iou},
                                 {"accuracy", rep.accuracy}});
            }
            std::fprintf(stderr, "ablate: %s case %d/%d done\n", family.c_str(), c + 1,
                         o.cases);
        }
    }

    std::printf("strategy   mIoU     accuracy\n");
    std::printf("LB-Con     %-8.1f %.1f\n", totals[0].miou / totals[0].n,
                totals[0].acc / totals[0].n);
    std::printf("Seq-Con    %-8.1f %.1f\n", totals[1].miou / totals[1].n,
                totals[1].acc / totals[1].n);

    if (!o.out.empty()) {
        ensure_parent_dir(o.out);
        std::ofstream rout(o.out, std::ios::trunc);
        rout << json{{"lb", {{"miou", totals[0].miou / totals[0].n},
                             {"accuracy", totals[0].acc / totals[0].n}}},
                     {"seq", {{"miou", totals[1].miou / totals[1].n},
                              {"accuracy", totals[1].acc / totals[1].n}}},
                     {"cases", cases}}
                    .dump(2)
             << "\n";
        write_manifest(o.out + ".manifest.json", "ablate", o.seed,
                       {{"ckpt", o.ckpt},
                        {"data", o.data},
                        {"families", o.families},
                        {"cases", o.cases},
                        {"lookbacks", o.lookbacks},
                        {"region", o.region},
                        {"out", o.out}});
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"sepaint: categorical-diffusion semantic-map inpainting"};
    app.set_config("--config", "", "key=value config file overriding flag defaults");
    app.require_subcommand(1);

    SynthOpts sy;
    CLI::App* synth_cmd = app.add_subcommand("synth", "generate procedural streetscape maps");
    synth_cmd->add_option("--count", sy.spec.count)->capture_default_str();
    synth_cmd->add_option("--height", sy.spec.height)->capture_default_str();
    synth_cmd->add_option("--width", sy.spec.width)->capture_default_str();
    synth_cmd->add_option("--classes", sy.spec.num_classes)->capture_default_str();
    synth_cmd->add_option("--seed", sy.spec.seed)->capture_default_str();
    synth_cmd->add_option("--road-min", sy.spec.road_min_width)->capture_default_str();
    synth_cmd->add_option("--road-max", sy.spec.road_max_width)->capture_default_str();
    synth_cmd->add_option("--vertical-prob", sy.spec.vertical_road_prob)->capture_default_str();
    synth_cmd->add_option("--building-density", sy.spec.building_density)->capture_default_str();
    synth_cmd->add_option("--vehicle-rate", sy.spec.vehicle_rate)->capture_default_str();
    synth_cmd->add_option("--out", sy.out, "output directory (default $SEPAINT_OUT_DIR/synth)");

    MaskgenOpts mg;
    CLI::App* mask_cmd = app.add_subcommand("maskgen", "generate an observation mask");
    mask_cmd->add_option("--family", mg.family)
        ->check(CLI::IsMember({"rect", "half", "speckle", "strokes", "coverage"}))
        ->capture_default_str();
    mask_cmd->add_option("--height", mg.height)->capture_default_str();
    mask_cmd->add_option("--width", mg.width)->capture_default_str();
    mask_cmd->add_option("--seed", mg.spec.seed)->capture_default_str();
    mask_cmd->add_option("--rects", mg.spec.rect_count)->capture_default_str();
    mask_cmd->add_option("--min-frac", mg.spec.rect_min_frac)->capture_default_str();
    mask_cmd->add_option("--max-frac", mg.spec.rect_max_frac)->capture_default_str();
    mask_cmd->add_option("--side", mg.spec.half_side, "half family: 0 left, 1 right, 2 top, 3 bottom, -1 seeded")
        ->capture_default_str();
    mask_cmd->add_option("--known-rate", mg.spec.known_rate)->capture_default_str();
    mask_cmd->add_option("--strokes", mg.spec.stroke_count)->capture_default_str();
    mask_cmd->add_option("--segments", mg.spec.stroke_segments)->capture_default_str();
    mask_cmd->add_option("--thickness", mg.spec.stroke_thickness)->capture_default_str();
    mask_cmd->add_option("--walk-steps", mg.spec.walk_steps)->capture_default_str();
    mask_cmd->add_option("--radius", mg.spec.footprint_radius)->capture_default_str();
    mask_cmd->add_option("--out", mg.out, "output file (default $SEPAINT_OUT_DIR/mask.smask)");

    TrainOpts tr;
    CLI::App* train_cmd = app.add_subcommand("train", "train the denoiser");
    train_cmd->add_option("--data", tr.data, "directory of .smap files")->required();
    train_cmd->add_option("--steps", tr.cfg.steps)->capture_default_str();
    train_cmd->add_option("--batch", tr.cfg.batch_size)->capture_default_str();
    train_cmd->add_option("--timesteps", tr.cfg.diffusion_steps)->capture_default_str();
    train_cmd->add_option("--schedule", tr.schedule)
        ->check(CLI::IsMember({"cosine", "linear"}))
        ->capture_default_str();
    train_cmd->add_option("--beta-start", tr.cfg.beta_start, "linear schedule start")
        ->capture_default_str();
    train_cmd->add_option("--beta-end", tr.cfg.beta_end, "linear schedule end")
        ->capture_default_str();
    train_cmd->add_option("--cosine-s", tr.cfg.cosine_s, "cosine schedule offset")
        ->capture_default_str();
    train_cmd->add_option("--lr", tr.cfg.learning_rate)->capture_default_str();
    train_cmd->add_option("--lr-final", tr.cfg.lr_final,
                          "decay LR linearly to this value (< 0: constant)")
        ->capture_default_str();
    train_cmd->add_option("--optimizer", tr.optimizer)
        ->check(CLI::IsMember({"sgd", "adam"}))
        ->capture_default_str();
    train_cmd->add_option("--momentum", tr.cfg.momentum)->capture_default_str();
    train_cmd->add_option("--classes", tr.cfg.num_classes)->capture_default_str();
    train_cmd->add_option("--channels", tr.cfg.channels)->capture_default_str();
    train_cmd->add_option("--blocks", tr.cfg.blocks)->capture_default_str();
    train_cmd->add_option("--embed", tr.cfg.time_embed_dim)->capture_default_str();
    train_cmd->add_option("--seed", tr.cfg.seed)->capture_default_str();
    train_cmd->add_option("--checkpoint-every", tr.cfg.checkpoint_every)->capture_default_str();
    train_cmd->add_option("--stop-frac", tr.cfg.stop_loss_frac,
                          "early-stop when trailing mean loss < frac x initial (0 disables)")
        ->capture_default_str();
    train_cmd->add_option("--stop-window", tr.cfg.stop_window)->capture_default_str();
    train_cmd->add_flag("--no-hflip", tr.no_hflip, "disable mirror augmentation");
    train_cmd->add_option("--out", tr.out, "checkpoint path (default $SEPAINT_OUT_DIR/model.spnt)");

    SampleOpts sa;
    CLI::App* sample_cmd = app.add_subcommand("sample", "unconditional generation");
    sample_cmd->add_option("--ckpt", sa.ckpt)->required();
    sample_cmd->add_option("--count", sa.count)->capture_default_str();
    sample_cmd->add_option("--seed", sa.seed)->capture_default_str();
    sample_cmd->add_flag("--png", sa.png, "also render PNGs");
    sample_cmd->add_option("--out", sa.out, "output directory (default $SEPAINT_OUT_DIR/samples)");

    InpaintOpts ip;
    CLI::App* inpaint_cmd = app.add_subcommand("inpaint", "condition on a partial map");
    inpaint_cmd->add_option("--ckpt", ip.ckpt)->required();
    inpaint_cmd->add_option("--input", ip.input, "partial map (.smap)")->required();
    inpaint_cmd->add_option("--mask", ip.mask, "observation mask (.smask)")->required();
    inpaint_cmd->add_option("--strategy", ip.strategy)
        ->check(CLI::IsMember({"lb", "seq"}))
        ->capture_default_str();
    inpaint_cmd->add_option("--lookbacks", ip.lookbacks)->check(CLI::Range(0, 64))
        ->capture_default_str();
    inpaint_cmd->add_option("--samples", ip.samples)->check(CLI::Range(1, 999))
        ->capture_default_str();
    inpaint_cmd->add_option("--seed", ip.seed)->capture_default_str();
    inpaint_cmd->add_option("--region", ip.region)
        ->check(CLI::IsMember({"missing", "full"}))
        ->capture_default_str();
    inpaint_cmd->add_option("--gt", ip.gt, "score against this ground truth");
    inpaint_cmd->add_flag("--png", ip.png, "also render a PNG");
    inpaint_cmd->add_option("--out", ip.out, "output map (default $SEPAINT_OUT_DIR/inpainted.smap)");

    BaselineOpts bl;
    CLI::App* baseline_cmd = app.add_subcommand("baseline", "interpolation fill");
    baseline_cmd->add_option("--method", bl.method)
        ->check(CLI::IsMember({"nearest", "linear", "cubic"}))
        ->capture_default_str();
    baseline_cmd->add_option("--input", bl.input)->required();
    baseline_cmd->add_option("--mask", bl.mask)->required();
    baseline_cmd->add_option("--classes", bl.classes, "-1 derives from the data")
        ->capture_default_str();
    baseline_cmd->add_option("--gt", bl.gt, "score against this ground truth");
    baseline_cmd->add_option("--region", bl.region)
        ->check(CLI::IsMember({"missing", "full"}))
        ->capture_default_str();
    baseline_cmd->add_option("--out", bl.out, "output map (default $SEPAINT_OUT_DIR/baseline.smap)");

    EvalOpts ev;
    CLI::App* eval_cmd = app.add_subcommand("eval", "score a prediction");
    eval_cmd->add_option("--pred", ev.pred)->required();
    eval_cmd->add_option("--gt", ev.gt)->required();
    eval_cmd->add_option("--mask", ev.mask, "required for --region missing");
    eval_cmd->add_option("--region", ev.region)
        ->check(CLI::IsMember({"missing", "full"}))
        ->capture_default_str();
    eval_cmd->add_option("--classes", ev.classes, "-1 derives from the data")
        ->capture_default_str();

    AblateOpts ab;
    CLI::App* ablate_cmd = app.add_subcommand("ablate", "LB-Con vs Seq-Con comparison table");
    ablate_cmd->add_option("--ckpt", ab.ckpt)->required();
    ablate_cmd->add_option("--data", ab.data, "directory of held-out .smap files")->required();
    ablate_cmd->add_option("--families", ab.families, "mask families to sweep")
        ->delimiter(',')
        ->capture_default_str();
    ablate_cmd->add_option("--cases", ab.cases, "cases per family")->check(CLI::Range(1, 100000))
        ->capture_default_str();
    ablate_cmd->add_option("--lookbacks", ab.lookbacks)->check(CLI::Range(0, 64))
        ->capture_default_str();
    ablate_cmd->add_option("--seed", ab.seed)->capture_default_str();
    ablate_cmd->add_option("--region", ab.region)
        ->check(CLI::IsMember({"missing", "full"}))
        ->capture_default_str();
    ablate_cmd->add_option("--out", ab.out, "optional JSON report path");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (synth_cmd->parsed()) return run_synth(sy);
        if (mask_cmd->parsed()) return run_maskgen(mg);
        if (train_cmd->parsed()) return run_train(tr);
        if (sample_cmd->parsed()) return run_sample(sa);
        if (inpaint_cmd->parsed()) return run_inpaint(ip);
        if (baseline_cmd->parsed()) return run_baseline(bl);
        if (eval_cmd->parsed()) return run_eval(ev);
        if (ablate_cmd->parsed()) return run_ablate(ab);
    } catch (const UsageError& e) {
        std::fprintf(stderr, "usage error: %s\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 2;  // unreachable given require_subcommand(1)
}
