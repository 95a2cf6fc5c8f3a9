// Integration tests driving the installed binary (path in $SEPAINT_BIN)
// against small fixtures. Every subcommand gets at least one end-to-end run.

#include <sys/wait.h>
#include <unistd.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>

#include "doctest.h"
#include "json.hpp"
#include "sepaint/dataio.hpp"
#include "sepaint/maskgen.hpp"

using namespace sepaint;
namespace fs = std::filesystem;

namespace {

std::string bin() {
    const char* b = std::getenv("SEPAINT_BIN");
    REQUIRE_MESSAGE(b != nullptr, "SEPAINT_BIN must point at the sepaint binary");
    return std::string(b);
}

int run(const std::string& cmd) {
    const int status = std::system(cmd.c_str());
    REQUIRE(status != -1);
    if (WIFEXITED(status)) return WEXITSTATUS(status);
    return -1;
}

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE_MESSAGE(in.good(), path);
    return std::string(std::istreambuf_iterator<char>(in), {});
}

/// One shared sandbox for the whole binary's fixture chain: synth data, a
/// tiny trained model, and maps/masks derived from them.
struct Fixture {
    fs::path dir;
    std::string data_dir, model, map, mask, gt;

    Fixture() {
        dir = fs::temp_directory_path() / ("sepaint_cli_" + std::to_string(::getpid()));
        fs::remove_all(dir);
        fs::create_directories(dir);
        data_dir = (dir / "data").string();
        model = (dir / "model.spnt").string();
        map = (dir / "partial.smap").string();
        mask = (dir / "mask.smask").string();
        gt = (dir / "gt.smap").string();

        REQUIRE(run(bin() + " synth --count 6 --height 12 --width 12 --seed 5 --out " +
                    data_dir) == 0);
        REQUIRE(run(bin() + " train --data " + data_dir +
                    " --steps 6 --batch 2 --timesteps 6 --channels 4 --blocks 1 --embed 4"
                    " --lr 1e-3 --seed 1 --out " +
                    model + " 2>/dev/null") == 0);

        // ground truth = first synth map; partial input = the same map
        const LabelMap g = read_smap(data_dir + "/map_00000.smap");
        write_smap(gt, g, 5);
        write_smap(map, g, 5);
        MaskSpec ms;
        ms.family = MaskFamily::rect;
        ms.seed = 3;
        write_smask(mask, generate(ms, 12, 12));
    }
};

Fixture& fixture() {
    static Fixture f;
    return f;
}

std::string q(const std::string& s) { return "'" + s + "'"; }

}  // namespace

TEST_CASE("bad invocations exit 2 with usage text") {
    CHECK(run(bin() + " 2>/dev/null") == 2);
    CHECK(run(bin() + " frobnicate 2>/dev/null") == 2);
    CHECK(run(bin() + " eval --no-such-flag 2>/dev/null") == 2);
    CHECK(run(bin() + " maskgen --family blob 2>/dev/null") == 2);
    CHECK(run(bin() + " --help >/dev/null") == 0);
    CHECK(run(bin() + " inpaint --help >/dev/null") == 0);

    const std::string err = (fixture().dir / "usage.txt").string();
    CHECK(run(bin() + " synth --bogus 2>" + q(err)) == 2);
    CHECK(slurp(err).find("--help") != std::string::npos);  // help pointer on usage errors
}

TEST_CASE("synth writes maps plus a manifest") {
    Fixture& f = fixture();
    int k = 0;
    const LabelMap m = read_smap(f.data_dir + "/map_00005.smap", &k);
    CHECK(m.height == 12);
    CHECK(m.width == 12);
    CHECK(k == 5);
    const auto manifest = nlohmann::json::parse(slurp(f.data_dir + "/manifest.json"));
    CHECK(manifest["command"] == "synth");
    CHECK(manifest["seed"] == 5);
    CHECK(manifest["config"]["count"] == 6);
}

TEST_CASE("maskgen honors family parameters and the env output dir") {
    Fixture& f = fixture();
    const std::string out = (f.dir / "half.smask").string();
    CHECK(run(bin() + " maskgen --family half --side 0 --height 6 --width 8 --out " + q(out) +
              " 2>/dev/null") == 0);
    const Mask m = read_smask(out);
    for (int i = 0; i < 6; ++i)
        for (int j = 0; j < 8; ++j) CHECK(m.at(i, j) == (j < 4 ? 0 : 1));

    const std::string envdir = (f.dir / "envout").string();
    CHECK(run("SEPAINT_OUT_DIR=" + q(envdir) + " " + bin() +
              " maskgen --family speckle --known-rate 0.5 --height 8 --width 8 2>/dev/null") ==
          0);
    CHECK(fs::exists(envdir + "/mask.smask"));
    CHECK(fs::exists(envdir + "/mask.smask.manifest.json"));
}

TEST_CASE("config files supply defaults that flags override") {
    Fixture& f = fixture();
    const std::string cfg = (f.dir / "cli.cfg").string();
    {
        std::ofstream out(cfg);
        out << "[maskgen]\nfamily=\"half\"\nside=1\nheight=6\nwidth=8\n";
    }
    const std::string out1 = (f.dir / "cfg1.smask").string();
    CHECK(run(bin() + " --config " + q(cfg) + " maskgen --out " + q(out1) + " 2>/dev/null") == 0);
    const Mask right = read_smask(out1);
    CHECK(right.at(0, 7) == 0);  // right half unknown per config
    CHECK(right.at(0, 0) == 1);

    const std::string out2 = (f.dir / "cfg2.smask").string();
    CHECK(run(bin() + " --config " + q(cfg) + " maskgen --side 0 --out " + q(out2) +
              " 2>/dev/null") == 0);
    const Mask left = read_smask(out2);
    CHECK(left.at(0, 0) == 0);  // flag wins over the config value
    CHECK(left.at(0, 7) == 1);
}

TEST_CASE("train produces a loadable checkpoint and a loss log") {
    Fixture& f = fixture();
    const Checkpoint ck = load_checkpoint(f.model);
    CHECK(ck.params.spec.num_classes == 5);
    CHECK(ck.params.spec.height == 12);
    CHECK(ck.schedule.steps() == 6);

    const std::string log = slurp(f.model + ".log.csv");
    CHECK(log.rfind("step,loss,wall_ms\n", 0) == 0);
    int lines = 0;
    for (char c : log) lines += c == '\n';
    CHECK(lines == 7);  // header + 6 steps

    const auto manifest = nlohmann::json::parse(slurp(f.model + ".manifest.json"));
    CHECK(manifest["command"] == "train");
    CHECK(manifest["config"]["timesteps"] == 6);
}

TEST_CASE("sample writes unconditional maps") {
    Fixture& f = fixture();
    const std::string dir = (f.dir / "samples").string();
    CHECK(run(bin() + " sample --ckpt " + q(f.model) + " --count 2 --seed 9 --png --out " +
              q(dir) + " 2>/dev/null") == 0);
    CHECK(fs::exists(dir + "/sample_00000.smap"));
    CHECK(fs::exists(dir + "/sample_00001.smap"));
    CHECK(fs::exists(dir + "/sample_00000.png"));
    const LabelMap s = read_smap(dir + "/sample_00000.smap");
    CHECK(s.height == 12);
}

TEST_CASE("inpaint end to end: strategies, determinism, multi-sample") {
    Fixture& f = fixture();
    const std::string a = (f.dir / "a.smap").string();
    const std::string b = (f.dir / "b.smap").string();
    const std::string base = " inpaint --ckpt " + q(f.model) + " --input " + q(f.map) +
                             " --mask " + q(f.mask) + " --seed 7 ";

    // lb with r = 0 degenerates to seq, end to end, byte for byte
    CHECK(run(bin() + base + "--strategy lb --lookbacks 0 --out " + q(a) + " 2>/dev/null") == 0);
    CHECK(run(bin() + base + "--strategy seq --out " + q(b) + " 2>/dev/null") == 0);
    CHECK(slurp(a) == slurp(b));

    // identical manifest -> identical artifact
    const std::string first = slurp(a);
    CHECK(run(bin() + base + "--strategy lb --lookbacks 0 --out " + q(a) + " 2>/dev/null") == 0);
    CHECK(slurp(a) == first);

    // known pixels survive into the output
    const LabelMap out = read_smap(a);
    const Mask mask = read_smask(f.mask);
    const LabelMap y0 = read_smap(f.map);
    for (std::size_t p = 0; p < mask.known.size(); ++p)
        if (mask.known[p]) CHECK(out.labels[p] == y0.labels[p]);

    const auto manifest = nlohmann::json::parse(slurp(a + ".manifest.json"));
    CHECK(manifest["command"] == "inpaint");
    CHECK(manifest["config"]["strategy"] == "lb");
    CHECK(manifest["seed"] == 7);

    // S > 1 writes numbered samples plus an uncertainty map
    const std::string multi = (f.dir / "multi.smap").string();
    CHECK(run(bin() + base + "--strategy lb --samples 3 --out " + q(multi) + " 2>/dev/null") ==
          0);
    CHECK(fs::exists(f.dir / "multi_00.smap"));
    CHECK(fs::exists(f.dir / "multi_02.smap"));
    const auto unc = nlohmann::json::parse(slurp((f.dir / "multi_uncertainty.json").string()));
    CHECK(unc["height"] == 12);
    CHECK(unc["values"].size() == 144);

    // scoring against ground truth prints an eval table on stdout
    const std::string table = (f.dir / "inpaint_table.txt").string();
    CHECK(run(bin() + base + "--strategy lb --gt " + q(f.gt) + " --region missing --out " +
              q(a) + " >" + q(table) + " 2>/dev/null") == 0);
    CHECK(slurp(table).find("accuracy") != std::string::npos);
}

TEST_CASE("baseline fills and eval scores") {
    Fixture& f = fixture();
    const std::string filled = (f.dir / "nearest.smap").string();
    CHECK(run(bin() + " baseline --method nearest --input " + q(f.map) + " --mask " + q(f.mask) +
              " --out " + q(filled) + " 2>/dev/null") == 0);
    const LabelMap out = read_smap(filled);
    CHECK(out.height == 12);

    // eval with pred = gt prints 100.0 in both summary columns
    const std::string table = (f.dir / "eval_table.txt").string();
    CHECK(run(bin() + " eval --pred " + q(f.gt) + " --gt " + q(f.gt) + " >" + q(table)) == 0);
    const std::string text = slurp(table);
    CHECK(text.find("accuracy") != std::string::npos);
    CHECK(text.find("100.0      100.0") != std::string::npos);

    // missing-region eval needs a mask
    CHECK(run(bin() + " eval --pred " + q(f.gt) + " --gt " + q(f.gt) +
              " --region missing 2>/dev/null") == 2);
    CHECK(run(bin() + " eval --pred " + q(f.gt) + " --gt " + q(f.gt) + " --mask " + q(f.mask) +
              " --region missing >/dev/null") == 0);
}

TEST_CASE("domain and format failures exit 1") {
    Fixture& f = fixture();
    CHECK(run(bin() + " eval --pred /no/such.smap --gt " + q(f.gt) + " 2>/dev/null") == 1);
    CHECK(run(bin() + " inpaint --ckpt /no/such.spnt --input " + q(f.map) + " --mask " +
              q(f.mask) + " 2>/dev/null") == 1);

    const std::string corrupt = (f.dir / "corrupt.smap").string();
    {
        std::ofstream out(corrupt);
        out << "SMAP 1\n2 2 3\n0 1\n";  // truncated body
    }
    CHECK(run(bin() + " eval --pred " + q(corrupt) + " --gt " + q(f.gt) + " 2>/dev/null") == 1);

    // dataset with no .smap files
    const std::string empty = (f.dir / "empty").string();
    fs::create_directories(empty);
    CHECK(run(bin() + " train --data " + q(empty) + " --steps 1 2>/dev/null") == 1);
}

TEST_CASE("ablate prints the two-strategy table and a report") {
    Fixture& f = fixture();
    const std::string table = (f.dir / "ablate_table.txt").string();
    const std::string report = (f.dir / "ablate.json").string();
    CHECK(run(bin() + " ablate --ckpt " + q(f.model) + " --data " + q(f.data_dir) +
              " --families rect --cases 2 --seed 4 --out " + q(report) + " >" + q(table) +
              " 2>/dev/null") == 0);
    const std::string text = slurp(table);
    CHECK(text.find("LB-Con") != std::string::npos);
    CHECK(text.find("Seq-Con") != std::string::npos);
    CHECK(text.find("mIoU") != std::string::npos);

    const auto rep = nlohmann::json::parse(slurp(report));
    CHECK(rep["lb"].contains("miou"));
    CHECK(rep["cases"].size() == 4);  // 2 cases x 2 strategies
    CHECK(rep["lb"]["accuracy"].get<double>() >= 0.0);
    CHECK(rep["lb"]["accuracy"].get<double>() <= 100.0);
}
