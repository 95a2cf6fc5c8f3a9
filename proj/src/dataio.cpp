#include "sepaint/dataio.hpp"

#include <zlib.h>

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>

#include "sepaint/errors.hpp"
#include "sepaint/rng.hpp"

namespace sepaint {

// --- synthetic streetscapes -------------------------------------------------

namespace {

int uniform_int(double u, int lo, int hi) {
    return lo + std::min(hi - lo, static_cast<int>(u * (hi - lo + 1)));
}

// Road bands sit on a stride-8 lattice (offset 4) rather than at arbitrary
// positions: a small repeating family of layouts keeps the dataset learnable
// from sparse observations. Falls back to a centered band when no lattice
// slot leaves room for the sidewalk ring.
int lattice_band(double u, int band_width, int extent) {
    int slots = 0;
    for (int p = 4; p + band_width <= extent - 1; p += 8) ++slots;
    if (slots == 0) return std::max(1, (extent - band_width) / 2);
    return 4 + 8 * uniform_int(u, 0, slots - 1);
}

LabelMap synth_one(const SynthSpec& spec, std::uint64_t seed) {
    const int h = spec.height, w = spec.width;
    RngStream rng(seed);
    LabelMap map(h, w, kBackground);

    // Roads: a full-span horizontal band, sometimes a crossing vertical one.
    // One cell of margin on each side so a sidewalk always fits.
    const int rwh = std::min(
        uniform_int(rng.next_uniform(), spec.road_min_width, spec.road_max_width),
        std::max(1, h - 2));
    const int r0 = lattice_band(rng.next_uniform(), rwh, h);
    for (int i = r0; i < std::min(h, r0 + rwh); ++i)
        for (int j = 0; j < w; ++j) map.at(i, j) = kRoad;

    const bool has_vertical = rng.next_uniform() < spec.vertical_road_prob;
    int rwv = 0, c0 = 0;
    if (has_vertical) {
        rwv = std::min(
            uniform_int(rng.next_uniform(), spec.road_min_width, spec.road_max_width),
            std::max(1, w - 2));
        c0 = lattice_band(rng.next_uniform(), rwv, w);
        for (int i = 0; i < h; ++i)
            for (int j = c0; j < std::min(w, c0 + rwv); ++j) map.at(i, j) = kRoad;
    }

    // Sidewalks: exactly the background ring bordering road pixels.
    static constexpr int di[4] = {-1, 1, 0, 0};
    static constexpr int dj[4] = {0, 0, -1, 1};
    std::vector<std::size_t> ring;
    for (int i = 0; i < h; ++i)
        for (int j = 0; j < w; ++j) {
            if (map.at(i, j) != kBackground) continue;
            for (int d = 0; d < 4; ++d) {
                const int ni = i + di[d], nj = j + dj[d];
                if (ni >= 0 && ni < h && nj >= 0 && nj < w && map.at(ni, nj) == kRoad) {
                    ring.push_back(static_cast<std::size_t>(i) * w + j);
                    break;
                }
            }
        }
    for (std::size_t p : ring) map.labels[p] = kSidewalk;

    // Buildings: blocky lots flush against the sidewalks, laid out in
    // fixed-width slots separated by one-cell gaps. Lots claim background
    // cells only, so roads and sidewalks are never overwritten.
    if (spec.num_classes > kBuilding && spec.building_density > 0.0) {
        const double slot_prob = std::min(1.0, spec.building_density * 4.0);
        constexpr int kSlot = 6;  // 5-wide lot + 1 gap
        const auto lot = [&](int i_lo, int i_hi, int j_lo, int j_hi) {
            for (int i = std::max(0, i_lo); i <= std::min(h - 1, i_hi); ++i)
                for (int j = std::max(0, j_lo); j <= std::min(w - 1, j_hi); ++j)
                    if (map.at(i, j) == kBackground) map.at(i, j) = kBuilding;
        };
        constexpr int kDepth = 4;  // lot depth away from the sidewalk
        for (int j0 = 0; j0 + kSlot <= w; j0 += kSlot) {
            if (rng.next_uniform() < slot_prob)  // above the horizontal road
                lot(r0 - 1 - kDepth, r0 - 2, j0, j0 + kSlot - 2);
            if (rng.next_uniform() < slot_prob)  // below it
                lot(r0 + rwh + 1, r0 + rwh + kDepth, j0, j0 + kSlot - 2);
        }
        if (has_vertical)
            for (int i0 = 0; i0 + kSlot <= h; i0 += kSlot) {
                if (rng.next_uniform() < slot_prob)  // left of the vertical road
                    lot(i0, i0 + kSlot - 2, c0 - 1 - kDepth, c0 - 2);
                if (rng.next_uniform() < slot_prob)  // right of it
                    lot(i0, i0 + kSlot - 2, c0 + rwv + 1, c0 + rwv + kDepth);
            }
    }

    // Vehicles: a platoon per road — two-cell-long bodies centered in the
    // road interior, on a fixed spacing grid starting at the map edge.
    // Interior placement keeps every vehicle neighbor road/vehicle (never
    // sidewalk), so every sidewalk keeps at least one road neighbor.
    if (spec.num_classes > kVehicle && spec.vehicle_rate > 0.0) {
        constexpr int kSpacing = 4;
        const auto platoon = [&](bool horizontal, int band0, int bandw, int len) {
            const int vh = std::min(2, bandw - 2);
            if (vh < 1) return;
            const int a0 = band0 + (bandw - vh) / 2;
            const double p = std::min(1.0, spec.vehicle_rate * kSpacing / std::max(1, len));
            for (int x = 0; x + 2 <= len; x += kSpacing) {
                if (rng.next_uniform() >= p) continue;
                for (int a = a0; a < a0 + vh; ++a)
                    for (int b = x; b < x + 2; ++b) {
                        const int i = horizontal ? a : b, j = horizontal ? b : a;
                        if (map.at(i, j) == kRoad) map.at(i, j) = kVehicle;
                    }
            }
        };
        platoon(true, r0, rwh, w);
        if (has_vertical) platoon(false, c0, rwv, h);
    }
    return map;
}

}  // namespace

std::vector<LabelMap> synth(const SynthSpec& spec) {
    if (spec.count < 0) throw ConfigError("synth: count must be >= 0");
    if (spec.height < 4 || spec.width < 4) throw ConfigError("synth: maps must be at least 4x4");
    if (spec.num_classes < 3) throw ConfigError("synth: need K >= 3");
    if (spec.road_min_width < 1 || spec.road_min_width > spec.road_max_width ||
        spec.road_max_width > std::min(spec.height, spec.width))
        throw ConfigError("synth: road widths must satisfy 1 <= min <= max <= min(H, W)");
    if (spec.vertical_road_prob < 0.0 || spec.vertical_road_prob > 1.0 ||
        spec.building_density < 0.0 || spec.building_density > 1.0 || spec.vehicle_rate < 0.0)
        throw ConfigError("synth: rates out of range");

    std::vector<LabelMap> out(spec.count);
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic)
#endif
    for (int m = 0; m < spec.count; ++m)
        out[m] = synth_one(spec, counter_bits(spec.seed, static_cast<std::uint64_t>(m)));
    return out;
}

// --- SMAP / SMASK -----------------------------------------------------------

namespace {

constexpr std::size_t kMaxDim = 65535;
constexpr std::size_t kMaxPixels = 100'000'000;

struct Cursor {
    const std::string& s;
    std::size_t pos = 0;

    void expect_literal(const std::string& lit, const char* what) {
        if (s.compare(pos, lit.size(), lit) != 0)
            throw FormatError(std::string("expected ") + what, pos);
        pos += lit.size();
    }
    void skip_ws() {
        while (pos < s.size() &&
               (s[pos] == ' ' || s[pos] == '\t' || s[pos] == '\n' || s[pos] == '\r'))
            ++pos;
    }
    long long next_int(const char* what) {
        skip_ws();
        const std::size_t start = pos;
        bool neg = false;
        if (pos < s.size() && s[pos] == '-') {
            neg = true;
            ++pos;
        }
        if (pos >= s.size() || s[pos] < '0' || s[pos] > '9')
            throw FormatError(std::string("expected integer (") + what + ")", start);
        long long v = 0;
        while (pos < s.size() && s[pos] >= '0' && s[pos] <= '9') {
            v = v * 10 + (s[pos] - '0');
            if (v > std::numeric_limits<std::int32_t>::max())
                throw FormatError(std::string(what) + " overflows 32 bits", start);
            ++pos;
        }
        return neg ? -v : v;
    }
    void expect_end() {
        skip_ws();
        if (pos != s.size()) throw FormatError("trailing data after map body", pos);
    }
};

LabelMap decode_grid(const std::string& text, const std::string& magic, int forced_k,
                     int* k_out) {
    Cursor c{text};
    c.expect_literal(magic + "\n", ("magic line \"" + magic + "\"").c_str());

    const std::size_t hdr = c.pos;
    const long long h = c.next_int("height");
    const long long w = c.next_int("width");
    const long long k = c.next_int("class count");
    if (h < 1 || w < 1 || static_cast<std::size_t>(h) > kMaxDim ||
        static_cast<std::size_t>(w) > kMaxDim ||
        static_cast<std::size_t>(h) * static_cast<std::size_t>(w) > kMaxPixels)
        throw FormatError("dimensions out of range", hdr);
    if (k < 1 || (forced_k > 0 && k != forced_k))
        throw FormatError(forced_k > 0 ? "mask class count must be 2" : "class count out of range",
                          hdr);

    LabelMap map(static_cast<int>(h), static_cast<int>(w));
    for (std::size_t p = 0; p < map.size(); ++p) {
        c.skip_ws();
        const std::size_t off = c.pos;
        const long long v = c.next_int("label");
        if (v < 0 || v >= k)
            throw FormatError("label " + std::to_string(v) + " outside [0, " +
                                  std::to_string(k) + ")",
                              off);
        map.labels[p] = static_cast<std::int32_t>(v);
    }
    c.expect_end();
    if (k_out) *k_out = static_cast<int>(k);
    return map;
}

std::string encode_grid(const LabelMap& map, const std::string& magic, int k) {
    std::string out = magic + "\n" + std::to_string(map.height) + " " +
                      std::to_string(map.width) + " " + std::to_string(k) + "\n";
    for (int i = 0; i < map.height; ++i) {
        for (int j = 0; j < map.width; ++j) {
            if (j) out += ' ';
            out += std::to_string(map.at(i, j));
        }
        out += '\n';
    }
    return out;
}

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw FormatError("cannot open " + path, 0);
    std::string data((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return data;
}

void spit(const std::string& path, const std::string& data) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw FormatError("cannot open " + path + " for writing", 0);
    out.write(data.data(), static_cast<std::streamsize>(data.size()));
    if (!out) throw FormatError("short write to " + path, 0);
}

}  // namespace

std::string encode_smap(const LabelMap& map, int num_classes) {
    if (num_classes < 1) throw DomainError("encode_smap: num_classes must be >= 1");
    for (std::int32_t v : map.labels)
        if (v < 0 || v >= num_classes)
            throw DomainError("encode_smap: label outside [0, K)");
    return encode_grid(map, "SMAP 1", num_classes);
}

LabelMap decode_smap(const std::string& text, int* num_classes) {
    return decode_grid(text, "SMAP 1", 0, num_classes);
}

std::string encode_smask(const Mask& mask) {
    LabelMap as_map(mask.height, mask.width);
    for (std::size_t p = 0; p < mask.size(); ++p) as_map.labels[p] = mask.known[p] ? 1 : 0;
    return encode_grid(as_map, "SMASK 1", 2);
}

Mask decode_smask(const std::string& text) {
    const LabelMap as_map = decode_grid(text, "SMASK 1", 2, nullptr);
    Mask m(as_map.height, as_map.width);
    for (std::size_t p = 0; p < m.size(); ++p)
        m.known[p] = static_cast<std::uint8_t>(as_map.labels[p]);
    return m;
}

void write_smap(const std::string& path, const LabelMap& map, int num_classes) {
    spit(path, encode_smap(map, num_classes));
}

LabelMap read_smap(const std::string& path, int* num_classes) {
    return decode_smap(slurp(path), num_classes);
}

void write_smask(const std::string& path, const Mask& mask) { spit(path, encode_smask(mask)); }

Mask read_smask(const std::string& path) { return decode_smask(slurp(path)); }

// --- SPNT checkpoint --------------------------------------------------------

namespace {

constexpr std::uint32_t kCheckpointVersion = 1;

void put_u16(std::string& out, std::uint16_t v) {
    out.push_back(static_cast<char>(v & 0xff));
    out.push_back(static_cast<char>(v >> 8));
}
void put_u32(std::string& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}
void put_u64(std::string& out, std::uint64_t v) {
    for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}
void put_f32(std::string& out, float v) { put_u32(out, std::bit_cast<std::uint32_t>(v)); }
void put_f64(std::string& out, double v) { put_u64(out, std::bit_cast<std::uint64_t>(v)); }

struct BinReader {
    const std::string& s;
    std::size_t pos = 0;

    void need(std::size_t n) {
        if (pos + n > s.size()) throw FormatError("checkpoint truncated", pos);
    }
    std::uint16_t u16() {
        need(2);
        std::uint16_t v = 0;
        for (int i = 0; i < 2; ++i) v |= static_cast<std::uint16_t>(
            static_cast<unsigned char>(s[pos + i]) << (8 * i));
        pos += 2;
        return v;
    }
    std::uint32_t u32() {
        need(4);
        std::uint32_t v = 0;
        for (int i = 0; i < 4; ++i)
            v |= static_cast<std::uint32_t>(static_cast<unsigned char>(s[pos + i])) << (8 * i);
        pos += 4;
        return v;
    }
    std::uint64_t u64() {
        need(8);
        std::uint64_t v = 0;
        for (int i = 0; i < 8; ++i)
            v |= static_cast<std::uint64_t>(static_cast<unsigned char>(s[pos + i])) << (8 * i);
        pos += 8;
        return v;
    }
    float f32() { return std::bit_cast<float>(u32()); }
    double f64() { return std::bit_cast<double>(u64()); }
    std::string bytes(std::size_t n) {
        need(n);
        std::string v = s.substr(pos, n);
        pos += n;
        return v;
    }
};

std::uint32_t crc_of(const std::string& s, std::size_t from, std::size_t len) {
    return static_cast<std::uint32_t>(
        crc32(0UL, reinterpret_cast<const Bytef*>(s.data() + from), static_cast<uInt>(len)));
}

}  // namespace

void save_checkpoint(const std::string& path, const DenoiserParams& params,
                     const NoiseSchedule& schedule) {
    const DenoiserSpec& sp = params.spec;
    if (params.values.size() != sp.param_count())
        throw DomainError("save_checkpoint: parameter vector does not match spec");

    std::string out = "SPNT";
    put_u32(out, kCheckpointVersion);
    const std::size_t body_start = out.size();

    put_u32(out, schedule.kind() == ScheduleKind::cosine ? 0u : 1u);
    put_u32(out, static_cast<std::uint32_t>(schedule.steps()));
    put_f64(out, schedule.param_a());
    put_f64(out, schedule.param_b());

    put_u32(out, static_cast<std::uint32_t>(sp.num_classes));
    put_u32(out, static_cast<std::uint32_t>(sp.height));
    put_u32(out, static_cast<std::uint32_t>(sp.width));
    put_u32(out, static_cast<std::uint32_t>(sp.channels));
    put_u32(out, static_cast<std::uint32_t>(sp.blocks));
    put_u32(out, static_cast<std::uint32_t>(sp.time_embed_dim));

    const std::vector<LayerDesc> table = layer_table(sp);
    put_u32(out, static_cast<std::uint32_t>(table.size()));
    for (const LayerDesc& l : table) {
        put_u16(out, static_cast<std::uint16_t>(l.name.size()));
        out += l.name;
        put_u64(out, l.offset);
        put_u64(out, l.count);
    }
    for (float v : params.values) put_f32(out, v);

    put_u32(out, crc_of(out, body_start, out.size() - body_start));
    spit(path, out);
}

Checkpoint load_checkpoint(const std::string& path) {
    const std::string data = slurp(path);
    BinReader r{data};
    if (r.bytes(4) != "SPNT") throw FormatError("bad checkpoint magic", 0);
    const std::uint32_t version = r.u32();
    if (version != kCheckpointVersion)
        throw FormatError("unsupported checkpoint version " + std::to_string(version), 4);
    const std::size_t body_start = r.pos;

    const std::uint32_t kind = r.u32();
    if (kind > 1) throw FormatError("unknown schedule kind", r.pos - 4);
    const std::uint32_t steps = r.u32();
    if (steps < 1 || steps > 1'000'000) throw FormatError("schedule length out of range", r.pos - 4);
    const double a = r.f64();
    const double b = r.f64();

    DenoiserSpec sp;
    const std::size_t spec_off = r.pos;
    sp.num_classes = static_cast<int>(r.u32());
    sp.height = static_cast<int>(r.u32());
    sp.width = static_cast<int>(r.u32());
    sp.channels = static_cast<int>(r.u32());
    sp.blocks = static_cast<int>(r.u32());
    sp.time_embed_dim = static_cast<int>(r.u32());
    if (sp.num_classes < 2 || sp.num_classes > 64 || sp.height < 1 || sp.height > 65535 ||
        sp.width < 1 || sp.width > 65535 || sp.channels < 1 || sp.channels > 4096 ||
        sp.blocks < 0 || sp.blocks > 64 || sp.time_embed_dim < 2 || sp.time_embed_dim > 4096)
        throw FormatError("model dimensions out of range", spec_off);

    const std::vector<LayerDesc> expect = layer_table(sp);
    const std::uint32_t nlayers = r.u32();
    if (nlayers != expect.size()) throw FormatError("layer table size mismatch", r.pos - 4);
    for (const LayerDesc& e : expect) {
        const std::size_t loff = r.pos;
        const std::uint16_t nlen = r.u16();
        const std::string name = r.bytes(nlen);
        const std::uint64_t offset = r.u64();
        const std::uint64_t count = r.u64();
        if (name != e.name || offset != e.offset || count != e.count)
            throw FormatError("layer table entry mismatch at '" + name + "'", loff);
    }

    DenoiserParams params{sp, std::vector<float>(sp.param_count())};
    for (float& v : params.values) v = r.f32();

    const std::size_t crc_off = r.pos;
    const std::uint32_t stored = r.u32();
    if (stored != crc_of(data, body_start, crc_off - body_start))
        throw FormatError("checkpoint checksum mismatch", crc_off);
    if (r.pos != data.size()) throw FormatError("trailing bytes after checkpoint", r.pos);

    NoiseSchedule sch = kind == 0 ? cosine_schedule(static_cast<int>(steps), a)
                                  : linear_schedule(static_cast<int>(steps), a, b);
    return {std::move(params), std::move(sch)};
}

// --- PNG --------------------------------------------------------------------

const Palette& default_palette() {
    static const Palette p = {{
        {190, 190, 190},  // 0 background
        {128, 64, 128},   // 1 road
        {244, 35, 232},   // 2 sidewalk
        {70, 70, 70},     // 3 building
        {0, 0, 142},      // 4 vehicle
        {107, 142, 35},   {70, 130, 180},  {220, 20, 60},  {255, 0, 0},    {0, 0, 70},
        {0, 60, 100},     {0, 80, 100},    {0, 0, 230},    {119, 11, 32},  {102, 102, 156},
        {190, 153, 153},  {153, 153, 153}, {250, 170, 30}, {220, 220, 0},  {152, 251, 152},
        {0, 0, 0},        // 20 missing-region black
    }};
    return p;
}

namespace {

void put_u32_be(std::string& out, std::uint32_t v) {
    for (int i = 3; i >= 0; --i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

void put_chunk(std::string& out, const char* type, const std::string& data) {
    put_u32_be(out, static_cast<std::uint32_t>(data.size()));
    const std::size_t start = out.size();
    out.append(type, 4);
    out += data;
    const auto crc = static_cast<std::uint32_t>(crc32(
        0UL, reinterpret_cast<const Bytef*>(out.data() + start), static_cast<uInt>(4 + data.size())));
    put_u32_be(out, crc);
}

}  // namespace

void render_png(const std::string& path, const LabelMap& map, const Mask* mask,
                const Palette& palette) {
    if (map.height < 1 || map.width < 1) throw DomainError("render_png: empty map");
    if (mask && (mask->height != map.height || mask->width != map.width))
        throw DomainError("render_png: mask shape does not match the map");

    std::string ihdr;
    put_u32_be(ihdr, static_cast<std::uint32_t>(map.width));
    put_u32_be(ihdr, static_cast<std::uint32_t>(map.height));
    ihdr += '\x08';          // bit depth
    ihdr += '\x03';          // color type: palette
    ihdr += '\x00';          // compression
    ihdr += '\x00';          // filter
    ihdr += '\x00';          // interlace

    std::string plte;
    for (const auto& c : palette)
        for (std::uint8_t ch : c) plte.push_back(static_cast<char>(ch));

    std::string raw;
    raw.reserve(static_cast<std::size_t>(map.height) * (map.width + 1));
    for (int i = 0; i < map.height; ++i) {
        raw.push_back('\x00');  // filter: none
        for (int j = 0; j < map.width; ++j) {
            if (map.at(i, j) < 0) throw DomainError("render_png: negative label");
            const bool missing = mask && !mask->at(i, j);
            const int idx = missing ? 20 : map.at(i, j) % 20;
            raw.push_back(static_cast<char>(idx));
        }
    }
    uLongf bound = compressBound(static_cast<uLong>(raw.size()));
    std::string idat(bound, '\0');
    if (compress2(reinterpret_cast<Bytef*>(idat.data()), &bound,
                  reinterpret_cast<const Bytef*>(raw.data()), static_cast<uLong>(raw.size()),
                  9) != Z_OK)
        throw DomainError("render_png: compression failed");
    idat.resize(bound);

    std::string out("\x89PNG\r\n\x1a\n", 8);
    put_chunk(out, "IHDR", ihdr);
    put_chunk(out, "PLTE", plte);
    put_chunk(out, "IDAT", idat);
    put_chunk(out, "IEND", "");
    spit(path, out);
}

}  // namespace sepaint
