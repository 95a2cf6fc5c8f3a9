#ifndef SEPAINT_DATAIO_HPP
#define SEPAINT_DATAIO_HPP

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "sepaint/denoiser.hpp"
#include "sepaint/field.hpp"
#include "sepaint/schedule.hpp"

namespace sepaint {

// Class IDs used by the synthetic streetscapes.
inline constexpr std::int32_t kBackground = 0;
inline constexpr std::int32_t kRoad = 1;
inline constexpr std::int32_t kSidewalk = 2;
inline constexpr std::int32_t kBuilding = 3;
inline constexpr std::int32_t kVehicle = 4;

/// Procedural streetscape parameters. Structural invariants: roads are
/// axis-aligned bands, sidewalks are exactly the background ring bordering
/// roads, buildings never overwrite road/sidewalk, vehicles sit only on road
/// pixels (and never beside a sidewalk, so sidewalks keep a road neighbor).
struct SynthSpec {
    int count = 1000;
    int height = 32;
    int width = 32;
    int num_classes = 5;  // >= 3; building needs K >= 4, vehicle K >= 5
    std::uint64_t seed = 0;

    int road_min_width = 4;
    int road_max_width = 4;
    double vertical_road_prob = 1.0;
    double building_density = 0.25;  // scales the fraction of occupied lots
    double vehicle_rate = 4.0;       // expected vehicles per road
};

/// Deterministic per (spec); map i depends only on (spec, i), so generation
/// is parallel over maps.
std::vector<LabelMap> synth(const SynthSpec& spec);

// --- SMAP / SMASK text formats ---------------------------------------------
// SMAP:  "SMAP 1\n" then "H W K\n" then H lines of W space-separated labels.
// SMASK: same with magic "SMASK 1", K = 2 and values in {0, 1}, 1 = known.

void write_smap(const std::string& path, const LabelMap& map, int num_classes);
LabelMap read_smap(const std::string& path, int* num_classes = nullptr);

void write_smask(const std::string& path, const Mask& mask);
Mask read_smask(const std::string& path);

/// String-level codecs behind the file functions; parse errors carry the
/// byte offset of the offending token.
std::string encode_smap(const LabelMap& map, int num_classes);
LabelMap decode_smap(const std::string& text, int* num_classes = nullptr);
std::string encode_smask(const Mask& mask);
Mask decode_smask(const std::string& text);

// --- SPNT checkpoint --------------------------------------------------------
// Binary, little-endian: magic "SPNT", u32 version, schedule descriptor
// (u32 kind, u32 T, f64 a, f64 b), spec fields (six u32), u32 layer count,
// per-layer {u16 name length, name bytes, u64 offset, u64 count}, raw f32
// parameters, crc32 of everything after the 8-byte preamble.

struct Checkpoint {
    DenoiserParams params;
    NoiseSchedule schedule;
};

void save_checkpoint(const std::string& path, const DenoiserParams& params,
                     const NoiseSchedule& schedule);
Checkpoint load_checkpoint(const std::string& path);

// --- PNG rendering ----------------------------------------------------------

/// 20 distinct class colors; labels >= 20 wrap around. Index 20 is the black
/// reserved for masked-out (missing) pixels.
using Palette = std::array<std::array<std::uint8_t, 3>, 21>;
const Palette& default_palette();

/// 8-bit paletted PNG. When mask is non-null, unknown pixels render black.
/// Deterministic bytes for identical inputs.
void render_png(const std::string& path, const LabelMap& map, const Mask* mask = nullptr,
                const Palette& palette = default_palette());

}  // namespace sepaint

#endif
