#include "sepaint/rng.hpp"

namespace sepaint {

namespace {

constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ULL;

std::uint64_t mix64(std::uint64_t z) {
    z ^= z >> 30;
    z *= 0xbf58476d1ce4e5b9ULL;
    z ^= z >> 27;
    z *= 0x94d049bb133111ebULL;
    z ^= z >> 31;
    return z;
}

}  // namespace

std::uint64_t counter_bits(std::uint64_t seed, std::uint64_t index) {
    // offset before mixing: mix64 fixes 0, and seed 0 must still yield a
    // usable stream
    return mix64(mix64(seed + kGolden) + index * kGolden);
}

double counter_uniform(std::uint64_t seed, std::uint64_t index) {
    const double u = static_cast<double>(counter_bits(seed, index) >> 11) * 0x1.0p-53;
    constexpr double lo = 1e-12;
    constexpr double hi = 1.0 - 1e-12;
    return u < lo ? lo : (u > hi ? hi : u);
}

}  // namespace sepaint
