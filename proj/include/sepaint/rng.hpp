#ifndef SEPAINT_RNG_HPP
#define SEPAINT_RNG_HPP

#include <cstdint>

namespace sepaint {

/// Counter-based uniform stream. Draw i of stream (seed) is a pure function
/// of (seed, i), so blocks of draws can be consumed in parallel while the
/// produced bitstream stays identical to sequential consumption.
///
/// Mixing is splitmix64: state_i = mix(seed) + i * golden, output = finalizer.
/// Uniforms are mapped to [1e-12, 1 - 1e-12] so log(eps) and log(-log(eps))
/// stay finite downstream.
double counter_uniform(std::uint64_t seed, std::uint64_t index);

std::uint64_t counter_bits(std::uint64_t seed, std::uint64_t index);

/// A reserved contiguous range of draw indices from one stream.
struct UniformBlock {
    std::uint64_t seed = 0;
    std::uint64_t start = 0;
    std::uint64_t count = 0;

    double at(std::uint64_t i) const { return counter_uniform(seed, start + i); }
};

/// Sequential facade over the counter stream. Draw order is the documented
/// replay contract: consumers take draws one at a time or reserve blocks,
/// and identical (seed, call sequence) yields identical values.
class RngStream {
public:
    explicit RngStream(std::uint64_t seed) : seed_(seed) {}
    RngStream(std::uint64_t seed, std::uint64_t start_counter)
        : seed_(seed), counter_(start_counter) {}

    double next_uniform() { return counter_uniform(seed_, counter_++); }

    UniformBlock reserve(std::uint64_t count) {
        UniformBlock b{seed_, counter_, count};
        counter_ += count;
        return b;
    }

    std::uint64_t seed() const { return seed_; }
    std::uint64_t counter() const { return counter_; }

private:
    std::uint64_t seed_;
    std::uint64_t counter_ = 0;
};

}  // namespace sepaint

#endif
