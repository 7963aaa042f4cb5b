#pragma once

#include <array>
#include <cstdint>

namespace bk2f {

// Philox4x32-10 counter-based generator. A block is a pure function of
// (counter, key): no state, no overlap between distinct counters, identical
// output regardless of evaluation order or thread count.
std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> ctr,
                                        std::array<std::uint32_t, 2> key);

// Strictly-in-(0,1) uniform from the 52 high bits of a 64-bit word
// (exact arithmetic: never rounds to 0 or 1).
double u64_to_uniform(std::uint64_t x);

// Inverse standard normal CDF (Acklam's rational approximation,
// |relative error| < 1.2e-9 on (0,1)). No rejection, no branching on draws.
double inverse_normal_cdf(double p);

// The two shocks consumed by one child node: one Philox block keyed by the
// master seed with counter (child_index, step, scenario).
struct ShockPair {
    double z_m;  // mean-process shock
    double z_r;  // short-rate shock
};
ShockPair child_shocks(std::uint64_t seed, std::uint32_t scenario_id,
                       std::uint32_t step, std::uint64_t child_index);

// Raw 128-bit block for the same indexing (collision / overlap tests).
std::array<std::uint32_t, 4> child_block(std::uint64_t seed, std::uint32_t scenario_id,
                                         std::uint32_t step, std::uint64_t child_index);

// Sequential stream over the same generator, for training-time shuffling and
// weight init. Draw n is block (stream_id, n): deterministic in (seed, stream_id).
class CounterStream {
  public:
    CounterStream(std::uint64_t seed, std::uint32_t stream_id)
        : seed_(seed), stream_(stream_id) {}

    std::uint64_t next_u64();
    double uniform();                    // (0,1)
    double uniform(double lo, double hi);
    double normal();
    // Unbiased-in-practice index in [0, n) via 128-bit multiply-shift.
    std::uint64_t index(std::uint64_t n);

  private:
    std::uint64_t seed_;
    std::uint32_t stream_;
    std::uint64_t n_ = 0;
    std::uint32_t cache_[2] = {0, 0};
    bool has_cache_ = false;
};

// SplitMix64 scrambler for deriving secondary seeds (e.g. validation stream).
std::uint64_t splitmix64(std::uint64_t x);

}  // namespace bk2f
