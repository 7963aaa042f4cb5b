#include "bk2f/rng.hpp"

#include <cmath>

namespace bk2f {

namespace {

constexpr std::uint32_t kPhiloxM0 = 0xD2511F53u;
constexpr std::uint32_t kPhiloxM1 = 0xCD9E8D57u;
constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;

inline void mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t& hi,
                    std::uint32_t& lo) {
    const std::uint64_t p = static_cast<std::uint64_t>(a) * b;
    hi = static_cast<std::uint32_t>(p >> 32);
    lo = static_cast<std::uint32_t>(p);
}

}  // namespace

std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> ctr,
                                        std::array<std::uint32_t, 2> key) {
    for (int round = 0; round < 10; ++round) {
        std::uint32_t hi0, lo0, hi1, lo1;
        mulhilo(kPhiloxM0, ctr[0], hi0, lo0);
        mulhilo(kPhiloxM1, ctr[2], hi1, lo1);
        ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
        key[0] += kWeyl0;
        key[1] += kWeyl1;
    }
    return ctr;
}

double u64_to_uniform(std::uint64_t x) {
    // 52 random bits, offset by half a step. With 52 bits the +0.5 is exactly
    // representable for every index, so the result lies strictly in
    // [2^-53, 1 - 2^-53] with no rounding anywhere (a 53-bit variant rounds
    // its top value to exactly 1.0, which an inverse CDF maps to infinity).
    return (static_cast<double>(x >> 12) + 0.5) * 0x1.0p-52;
}

double inverse_normal_cdf(double p) {
    // Acklam's piecewise rational approximation.
    static constexpr double a[6] = {-3.969683028665376e+01, 2.209460984245205e+02,
                                    -2.759285104469687e+02, 1.383577518672690e+02,
                                    -3.066479806614716e+01, 2.506628277459239e+00};
    static constexpr double b[5] = {-5.447609879822406e+01, 1.615858368580409e+02,
                                    -1.556989798598866e+02, 6.680131188771972e+01,
                                    -1.328068155288572e+01};
    static constexpr double c[6] = {-7.784894002430293e-03, -3.223964580411365e-01,
                                    -2.400758277161838e+00, -2.549732539343734e+00,
                                    4.374664141464968e+00,  2.938163982698783e+00};
    static constexpr double d[4] = {7.784695709041462e-03, 3.224671290700398e-01,
                                    2.445134137142996e+00, 3.754408661907416e+00};
    constexpr double p_low = 0.02425;

    if (!(p > 0.0 && p < 1.0)) return std::nan("");
    if (p < p_low) {
        const double q = std::sqrt(-2.0 * std::log(p));
        return (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
               ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    }
    if (p > 1.0 - p_low) {
        const double q = std::sqrt(-2.0 * std::log(1.0 - p));
        return -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
               ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    }
    const double q = p - 0.5;
    const double r = q * q;
    return (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
           (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
}

std::array<std::uint32_t, 4> child_block(std::uint64_t seed, std::uint32_t scenario_id,
                                         std::uint32_t step, std::uint64_t child_index) {
    const std::array<std::uint32_t, 2> key = {static_cast<std::uint32_t>(seed),
                                              static_cast<std::uint32_t>(seed >> 32)};
    const std::array<std::uint32_t, 4> ctr = {static_cast<std::uint32_t>(child_index),
                                              static_cast<std::uint32_t>(child_index >> 32),
                                              step, scenario_id};
    return philox4x32(ctr, key);
}

ShockPair child_shocks(std::uint64_t seed, std::uint32_t scenario_id,
                       std::uint32_t step, std::uint64_t child_index) {
    const auto blk = child_block(seed, scenario_id, step, child_index);
    const std::uint64_t wm = (static_cast<std::uint64_t>(blk[1]) << 32) | blk[0];
    const std::uint64_t wr = (static_cast<std::uint64_t>(blk[3]) << 32) | blk[2];
    return {inverse_normal_cdf(u64_to_uniform(wm)),
            inverse_normal_cdf(u64_to_uniform(wr))};
}

std::uint64_t CounterStream::next_u64() {
    if (has_cache_) {
        has_cache_ = false;
        return (static_cast<std::uint64_t>(cache_[1]) << 32) | cache_[0];
    }
    const std::array<std::uint32_t, 2> key = {static_cast<std::uint32_t>(seed_),
                                              static_cast<std::uint32_t>(seed_ >> 32)};
    const std::array<std::uint32_t, 4> ctr = {static_cast<std::uint32_t>(n_),
                                              static_cast<std::uint32_t>(n_ >> 32),
                                              0xC0FFEEu, stream_};
    const auto blk = philox4x32(ctr, key);
    ++n_;
    cache_[0] = blk[2];
    cache_[1] = blk[3];
    has_cache_ = true;
    return (static_cast<std::uint64_t>(blk[1]) << 32) | blk[0];
}

double CounterStream::uniform() { return u64_to_uniform(next_u64()); }

double CounterStream::uniform(double lo, double hi) {
    return lo + (hi - lo) * uniform();
}

double CounterStream::normal() { return inverse_normal_cdf(uniform()); }

std::uint64_t CounterStream::index(std::uint64_t n) {
    return static_cast<std::uint64_t>(
        (static_cast<unsigned __int128>(next_u64()) * n) >> 64);
}

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

}  // namespace bk2f
