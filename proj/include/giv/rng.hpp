#ifndef GIV_RNG_HPP
#define GIV_RNG_HPP

#include <cmath>
#include <cstdint>
#include <span>
#include <string>

#include "giv/errors.hpp"

namespace giv {

/// PCG32 (XSH-RR variant). Hand-rolled so that sampled output is
/// bit-identical across platforms and standard libraries; the seed/stream
/// pair gives independent parallel streams for the same seed.
class Pcg32 {
public:
    static constexpr const char* kName = "pcg32";

    explicit Pcg32(std::uint64_t seed, std::uint64_t stream = 0)
        : state_(0), inc_((stream << 1u) | 1u), seed_(seed), stream_(stream) {
        next_u32();
        state_ += seed;
        next_u32();
    }

    std::uint32_t next_u32() {
        std::uint64_t old = state_;
        state_ = old * 6364136223846793005ULL + inc_;
        auto xorshifted =
            static_cast<std::uint32_t>(((old >> 18u) ^ old) >> 27u);
        auto rot = static_cast<std::uint32_t>(old >> 59u);
        return (xorshifted >> rot) | (xorshifted << ((32u - rot) & 31u));
    }

    /// Uniform double in [0, 1) with 53 random mantissa bits.
    double next_double() {
        std::uint64_t hi = next_u32();
        std::uint64_t lo = next_u32();
        return static_cast<double>(((hi << 32u) | lo) >> 11u) * 0x1.0p-53;
    }

    std::uint64_t seed() const noexcept { return seed_; }
    std::uint64_t stream() const noexcept { return stream_; }

private:
    std::uint64_t state_;
    std::uint64_t inc_;
    std::uint64_t seed_;
    std::uint64_t stream_;
};

/// Inverse-CDF draw: returns the smallest k with u < p_0 + ... + p_k.
/// Weights must be non-negative and sum to 1 within 1e-9; u is in [0, 1).
inline std::size_t sample_index(std::span<const double> probs, double u) {
    if (probs.empty()) {
        throw IndexOutOfRange("cannot sample from an empty distribution");
    }
    double total = 0.0;
    for (double p : probs) {
        if (p < -1e-12) {
            throw ProbabilityOutOfRange("negative weight in distribution");
        }
        total += p;
    }
    if (std::abs(total - 1.0) > 1e-9) {
        throw ProbabilityOutOfRange("weights sum to " + std::to_string(total));
    }
    double acc = 0.0;
    for (std::size_t k = 0; k + 1 < probs.size(); ++k) {
        acc += probs[k];
        if (u < acc) return k;
    }
    return probs.size() - 1;
}

}  // namespace giv

#endif
