#pragma once

#include <cmath>
#include <cstdint>

namespace smartbal {

// Deterministic 64-bit generator (splitmix64). Used everywhere randomness is
// needed so that results are reproducible from a single root seed and do not
// depend on the standard library's distribution implementations.
class SplitMix64 {
public:
    explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64() {
        std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

    // Uniform double in [0, 1) with 53 random bits.
    double next_unit() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    // Standard normal draw, Marsaglia polar method. Stateless apart from the
    // underlying stream; the paired value is discarded.
    double next_normal() {
        for (;;) {
            const double u = 2.0 * next_unit() - 1.0;
            const double v = 2.0 * next_unit() - 1.0;
            const double s = u * u + v * v;
            if (s > 0.0 && s < 1.0) {
                return u * std::sqrt(-2.0 * std::log(s) / s);
            }
        }
    }

private:
    std::uint64_t state_;
};

namespace detail {
inline std::uint64_t mix64(std::uint64_t x) {
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}
} // namespace detail

// Derives an independent stream seed from a root seed and up to three indices.
// Pure function of its arguments, so parallel workers can seed their runs
// without coordination and the fan-out order cannot affect results.
inline std::uint64_t derive_seed(std::uint64_t root, std::uint64_t a,
                                 std::uint64_t b = 0, std::uint64_t c = 0) {
    std::uint64_t s = detail::mix64(root + 0x9E3779B97F4A7C15ULL);
    s = detail::mix64(s ^ (a + 0xD1B54A32D192ED03ULL));
    s = detail::mix64(s ^ (b + 0x8CB92BA72F3D8DD7ULL));
    s = detail::mix64(s ^ (c + 0xA24BAED4963EE407ULL));
    return s;
}

} // namespace smartbal
