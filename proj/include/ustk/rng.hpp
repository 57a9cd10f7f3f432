#ifndef USTK_RNG_HPP
#define USTK_RNG_HPP

#include <cstdint>
#include <random>

namespace ustk {

inline constexpr const char* kGeneratorName = "mt19937_64/splitmix64";

// Reproducible stream handle: identical (seed, stream) yields identical draws.
struct RngStream {
    std::uint64_t seed = 0;
    std::uint64_t stream = 0;
};

inline std::uint64_t splitmix64(std::uint64_t& x) {
    x += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = x;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

// Engine derived from a stream handle; streams are decorrelated by hashing
// (seed, stream) into the mt19937_64 seed sequence.
class Rng {
public:
    explicit Rng(RngStream s) {
        std::uint64_t x = s.seed;
        std::uint64_t a = splitmix64(x);
        x ^= s.stream * 0x2545f4914f6cdd1dULL + 0x9e3779b97f4a7c15ULL;
        std::uint64_t b = splitmix64(x);
        std::seed_seq seq{static_cast<std::uint32_t>(a), static_cast<std::uint32_t>(a >> 32),
                          static_cast<std::uint32_t>(b), static_cast<std::uint32_t>(b >> 32)};
        eng_.seed(seq);
    }

    std::uint64_t next() { return eng_(); }

    // Unbiased draw in [0, k); rejection sampling, platform-independent.
    std::uint32_t bounded(std::uint32_t k) {
        if (k <= 1) return 0;
        std::uint64_t threshold = (~std::uint64_t{0}) - (~std::uint64_t{0}) % k;
        for (;;) {
            std::uint64_t r = eng_();
            if (r < threshold) return static_cast<std::uint32_t>(r % k);
        }
    }

    double uniform01() {
        return (eng_() >> 11) * (1.0 / 9007199254740992.0);
    }

private:
    std::mt19937_64 eng_;
};

}  // namespace ustk

#endif
