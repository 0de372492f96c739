// SPDX-License-Identifier: Apache-2.0

#ifndef PFV_RNG_HPP
#define PFV_RNG_HPP

#include <cstdint>

namespace pfv {

// splitmix64. Chosen over <random> engines+distributions because outputs
// must be bit-identical across platforms and standard library versions;
// generated packet corpora and golden files depend on it.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next() {
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    // Unbiased value in [0, bound). bound must be nonzero.
    std::uint64_t below(std::uint64_t bound) {
        if (bound == 0) return 0;
        std::uint64_t threshold = (0 - bound) % bound;
        for (;;) {
            std::uint64_t r = next();
            if (r >= threshold) return r % bound;
        }
    }

    // Inclusive range [lo, hi].
    std::uint64_t in_range(std::uint64_t lo, std::uint64_t hi) {
        if (hi <= lo) return lo;
        std::uint64_t width = hi - lo;
        if (width == ~0ULL) return next();
        return lo + below(width + 1);
    }

    std::uint8_t byte() { return static_cast<std::uint8_t>(next() & 0xff); }

    // Independent stream derived from this seed and a label.
    Rng fork(std::uint64_t label) const {
        Rng r(state_ ^ (0x632be59bd9b4e019ULL * (label + 1)));
        r.next();
        return r;
    }

private:
    std::uint64_t state_;
};

}  // namespace pfv

#endif
