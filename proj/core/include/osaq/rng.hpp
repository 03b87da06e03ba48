#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace osaq {

// Deterministic per-replication random stream. Draw helpers are hand-rolled
// on top of raw 64-bit output so replications are bit-reproducible across
// standard library implementations.
class SlotRng {
public:
    explicit SlotRng(std::uint64_t seed) : engine_(seed) {}

    // Uniform on [0,1) with 53 random bits.
    double uniform() {
        return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
    }

    bool bernoulli(double prob) { return uniform() < prob; }

    // Geometric on {1,2,...}: number of Bernoulli(q) trials until success.
    long geometric(double q) {
        if (q >= 1.0) return 1;
        const double u = uniform();
        // inversion: smallest k with 1-(1-q)^k > u
        return 1 + static_cast<long>(std::floor(std::log1p(-u) / std::log1p(-q)));
    }

private:
    std::mt19937_64 engine_;
};

} // namespace osaq
