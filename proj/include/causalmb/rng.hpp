#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

namespace causalmb {

// SplitMix64 (Steele, Lea & Flood; Vigna's reference constants). Chosen as the
// project-wide generator because it is a named, platform-independent 64-bit
// algorithm with published test vectors; those vectors are frozen in the test
// suite. All sampling in the simulator derives from this stream, so datasets
// are reproducible bit-for-bit from a seed on any platform.
class Rng {
public:
    explicit Rng(uint64_t seed) : state_(seed) {}

    uint64_t next_u64() {
        uint64_t z = (state_ += 0x9E3779B97F4A7C15ull);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
        return z ^ (z >> 31);
    }

    // Uniform double in [0, 1) with 53 bits of precision.
    double next_double() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    // Uniform integer in [0, n).
    uint64_t next_below(uint64_t n) {
        // Rejection-free modulo is fine here: n is tiny relative to 2^64.
        return next_u64() % n;
    }

    // Independent child stream. Deterministic: two rounds of the output
    // function applied to (state, tag).
    Rng fork(uint64_t tag) const {
        Rng mix(state_ ^ (tag * 0xD1342543DE82EF95ull));
        uint64_t s = mix.next_u64();
        Rng r(s);
        r.next_u64();
        return r;
    }

    // Index drawn from an explicit probability row (assumed to sum to 1).
    int categorical(const std::vector<double>& probs) {
        double u = next_double();
        double acc = 0.0;
        for (size_t k = 0; k + 1 < probs.size(); ++k) {
            acc += probs[k];
            if (u < acc) return static_cast<int>(k);
        }
        return static_cast<int>(probs.size()) - 1;
    }

    // Flat Dirichlet row via normalized exponential spacings.
    std::vector<double> dirichlet_flat(int r) {
        std::vector<double> row(r);
        double sum = 0.0;
        for (int k = 0; k < r; ++k) {
            double u = next_double();
            row[k] = -std::log(1.0 - u);
            sum += row[k];
        }
        for (int k = 0; k < r; ++k) row[k] /= sum;
        return row;
    }

private:
    uint64_t state_;
};

}  // namespace causalmb
