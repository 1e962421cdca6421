#pragma once

#include <cmath>
#include <cstdint>

namespace lsfusion {

// Counter-based random generator. Every draw is a pure function of
// (seed, stream, counter), so scene synthesis is reproducible regardless of
// evaluation order or threading.
class CounterRng {
public:
    explicit CounterRng(uint64_t seed) : seed_(seed) {}

    uint64_t raw(uint64_t stream, uint64_t counter) const {
        uint64_t z = seed_;
        z = mix(z + kGolden * (stream + 1));
        z = mix(z + kGolden * (counter + 1));
        return mix(z);
    }

    // Uniform in [0, 1).
    double uniform(uint64_t stream, uint64_t counter) const {
        return static_cast<double>(raw(stream, counter) >> 11) * 0x1.0p-53;
    }

    double uniform_in(uint64_t stream, uint64_t counter, double lo, double hi) const {
        return lo + (hi - lo) * uniform(stream, counter);
    }

    // Uniform integer in [0, n). n must be > 0.
    uint64_t below(uint64_t stream, uint64_t counter, uint64_t n) const {
        return raw(stream, counter) % n;
    }

    // Standard normal via Box-Muller; consumes counters 2c and 2c+1.
    double normal(uint64_t stream, uint64_t counter) const {
        double u1 = uniform(stream, 2 * counter);
        double u2 = uniform(stream, 2 * counter + 1);
        if (u1 <= 0.0) u1 = 0x1.0p-53;
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * kPi * u2);
    }

private:
    static constexpr uint64_t kGolden = 0x9E3779B97F4A7C15ull;
    static constexpr double kPi = 3.14159265358979323846;

    static uint64_t mix(uint64_t z) {
        z ^= z >> 30;
        z *= 0xBF58476D1CE4E5B9ull;
        z ^= z >> 27;
        z *= 0x94D049BB133111EBull;
        z ^= z >> 31;
        return z;
    }

    uint64_t seed_;
};

}  // namespace lsfusion
