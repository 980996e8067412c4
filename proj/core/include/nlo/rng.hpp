#pragma once

#include <cstdint>

namespace nlo {

// Deterministic sampler used everywhere randomness is needed.  splitmix64,
// frozen as "splitmix64/v1": the output sequence for a given seed is part of
// the report contract (re-running a config with the same seed must reproduce
// reports byte for byte), so do not swap the algorithm without versioning.
class Sampler {
public:
    static constexpr const char* version = "splitmix64/v1";

    explicit Sampler(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64() {
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ull);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        return z ^ (z >> 31);
    }

    // uniform in [0, 1)
    double uniform() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    // uniform in [lo, hi)
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // uniform integer in [0, n); n > 0.  Rejection-free modulo is fine here:
    // n is tiny compared to 2^64 so the bias is unobservable, and keeping the
    // mapping trivial makes the sequence easy to reproduce in other tools.
    std::uint64_t below(std::uint64_t n) { return next_u64() % n; }

    // derive an independent stream (for per-sample or per-task seeding)
    Sampler split(std::uint64_t salt) {
        return Sampler(next_u64() ^ (0xa0761d6478bd642full * (salt + 1)));
    }

private:
    std::uint64_t state_;
};

} // namespace nlo
